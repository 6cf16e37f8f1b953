// Stable norms for families of Riemannian metrics: the stationary ergodic
// norm sqrt(Lbar) through the effective-Lagrangian pipeline, and the
// classical periodic norm as an independent Dijkstra oracle on a weighted
// lattice graph.
#pragma once

#include <queue>

#include "hjh/audit.hpp"
#include "hjh/effective.hpp"

namespace hjh {

template <int N>
using Mat = std::array<std::array<double, N>, N>;

template <int N>
struct MetricFamily {
    std::string name;
    // quadratic form g_{w,x}
    std::function<Mat<N>(const Vec<N>&, const EnvironmentSample&)> g;
    double eig_min = 1.0;  // global bounds on the spectrum, for envelopes
    double eig_max = 1.0;
    bool conformal_axis0 = false;  // g = c(x_1) * id
    std::function<double(const Vec<N>&, const EnvironmentSample&)> conformal_factor;

    static MetricFamily flat() {
        MetricFamily f;
        f.name = "flat";
        f.g = [](const Vec<N>&, const EnvironmentSample&) {
            Mat<N> m{};
            for (int i = 0; i < N; ++i) m[i][i] = 1.0;
            return m;
        };
        f.eig_min = f.eig_max = 1.0;
        f.conformal_axis0 = true;
        f.conformal_factor = [](const Vec<N>&, const EnvironmentSample&) {
            return 1.0;
        };
        return f;
    }

    // g = (1 + a cos 2 pi x_1)^2 * id
    static MetricFamily conformal_cosine(double a) {
        if (std::abs(a) >= 1.0)
            throw MediumError("conformal amplitude must satisfy |a| < 1");
        MetricFamily f;
        f.name = "conformal_cosine(" + format_double(a) + ")";
        auto c = [a](double x1) {
            double b = 1.0 + a * std::cos(2.0 * M_PI * frac_mod1(x1));
            return b * b;
        };
        f.g = [c](const Vec<N>& x, const EnvironmentSample&) {
            Mat<N> m{};
            for (int i = 0; i < N; ++i) m[i][i] = c(x[0]);
            return m;
        };
        double cmin = (1.0 - std::abs(a)) * (1.0 - std::abs(a));
        double cmax = (1.0 + std::abs(a)) * (1.0 + std::abs(a));
        f.eig_min = cmin;
        f.eig_max = cmax;
        f.conformal_axis0 = true;
        f.conformal_factor = [c](const Vec<N>& x, const EnvironmentSample&) {
            return c(x[0]);
        };
        return f;
    }
};

// (g1)-(g3) audit: symmetry, positive-definiteness, the coercivity sandwich
// and stationarity at sampled points.
template <int N>
inline AssumptionEntry audit_metric_family(const MetricFamily<N>& f,
                                           const EnvironmentSample& w,
                                           int samples = 500) {
    Rng rng(7);
    double worst = 0;
    bool ok = true;
    for (int s = 0; s < samples; ++s) {
        Vec<N> x{};
        for (int a = 0; a < N; ++a) x[a] = (2 * rng.uniform01() - 1) * 3.0;
        Mat<N> g = f.g(x, w);
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                worst = std::max(worst, std::abs(g[i][j] - g[j][i]));
        // eigenvalue bounds for N <= 2
        double lo, hi;
        if constexpr (N == 1) {
            lo = hi = g[0][0];
        } else {
            double tr = g[0][0] + g[1][1];
            double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
            lo = tr / 2.0 - disc;
            hi = tr / 2.0 + disc;
        }
        if (lo <= 0) ok = false;
        if (lo < f.eig_min - 1e-9 || hi > f.eig_max + 1e-9) ok = false;
    }
    return {"g1-g3-family", ok && worst < 1e-12, worst,
            "symmetry defect; spectrum within declared bounds"};
}

// Medium with L(x,v,w) = g_{w,x}(v,v) and H(x,p,w) = p . g^{-1} p / 4.
template <int N>
inline Medium<N> metric_medium(const MetricFamily<N>& f) {
    {
        EnvironmentSample probe{"", 0, {}};
        auto entry = audit_metric_family(f, probe);
        if (!entry.pass)
            throw MediumError("metric family rejected: " + entry.note);
    }
    Medium<N> m;
    m.kind = MediumKind::Metric;
    m.describe = "metric " + f.name;
    m.id = hex64(fnv1a64("metric|" + std::to_string(N) + "|" + f.name));
    m.homogeneity_degree = 2;
    auto g = f.g;
    m.H = [g](const Vec<N>& x, const Vec<N>& p, const EnvironmentSample& w) {
        Mat<N> gm = g(x, w);
        // invert (N <= 2)
        Mat<N> inv{};
        if constexpr (N == 1) {
            inv[0][0] = 1.0 / gm[0][0];
        } else {
            double det = gm[0][0] * gm[1][1] - gm[0][1] * gm[1][0];
            inv[0][0] = gm[1][1] / det;
            inv[1][1] = gm[0][0] / det;
            inv[0][1] = -gm[0][1] / det;
            inv[1][0] = -gm[1][0] / det;
        }
        double s = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) s += p[i] * inv[i][j] * p[j];
        return 0.25 * s;
    };
    m.L_closed = [g](const Vec<N>& x, const Vec<N>& q, const EnvironmentSample& w) {
        Mat<N> gm = g(x, w);
        double s = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) s += q[i] * gm[i][j] * q[j];
        return s;
    };
    double emin = f.eig_min, emax = f.eig_max;
    m.env = CoercivityEnvelope::from_hamiltonian_bounds(
        [emax](double r) { return 0.25 * r * r / emax; },
        [emin](double r) { return 0.25 * r * r / emin; });
    if (f.conformal_axis0) {
        m.kernel.form = KernelInfo<N>::Form::ConformalAxis0;
        m.kernel.field = f.conformal_factor;
    } else {
        m.kernel.form = KernelInfo<N>::Form::Generic;
    }
    m.sampler = [](std::uint64_t) { return std::vector<double>{}; };
    return m;
}

// ---------------------------------------------------------------------------
// Classical periodic stable norm via Dijkstra on a weighted lattice graph.

// Shortest g-length path between two lattice nodes inside a box. Edges go to
// a king-move-plus neighborhood of radius 2; weights sample the metric at
// edge midpoints.
template <int N>
inline double dijkstra_length(const MetricFamily<N>& f, const EnvironmentSample& w,
                              const Box<N>& box, double res, const Idx<N>& from,
                              const Idx<N>& to) {
    std::vector<Idx<N>> offs;
    {
        Idx<N> k{};
        for (int a = 0; a < N; ++a) k[a] = -2;
        while (true) {
            bool zero = true;
            for (int a = 0; a < N; ++a)
                if (k[a] != 0) zero = false;
            if (!zero) offs.push_back(k);
            int a = N - 1;
            while (a >= 0 && ++k[a] > 2) k[a--] = -2;
            if (a < 0) break;
        }
    }
    const std::size_t n = box.size();
    std::vector<double> dist(n, kInf);
    using Node = std::pair<double, std::size_t>;
    std::priority_queue<Node, std::vector<Node>, std::greater<>> pq;
    dist[box.flat(from)] = 0.0;
    pq.push({0.0, box.flat(from)});
    const std::size_t goal = box.flat(to);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        if (u == goal) return d;
        // unflatten
        Idx<N> iu{};
        {
            std::size_t rem = u;
            for (int a = N - 1; a >= 0; --a) {
                iu[a] = box.lo[a] + static_cast<int>(rem % box.extent(a));
                rem /= box.extent(a);
            }
        }
        for (const auto& k : offs) {
            Idx<N> iv = iu + k;
            if (!box.contains(iv)) continue;
            Vec<N> mid{}, edge{};
            for (int a = 0; a < N; ++a) {
                mid[a] = (iu[a] + iv[a]) * 0.5 * res;
                edge[a] = k[a] * res;
            }
            Mat<N> gm = f.g(mid, w);
            double q = 0;
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) q += edge[i] * gm[i][j] * edge[j];
            double wgt = std::sqrt(q);
            std::size_t v = box.flat(iv);
            if (dist[u] + wgt < dist[v]) {
                dist[v] = dist[u] + wgt;
                pq.push({dist[v], v});
            }
        }
    }
    throw Error("dijkstra: target unreachable (graph disconnected; refine "
                "the resolution)");
}

struct PeriodicNormResult {
    double value = 0;
    double spread = 0;
    std::vector<double> per_n;
};

// ||h||_s = lim ell_g(n h) / n, with ell_g approximated by the shortest
// lattice path from 0 to n h on the cover. The corridor half-width is
// certified: any path leaving the corridor is provably longer than the best
// one found inside. For conformal metrics the certificate combines the
// strip bound integral sqrt(c(x_1)) dx_1 with the lower eigenvalue bound on
// transverse travel (Minkowski inequality); otherwise only the eigenvalue
// bound is available and the corridor may grow to the full ellipse.
template <int N>
inline PeriodicNormResult periodic_stable_norm(const MetricFamily<N>& f,
                                               const Idx<N>& h,
                                               const std::vector<int>& schedule,
                                               double res = 0.05) {
    EnvironmentSample w{"", 0, {}};
    PeriodicNormResult out;
    double cpu_d = 1.0 / res;
    int cpu = static_cast<int>(std::lround(cpu_d));
    if (std::abs(cpu_d - cpu) > 1e-9)
        throw ConfigError("graph resolution must divide the unit cell");

    // lower bound for integral sqrt(c) over one unit period (conformal only)
    double strip_unit = 0;
    if (f.conformal_axis0) {
        const int q = 4096;
        for (int i = 0; i < q; ++i) {
            Vec<N> x{};
            x[0] = (i + 0.5) / q;
            strip_unit += std::sqrt(f.conformal_factor(x, w));
        }
        strip_unit = strip_unit / q - 1e-6;
    }

    for (int n : schedule) {
        double half_w = 2.0;
        for (int attempt = 0;; ++attempt) {
            Box<N> box;
            for (int a = 0; a < N; ++a) {
                int lo = std::min(0, n * h[a]), hi = std::max(0, n * h[a]);
                box.lo[a] = lo * cpu - static_cast<int>(half_w * cpu);
                box.hi[a] = hi * cpu + static_cast<int>(half_w * cpu);
            }
            Idx<N> from{}, to{};
            for (int a = 0; a < N; ++a) to[a] = n * h[a] * cpu;
            double len = dijkstra_length(f, w, box, res, from, to);

            Vec<N> disp{};
            for (int a = 0; a < N; ++a) disp[a] = n * h[a];
            double d = norm2<N>(disp);
            double exit_len;
            if (N == 2 && f.conformal_axis0) {
                // strip bound along axis 0 (period 1 metric: each crossed
                // unit contributes at least strip_unit), eig_min transverse
                double dx1 = std::abs(disp[0]);
                double dx2 = N > 1 ? std::abs(disp[1]) : 0.0;
                double strip = strip_unit * dx1;
                double smin = std::sqrt(f.eig_min);
                double via_x2 = std::sqrt(strip * strip +
                                          f.eig_min * (dx2 + 2 * half_w) *
                                              (dx2 + 2 * half_w));
                double via_x1 =
                    std::sqrt((strip + 2 * half_w * smin) * (strip + 2 * half_w * smin) +
                              f.eig_min * dx2 * dx2);
                exit_len = std::min(via_x2, via_x1);
            } else {
                exit_len = std::sqrt(f.eig_min * (d * d + 4.0 * half_w * half_w));
            }
            if (exit_len >= len) {
                out.per_n.push_back(len / n);
                break;
            }
            half_w *= 2.0;
            if (attempt >= 6)
                throw Error("periodic_stable_norm: corridor certification "
                            "failed; metric too degenerate");
        }
    }
    out.value = out.per_n.back();
    for (std::size_t j = (out.per_n.size() >= 3 ? out.per_n.size() - 3 : 0);
         j < out.per_n.size(); ++j)
        out.spread = std::max(out.spread, std::abs(out.per_n[j] - out.value));
    return out;
}

// ---------------------------------------------------------------------------

template <int N>
struct StableNormTable {
    std::vector<Vec<N>> dirs;
    std::vector<double> values;
    std::vector<double> spread;
    std::string method;  // "ergodic" or "periodic-oracle"
    std::string medium_id;

    double value(const Vec<N>& h, double tol = 1e-9) const {
        for (std::size_t i = 0; i < dirs.size(); ++i)
            if (norm2<N>(dirs[i] - h) <= tol) return values[i];
        throw Error("direction not in the stable-norm table");
    }

    bool has(const Vec<N>& h, double tol = 1e-9) const {
        for (const auto& d : dirs)
            if (norm2<N>(d - h) <= tol) return true;
        return false;
    }
};

// ||h||_{s,G} = sqrt(convexified Lbar(h)). A negative Lbar on a metric
// medium signals a pipeline defect, not noise.
template <int N>
inline StableNormTable<N> stationary_stable_norm(const EffectiveTable<N>& table) {
    if (table.medium_kind != MediumKind::Metric)
        throw Error("stationary stable norm needs a table built from a metric medium");
    StableNormTable<N> out;
    out.method = "ergodic";
    out.medium_id = table.medium_id;
    for (std::size_t i = 0; i < table.grid.points.size(); ++i) {
        double v = table.convexified[i];
        if (v < -1e-12)
            throw Error("negative effective Lagrangian on a metric medium (" +
                        format_double(v) + "); pipeline defect");
        out.dirs.push_back(table.grid.points[i]);
        out.values.push_back(std::sqrt(std::max(0.0, v)));
        double est = std::max(std::abs(v), 1e-12);
        // first-order propagation of the schedule spread through sqrt
        out.spread.push_back(0.5 * table.schedule_spread[i] / std::sqrt(est));
    }
    return out;
}

struct NormAuditReport {
    double positivity_violation = 0;   // max(-||h||) off zero, relative floor
    double homogeneity_violation = 0;  // alpha = 2 scaling through Lbar
    double triangle_violation = 0;     // relative triangle defect
    bool pass(double tol) const {
        return positivity_violation <= tol && homogeneity_violation <= tol &&
               triangle_violation <= tol;
    }
};

template <int N>
inline NormAuditReport norm_audit(const StableNormTable<N>& t) {
    NormAuditReport rep;
    for (std::size_t i = 0; i < t.dirs.size(); ++i) {
        double nn = norm2<N>(t.dirs[i]);
        if (nn == 0) {
            rep.positivity_violation =
                std::max(rep.positivity_violation, std::abs(t.values[i]));
            continue;
        }
        if (t.values[i] <= 0)
            rep.positivity_violation = std::max(rep.positivity_violation, 1.0);
        // absolute homogeneity over in-table pairs (h, lambda h)
        for (double lam : {-1.0, 0.5, 2.0}) {
            Vec<N> lh = lam * t.dirs[i];
            if (!t.has(lh)) continue;
            double lhs = t.value(lh);
            double rhs = std::abs(lam) * t.values[i];
            rep.homogeneity_violation =
                std::max(rep.homogeneity_violation,
                         std::abs(lhs - rhs) / std::max(rhs, 1e-12));
        }
    }
    // triangle inequality on in-table triples
    for (std::size_t i = 0; i < t.dirs.size(); ++i)
        for (std::size_t j = 0; j < t.dirs.size(); ++j) {
            Vec<N> sum = t.dirs[i] + t.dirs[j];
            if (!t.has(sum)) continue;
            double lhs = t.value(sum);
            double rhs = t.values[i] + t.values[j];
            if (lhs > rhs)
                rep.triangle_violation = std::max(
                    rep.triangle_violation, (lhs - rhs) / std::max(rhs, 1e-12));
        }
    return rep;
}

}  // namespace hjh
