// Effective Lagrangian via subadditive limits of normalized minimal actions,
// environment averaging, convexification, and the discrete Legendre-Fenchel
// conjugate that yields the effective Hamiltonian.
#pragma once

#include <filesystem>

#include "hjh/action_cache.hpp"

namespace hjh {

// Phi_eps: R^b -> Z^b, componentwise floor(a_i / eps) in the standard basis.
// Satisfies |eps Phi_eps(h) - h| <= eps b.
template <int N>
inline Idx<N> phi_map(double eps, const Vec<N>& h) {
    if (eps <= 0) throw Error("phi_map: eps must be positive");
    Idx<N> g{};
    for (int i = 0; i < N; ++i)
        g[i] = static_cast<int>(std::floor(h[i] / eps));
    return g;
}

template <int N>
struct SubadditiveSeries {
    Vec<N> h{};
    std::string omega;
    std::uint64_t seed = 0;
    Vec<N> base{};                 // base point of the anchored actions
    std::vector<int> schedule;     // horizons n_1 < ... < n_k
    std::vector<double> values;    // a_j = phi(base, base + Phi_{1/n_j}(h), n_j) / n_j
    double estimate = 0;           // last-horizon value
    double spread = 0;             // max_{j >= k-2} |a_j - a_k|

    void finalize() {
        estimate = values.back();
        spread = 0;
        std::size_t k = values.size();
        for (std::size_t j = (k >= 3 ? k - 3 : 0); j < k; ++j)
            spread = std::max(spread, std::abs(values[j] - values.back()));
    }
};

// Lattice sizing for anchored estimates: cone slope from the envelopes for
// the worst displacement, domain large enough that cones stay interior.
struct EstimateGrid {
    double dx = 0.05;
    double dt = 0.2;
    double safety = 1.5;

    int cells_per_unit() const {
        double c = 1.0 / dx;
        int k = static_cast<int>(std::lround(c));
        if (std::abs(c - k) > 1e-9)
            throw ConfigError("dx must divide the unit cell (1/dx integer), got dx=" +
                              format_double(dx));
        return k;
    }
};

template <int N>
inline Lattice<N> lattice_for_query(const Medium<N>& m, const EstimateGrid& g,
                                    const Vec<N>& from, const Vec<N>& to, double t) {
    Lattice<N> lat;
    lat.dx = g.dx;
    lat.dt = g.dt;
    double d = norm2<N>(to - from);
    lat.speed_cap = cone_slope(m.env, d, t, g.safety);
    double anchor = std::max(norm_inf<N>(from), norm_inf<N>(to));
    // the reach ceiling makes the discrete cone slightly wider than A t
    int steps = lat.steps_of(t);
    lat.domain_radius = anchor + lat.reach() * steps * g.dx + 2.0 * g.dx;
    return lat;
}

template <int N>
inline SubadditiveSeries<N> subadditive_estimate(
    const Medium<N>& m, const EnvironmentSample& w, const Vec<N>& h,
    const std::vector<int>& schedule, const EstimateGrid& grid,
    const Vec<N>& base = {}, const std::filesystem::path& cache_dir = {},
    CacheStats<N>* stats = nullptr) {
    if (schedule.empty()) throw ConfigError("subadditive schedule is empty");
    for (std::size_t j = 1; j < schedule.size(); ++j)
        if (schedule[j] <= schedule[j - 1])
            throw ConfigError("subadditive schedule must increase");

    SubadditiveSeries<N> out;
    out.h = h;
    out.omega = env_digest(w);
    out.seed = w.seed;
    out.base = base;
    out.schedule = schedule;

    const int cpu = grid.cells_per_unit();
    for (int n : schedule) {
        Idx<N> g = phi_map<N>(1.0 / n, h);
        Vec<N> target = base;
        for (int a = 0; a < N; ++a) target[a] += static_cast<double>(g[a]);
        Lattice<N> lat = lattice_for_query(m, grid, base, target, static_cast<double>(n));
        Idx<N> i0{}, i1{};
        for (int a = 0; a < N; ++a) {
            i0[a] = static_cast<int>(std::lround(base[a] * cpu));
            i1[a] = i0[a] + g[a] * cpu;
        }
        ConeDpOptions<N> opt;
        opt.prune_to_target = true;
        opt.target = i1;
        int steps = lat.steps_of(static_cast<double>(n));
        ActionTable<N> tab =
            minimal_action_table(m, w, lat, i0, steps, opt, cache_dir, stats);
        out.values.push_back(tab.values.at(i1) / n);
    }
    out.finalize();
    return out;
}

// ---------------------------------------------------------------------------
// Direction grids and the effective table.

template <int N>
struct DirectionGrid {
    std::vector<Vec<N>> points;

    void validate() const {
        bool has_zero = false;
        for (const auto& p : points) {
            if (norm2<N>(p) == 0) has_zero = true;
            bool found = false;
            for (const auto& q : points)
                if (norm2<N>(q + p) == 0) found = true;
            if (!found)
                throw ConfigError("direction grid is not symmetric under negation");
        }
        if (!has_zero) throw ConfigError("direction grid must contain 0");
    }

    // 1D uniform helper
    static DirectionGrid uniform1d(double hmax, double step) {
        static_assert(N == 1);
        DirectionGrid g;
        int k = static_cast<int>(std::lround(hmax / step));
        for (int i = -k; i <= k; ++i) g.points.push_back(Vec<1>{i * step});
        return g;
    }
};

template <int N>
struct EffectiveTable {
    DirectionGrid<N> grid;
    std::vector<double> raw;
    std::vector<double> convexified;
    std::vector<double> omega_spread;     // max deviation across seeds
    std::vector<double> schedule_spread;  // max spread across seeds
    std::vector<bool> unconverged;
    std::vector<std::vector<double>> per_seed;  // per direction, per seed

    std::vector<Vec<N>> momentum_grid;
    std::vector<double> hbar;

    // provenance
    std::string medium_id;
    MediumKind medium_kind = MediumKind::Periodic;
    int homogeneity_degree = 0;
    CoercivityEnvelope env;
    std::vector<std::uint64_t> seeds;
    std::vector<int> schedule;
    std::vector<Vec<N>> base_points;
    EstimateGrid lattice;

    std::size_t index_of(const Vec<N>& h, double tol = 1e-9) const {
        for (std::size_t i = 0; i < grid.points.size(); ++i)
            if (norm2<N>(grid.points[i] - h) <= tol) return i;
        throw Error("direction not on the grid");
    }

    bool has(const Vec<N>& h, double tol = 1e-9) const {
        for (const auto& p : grid.points)
            if (norm2<N>(p - h) <= tol) return true;
        return false;
    }

    double value(const Vec<N>& h) const { return convexified[index_of(h)]; }

    // piecewise-linear interpolation of the convexified table (1D grids)
    double interp(double h) const {
        static_assert(N == 1);
        std::vector<std::size_t> order(grid.points.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return grid.points[a][0] < grid.points[b][0];
        });
        double h_lo = grid.points[order.front()][0];
        double h_hi = grid.points[order.back()][0];
        if (h < h_lo - 1e-12 || h > h_hi + 1e-12)
            throw Error("interp: direction " + format_double(h) +
                        " outside the table range [" + format_double(h_lo) + "," +
                        format_double(h_hi) + "]");
        h = std::clamp(h, h_lo, h_hi);
        for (std::size_t j = 1; j < order.size(); ++j) {
            double a = grid.points[order[j - 1]][0];
            double b = grid.points[order[j]][0];
            if (h <= b + 1e-15) {
                double t = b > a ? (h - a) / (b - a) : 0.0;
                return convexified[order[j - 1]] +
                       t * (convexified[order[j]] - convexified[order[j - 1]]);
            }
        }
        return convexified[order.back()];
    }
};

// ---------------------------------------------------------------------------
// Convexification: lower convex envelope over the direction grid, followed
// by a repair sweep that enforces the midpoint inequality exactly in float
// arithmetic on every in-grid triple.

namespace detail {

template <int N>
inline void midpoint_repair(const std::vector<Vec<N>>& pts, std::vector<double>& v) {
    // collect triples (a, b, mid) with mid on the grid
    struct Triple {
        std::size_t a, b, mid;
    };
    std::vector<Triple> triples;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            Vec<N> mid = 0.5 * (pts[a] + pts[b]);
            for (std::size_t c = 0; c < pts.size(); ++c)
                if (c != a && c != b && norm2<N>(pts[c] - mid) <= 1e-12)
                    triples.push_back({a, b, c});
        }
    for (int rounds = 0; rounds < 1000; ++rounds) {
        bool changed = false;
        for (const auto& t : triples) {
            double bound = 0.5 * (v[t.a] + v[t.b]);
            if (v[t.mid] > bound) {
                v[t.mid] = bound;
                changed = true;
            }
        }
        if (!changed) return;
    }
}

}  // namespace detail

template <int N>
inline std::vector<double> convexify(const std::vector<Vec<N>>& pts,
                                     const std::vector<double>& raw);

// 1D: lower hull of (h, raw) by monotone chain.
template <>
inline std::vector<double> convexify<1>(const std::vector<Vec<1>>& pts,
                                        const std::vector<double>& raw) {
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pts[a][0] < pts[b][0]; });
    std::vector<std::size_t> hull;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        std::size_t i = order[oi];
        while (hull.size() >= 2) {
            std::size_t p = hull[hull.size() - 2], q = hull.back();
            double cross = (pts[q][0] - pts[p][0]) * (raw[i] - raw[p]) -
                           (pts[i][0] - pts[p][0]) * (raw[q] - raw[p]);
            if (cross < 0) hull.pop_back();  // q above chord p-i
            else break;
        }
        hull.push_back(i);
    }
    std::vector<double> out(raw.size());
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        std::size_t i = order[oi];
        // locate hull segment containing pts[i]
        double h = pts[i][0];
        for (std::size_t s = 1; s < hull.size(); ++s) {
            double a = pts[hull[s - 1]][0], b = pts[hull[s]][0];
            if (h >= a - 1e-15 && h <= b + 1e-15) {
                double t = b > a ? (h - a) / (b - a) : 0.0;
                out[i] = raw[hull[s - 1]] + t * (raw[hull[s]] - raw[hull[s - 1]]);
                break;
            }
        }
        out[i] = std::min(out[i], raw[i]);
    }
    detail::midpoint_repair<1>(pts, out);
    return out;
}

// 2D: Caratheodory search over grid pairs and triples (the grids here are
// small), then the same repair sweep.
template <>
inline std::vector<double> convexify<2>(const std::vector<Vec<2>>& pts,
                                        const std::vector<double>& raw) {
    std::vector<double> out = raw;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        double best = raw[i];
        // segments through pts[i]
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                Vec<2> ab = pts[b] - pts[a];
                Vec<2> ai = pts[i] - pts[a];
                double den = dot<2>(ab, ab);
                if (den < 1e-18) continue;
                double t = dot<2>(ai, ab) / den;
                if (t < -1e-12 || t > 1.0 + 1e-12) continue;
                Vec<2> proj = pts[a] + (t * ab);
                if (norm2<2>(proj - pts[i]) > 1e-10) continue;
                best = std::min(best, raw[a] + t * (raw[b] - raw[a]));
            }
        // triangles containing pts[i]
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                for (std::size_t c = b + 1; c < n; ++c) {
                    Vec<2> v0 = pts[b] - pts[a], v1 = pts[c] - pts[a],
                           v2 = pts[i] - pts[a];
                    double den = v0[0] * v1[1] - v1[0] * v0[1];
                    if (std::abs(den) < 1e-14) continue;
                    double l1 = (v2[0] * v1[1] - v1[0] * v2[1]) / den;
                    double l2 = (v0[0] * v2[1] - v2[0] * v0[1]) / den;
                    double l0 = 1.0 - l1 - l2;
                    if (l0 < -1e-10 || l1 < -1e-10 || l2 < -1e-10) continue;
                    best = std::min(best, l0 * raw[a] + l1 * raw[b] + l2 * raw[c]);
                }
        out[i] = best;
    }
    detail::midpoint_repair<2>(pts, out);
    return out;
}

// ---------------------------------------------------------------------------

template <int N>
struct EffectiveOptions {
    std::vector<std::uint64_t> seeds = {1};
    std::vector<int> schedule = {4, 8, 16};
    EstimateGrid lattice;
    std::vector<Vec<N>> base_points = {Vec<N>{}};
    double unconverged_fraction = 0.5;  // spread vs |value| flag threshold
    double unconverged_floor = 0.05;
    std::filesystem::path cache_dir;
};

template <int N>
inline EffectiveTable<N> effective_lagrangian_table(const Medium<N>& m,
                                                    const DirectionGrid<N>& grid,
                                                    const EffectiveOptions<N>& opt,
                                                    CacheStats<N>* stats = nullptr) {
    grid.validate();
    if (opt.seeds.empty()) throw ConfigError("need at least one seed");
    if (opt.base_points.empty()) throw ConfigError("need at least one base point");

    EffectiveTable<N> table;
    table.grid = grid;
    table.medium_id = m.id;
    table.medium_kind = m.kind;
    table.homogeneity_degree = m.homogeneity_degree;
    table.env = m.env;
    table.seeds = opt.seeds;
    table.schedule = opt.schedule;
    table.base_points = opt.base_points;
    table.lattice = opt.lattice;

    const std::size_t nd = grid.points.size();
    table.raw.resize(nd);
    table.omega_spread.resize(nd);
    table.schedule_spread.resize(nd);
    table.unconverged.resize(nd);
    table.per_seed.assign(nd, {});

    for (std::size_t d = 0; d < nd; ++d) {
        const Vec<N>& h = grid.points[d];
        double spread_sched = 0;
        for (std::uint64_t seed : opt.seeds) {
            EnvironmentSample w = sample_environment(m, seed);
            double best = kInf;
            double best_spread = 0;
            for (const Vec<N>& base : opt.base_points) {
                auto series = subadditive_estimate(m, w, h, opt.schedule, opt.lattice,
                                                   base, opt.cache_dir, stats);
                if (series.estimate < best) {
                    best = series.estimate;
                    best_spread = series.spread;
                }
            }
            table.per_seed[d].push_back(best);
            spread_sched = std::max(spread_sched, best_spread);
        }
        // fixed-order arithmetic mean across seeds
        double sum = 0;
        for (double v : table.per_seed[d]) sum += v;
        double mean = sum / static_cast<double>(table.per_seed[d].size());
        double dev = 0;
        for (double v : table.per_seed[d]) dev = std::max(dev, std::abs(v - mean));
        table.raw[d] = mean;
        table.omega_spread[d] = dev;
        table.schedule_spread[d] = spread_sched;
        double scale = std::max(std::abs(mean), opt.unconverged_floor);
        table.unconverged[d] = spread_sched > opt.unconverged_fraction * scale;
    }

    table.convexified = convexify<N>(grid.points, table.raw);
    return table;
}

// Discrete Legendre-Fenchel conjugate of the convexified table. An argmax on
// the direction-grid boundary means the conjugate cannot be trusted there;
// that is a hard error asking for a wider grid.
template <int N>
inline void effective_hamiltonian(EffectiveTable<N>& table,
                                  const std::vector<Vec<N>>& momentum_grid) {
    if (table.convexified.empty()) throw Error("effective table not built");
    // hull of direction grid: a point is on the boundary if no strictly
    // larger grid point exists along its own coordinate(s)
    double hmax = 0;
    for (const auto& h : table.grid.points) hmax = std::max(hmax, norm_inf<N>(h));

    table.momentum_grid = momentum_grid;
    table.hbar.clear();
    for (const auto& P : momentum_grid) {
        double best = -kInf;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < table.grid.points.size(); ++i) {
            double v = dot<N>(P, table.grid.points[i]) - table.convexified[i];
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        if (norm_inf<N>(table.grid.points[arg]) >= hmax - 1e-12)
            throw Error("conjugate argmax on the direction-grid boundary at P = " +
                        format_double(norm2<N>(P)) +
                        "; widen the direction grid beyond " + format_double(hmax));
        table.hbar.push_back(best);
    }
}

// Double conjugate on the same grids (Fenchel-Moreau at grid resolution).
template <int N>
inline std::vector<double> double_conjugate(const EffectiveTable<N>& table) {
    std::vector<double> out;
    for (const auto& h : table.grid.points) {
        double best = -kInf;
        for (std::size_t j = 0; j < table.momentum_grid.size(); ++j)
            best = std::max(best, dot<N>(table.momentum_grid[j], h) - table.hbar[j]);
        out.push_back(best);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports built on top of the table.

template <int N>
struct TwoPointReport {
    std::vector<double> eps;
    std::vector<double> lhs;   // rescaled actions between Phi_eps anchors
    std::vector<double> rhs;   // t * Lbar((h - h') / t)
    std::vector<double> gap;
};

template <int N>
inline TwoPointReport<N> two_point_check(const Medium<N>& m, const EnvironmentSample& w,
                                         const Vec<N>& h, const Vec<N>& hp, double t,
                                         const std::vector<double>& eps_list,
                                         const EffectiveTable<N>& table) {
    static_assert(N == 1, "two-point check is wired for 1D media");
    TwoPointReport<N> rep;
    double rhs = t * table.interp((h[0] - hp[0]) / t);
    const int cpu = table.lattice.cells_per_unit();
    for (double eps : eps_list) {
        Idx<N> ga = phi_map<N>(eps, hp);
        Idx<N> gb = phi_map<N>(eps, h);
        Vec<N> xa{}, xb{};
        for (int a = 0; a < N; ++a) {
            xa[a] = static_cast<double>(ga[a]);
            xb[a] = static_cast<double>(gb[a]);
        }
        Lattice<N> lat = lattice_for_query(m, table.lattice, xa, xb, t / eps);
        (void)cpu;
        double lhs = rescaled_action(m, w, eps, xa, xb, t, lat);
        rep.eps.push_back(eps);
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.gap.push_back(std::abs(lhs - rhs));
    }
    return rep;
}

template <int N>
struct HomogeneityReport {
    double max_defect = 0;
    struct Entry {
        Vec<N> h;
        double lambda;
        double defect;
    };
    std::vector<Entry> entries;
};

// Relative defect of Lbar(lambda h) = |lambda|^alpha Lbar(h) over in-grid
// pairs, alpha = 2 for metric media.
template <int N>
inline HomogeneityReport<N> homogeneity_check(const EffectiveTable<N>& table,
                                              const std::vector<double>& lambdas) {
    if (table.homogeneity_degree == 0)
        throw Error("homogeneity check requires a homogeneous (metric) medium");
    double alpha = table.homogeneity_degree;
    HomogeneityReport<N> rep;
    for (const auto& h : table.grid.points) {
        if (norm2<N>(h) == 0) continue;
        for (double lam : lambdas) {
            Vec<N> lh = lam * h;
            if (!table.has(lh)) continue;
            double lhs = table.value(lh);
            double rhs = std::pow(std::abs(lam), alpha) * table.value(h);
            double defect = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
            rep.entries.push_back({h, lam, defect});
            rep.max_defect = std::max(rep.max_defect, defect);
        }
    }
    return rep;
}

}  // namespace hjh
