// Rescaled stochastic solves (value function by Lax-Oleinik marching),
// homogenized Hopf-Lax solves on the cone, the eps Phi_eps convergence
// metric between them, and the minimizer-radius machinery that truncates
// every inf search.
#pragma once

#include "hjh/effective.hpp"

namespace hjh {

// Concave nondecreasing modulus of continuity, piecewise linear, sigma(0)=0.
struct ConcaveModulus {
    // breakpoints (r_i, s_i), r_0 = 0, s_0 = 0; beyond the last point the
    // modulus continues with the final slope
    std::vector<double> r{0.0, 1.0};
    std::vector<double> s{0.0, 1.0};

    static ConcaveModulus lipschitz(double ell) {
        return ConcaveModulus{{0.0, 1.0}, {0.0, ell}};
    }

    static ConcaveModulus clamped_lipschitz(double ell, double cap) {
        // min(ell r, cap)
        return ConcaveModulus{{0.0, cap / ell, 2.0 * cap / ell},
                              {0.0, cap, cap}};
    }

    double eval(double x) const {
        if (x <= 0) return 0;
        for (std::size_t i = 1; i < r.size(); ++i)
            if (x <= r[i]) {
                double t = (x - r[i - 1]) / (r[i] - r[i - 1]);
                return s[i - 1] + t * (s[i] - s[i - 1]);
            }
        double slope = (s.back() - s[s.size() - 2]) / (r.back() - r[r.size() - 2]);
        return s.back() + slope * (x - r.back());
    }

    // smallest a with a x + delta >= sigma(x) for all x >= 0
    double linear_majorant_slope(double delta) const {
        double a = 0;
        for (std::size_t i = 1; i < r.size(); ++i)
            if (r[i] > 0) a = std::max(a, (s[i] - delta) / r[i]);
        double tail = (s.back() - s[s.size() - 2]) / (r.back() - r[r.size() - 2]);
        if (delta <= s.back() - tail * r.back() + 1e-300)
            a = std::max(a, tail);
        return std::max(a, 0.0);
    }

    void validate() const {
        if (r.size() != s.size() || r.size() < 2 || r[0] != 0 || s[0] != 0)
            throw ConfigError("modulus needs breakpoints starting at (0,0)");
        double prev_slope = kInf;
        for (std::size_t i = 1; i < r.size(); ++i) {
            if (r[i] <= r[i - 1]) throw ConfigError("modulus radii must increase");
            double sl = (s[i] - s[i - 1]) / (r[i] - r[i - 1]);
            if (sl < -1e-15 || sl > prev_slope + 1e-12)
                throw ConfigError("modulus must be concave nondecreasing");
            prev_slope = sl;
        }
    }
};

// rho(t) = inf_delta { (Theta_L(0) + B_delta) / sqrt(delta) * t + sqrt(delta) }
// with B_delta the conjugate of theta_L at slope A_delta + sqrt(delta).
inline double minimizer_radius(const ConcaveModulus& sigma,
                               const CoercivityEnvelope& env, double t) {
    if (t <= 0) return 0;
    const double theta_L0 = env.Theta_L.eval(0.0);
    double best = kInf;
    for (int i = 0; i <= 120; ++i) {
        double delta = std::pow(10.0, -6.0 + 9.0 * i / 120.0);
        double a = sigma.linear_majorant_slope(delta) + std::sqrt(delta);
        if (a > env.theta_L.max_slope() * 0.999) continue;
        double b = env.theta_L.conjugate_at(a);
        double cand = (theta_L0 + b) / std::sqrt(delta) * t + std::sqrt(delta);
        best = std::min(best, cand);
    }
    if (best == kInf)
        throw Error("minimizer_radius: no admissible delta; envelope too small");
    return best;
}

// ---------------------------------------------------------------------------

template <int N>
struct InitialDatum {
    std::string name;
    // family u_0^eps evaluated at unscaled points of M
    std::function<double(const Vec<N>&, const EnvironmentSample&, double)> u0;
    // limit on the cone
    std::function<double(const Vec<N>&)> v0;
    ConcaveModulus sigma;

    static InitialDatum zero() {
        InitialDatum d;
        d.name = "zero";
        d.u0 = [](const Vec<N>&, const EnvironmentSample&, double) { return 0.0; };
        d.v0 = [](const Vec<N>&) { return 0.0; };
        d.sigma = ConcaveModulus::lipschitz(1e-12);
        return d;
    }

    static InitialDatum constant(double c) {
        InitialDatum d;
        d.name = "constant(" + format_double(c) + ")";
        d.u0 = [c](const Vec<N>&, const EnvironmentSample&, double) { return c; };
        d.v0 = [c](const Vec<N>&) { return c; };
        d.sigma = ConcaveModulus::lipschitz(1e-12);
        return d;
    }

    // u_0^eps(x) = ell * |eps x|, v_0(h) = ell |h|
    static InitialDatum linear_abs(double ell) {
        InitialDatum d;
        d.name = "linear_abs(" + format_double(ell) + ")";
        d.u0 = [ell](const Vec<N>& x, const EnvironmentSample&, double eps) {
            return ell * eps * norm2<N>(x);
        };
        d.v0 = [ell](const Vec<N>& h) { return ell * norm2<N>(h); };
        d.sigma = ConcaveModulus::lipschitz(ell);
        return d;
    }

    // u_0^eps(x) = min(|eps x|, 1), v_0(h) = min(|h|, 1)
    static InitialDatum scaled_min_abs() {
        InitialDatum d;
        d.name = "scaled_min_abs";
        d.u0 = [](const Vec<N>& x, const EnvironmentSample&, double eps) {
            return std::min(eps * norm2<N>(x), 1.0);
        };
        d.v0 = [](const Vec<N>& h) { return std::min(norm2<N>(h), 1.0); };
        d.sigma = ConcaveModulus::clamped_lipschitz(1.0, 1.0);
        return d;
    }
};

// Equicontinuity audit: |u0(x) - u0(x')| <= sigma(eps |x - x'|) on sampled
// pairs, and the Phi_eps anchor matches the limit within sigma(eps b).
template <int N>
inline void audit_datum(const InitialDatum<N>& datum, const EnvironmentSample& w,
                        double eps, double radius = 40.0, double tol = 1e-9) {
    datum.sigma.validate();
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        Vec<N> x{}, y{};
        for (int a = 0; a < N; ++a) {
            x[a] = (2 * rng.uniform01() - 1) * radius;
            y[a] = (2 * rng.uniform01() - 1) * radius;
        }
        double gap = std::abs(datum.u0(x, w, eps) - datum.u0(y, w, eps));
        if (gap > datum.sigma.eval(eps * norm2<N>(x - y)) + tol)
            throw Error("datum '" + datum.name + "' violates its modulus at eps=" +
                        format_double(eps));
    }
    for (int i = -8; i <= 8; ++i) {
        Vec<N> h{};
        h[0] = 0.25 * i;
        Idx<N> g = phi_map<N>(eps, h);
        Vec<N> xg{};
        for (int a = 0; a < N; ++a) xg[a] = static_cast<double>(g[a]);
        double gap = std::abs(datum.u0(xg, w, eps) - datum.v0(h));
        if (gap > datum.sigma.eval(eps * N) + tol)
            throw Error("datum '" + datum.name +
                        "' fails its pointwise limit audit at eps=" +
                        format_double(eps));
    }
}

// ---------------------------------------------------------------------------

template <int N>
struct ValueField {
    enum class Kind { Rescaled, Homogenized } kind = Kind::Rescaled;
    double eps = 1.0;                  // rescaled only
    std::string omega;                 // rescaled only
    std::string datum;
    std::vector<double> times;
    std::vector<Field<N>> slices;      // rescaled: lattice slices
    Lattice<N> lattice;                // rescaled only

    // homogenized representation: values on an h-grid per time
    std::vector<Vec<N>> hs;
    std::vector<std::vector<double>> hvals;

    const Field<N>& slice_at(double t, double tol = 1e-9) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= tol) return slices[i];
        throw Error("no recorded slice at t = " + format_double(t));
    }

    // homogenized: piecewise-linear interpolation in h, exact in grid t
    double eval_homogenized(const Vec<N>& h, double t, double tol = 1e-9) const {
        static_assert(N == 1);
        std::size_t ti = times.size();
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= tol) ti = i;
        if (ti == times.size())
            throw Error("no homogenized slice at t = " + format_double(t));
        const auto& vals = hvals[ti];
        double x = h[0];
        if (x < hs.front()[0] - 1e-12 || x > hs.back()[0] + 1e-12)
            throw Error("homogenized evaluation outside the h-grid");
        for (std::size_t j = 1; j < hs.size(); ++j)
            if (x <= hs[j][0] + 1e-15) {
                double a = hs[j - 1][0], b = hs[j][0];
                double u = b > a ? (x - a) / (b - a) : 0.0;
                return vals[j - 1] + u * (vals[j] - vals[j - 1]);
            }
        return vals.back();
    }
};

template <int N>
struct SolveOptions {
    std::vector<double> record_times;  // must include 0 for the datum slice
    double safety = 1.5;
    EstimateGrid grid;                 // dx, dt of the unscaled lattice
    bool assert_minimizer_radius = (N == 1);
    double radius_slack = 1.05;
};

// Solve (H_eps J omega) by DP time-marching from the initial slice; the
// marching is the inf formula by the semigroup property. Slices are recorded
// at the requested times; each step shrinks the trusted region by one reach
// so recorded values never see the box boundary.
template <int N>
inline ValueField<N> solve_rescaled(const Medium<N>& m, const EnvironmentSample& w,
                                    double eps, const InitialDatum<N>& datum,
                                    double T, double needed_radius,
                                    const SolveOptions<N>& opt) {
    audit_datum(datum, w, eps);
    if (T <= 0) throw ConfigError("solve horizon must be positive");

    ValueField<N> out;
    out.kind = ValueField<N>::Kind::Rescaled;
    out.eps = eps;
    out.omega = env_digest(w);
    out.datum = datum.name;

    // unscaled march: u(., s dt) with step cost eps dt L; t = eps s dt
    Lattice<N> lat;
    lat.dx = opt.grid.dx;
    lat.dt = opt.grid.dt;
    double rho_T = minimizer_radius(datum.sigma, m.env, T);
    lat.speed_cap = cone_slope(m.env, rho_T / eps, T / eps, opt.safety);
    int total_steps = lat.steps_of(T / eps);
    lat.domain_radius =
        needed_radius + (lat.reach() * total_steps + 2) * lat.dx;
    out.lattice = lat;

    const Box<N> domain = lat.domain_box();
    Field<N> cur(domain);
    {
        Idx<N> i = domain.lo;
        while (true) {
            cur.at(i) = datum.u0(lat.point(i), w, eps);
            int a = N - 1;
            while (a >= 0 && ++i[a] > domain.hi[a]) i[a--] = domain.lo[a];
            if (a < 0) break;
        }
    }

    std::vector<double> want = opt.record_times;
    std::sort(want.begin(), want.end());
    for (double tw : want) {
        if (tw < 0 || tw > T + 1e-12)
            throw ConfigError("record time " + format_double(tw) +
                              " outside [0, T]");
        double steps_d = tw / (eps * lat.dt);
        if (std::abs(steps_d - std::lround(steps_d)) > 1e-9)
            throw ConfigError("record time " + format_double(tw) +
                              " is not a multiple of eps*dt = " +
                              format_double(eps * lat.dt));
    }
    auto record = [&](double t, const Field<N>& f) {
        out.times.push_back(t);
        out.slices.push_back(f);
    };
    if (!want.empty() && std::abs(want.front()) < 1e-12) record(0.0, cur);

    // argmin backpointers for the radius assertion
    std::vector<std::vector<std::int16_t>> back;
    const bool track = opt.assert_minimizer_radius && N == 1;

    const int r = lat.reach();
    for (int s = 1; s <= total_steps; ++s) {
        Box<N> shrunk = domain.grown(-r * s);
        if (shrunk.empty())
            throw LatticeError("solve domain exhausted; enlarge needed_radius");
        StepOptions<N> so;
        so.cost_scale = eps;
        std::vector<std::int16_t> arg;
        if (track) {
            arg.assign(shrunk.size(), 0);
            so.argmin = &arg;
        }
        cur = lax_oleinik_step(cur, m, w, lat, shrunk, so);
        if (track) back.push_back(std::move(arg));
        double t = eps * s * lat.dt;
        for (double tw : want)
            if (std::abs(tw - t) < 1e-9) record(tw, cur);
    }

    // hard assertion: every recorded argmin chain stays within rho(t)
    if (track) {
        for (std::size_t ri = 0; ri < out.times.size(); ++ri) {
            double t = out.times[ri];
            if (t < 1e-12) continue;
            int steps_here = static_cast<int>(std::lround(t / (eps * lat.dt)));
            double rho = minimizer_radius(datum.sigma, m.env, t) * opt.radius_slack +
                         2.0 * eps * lat.dx;
            const Box<N>& b = out.slices[ri].box();
            for (int i = b.lo[0]; i <= b.hi[0]; ++i) {
                if (out.slices[ri].at(Idx<1>{i}) == kInf) continue;
                int x = i;
                for (int s = steps_here; s >= 1; --s) {
                    Box<1> sb = domain.grown(-r * s);
                    x -= back[static_cast<std::size_t>(s - 1)]
                             [sb.flat(Idx<1>{x})];
                }
                double d_eps = eps * std::abs(i - x) * lat.dx;
                if (d_eps > rho)
                    throw Error("minimizer outside rho(t): d_eps = " +
                                format_double(d_eps) + " > rho = " +
                                format_double(rho) + " at t = " + format_double(t));
            }
        }
    }
    return out;
}

// Hopf-Lax solve of the homogenized problem on the cone, search truncated by
// the homogenized minimizer radius derived from v0's modulus and the table's
// envelopes.
template <int N>
inline ValueField<N> solve_homogenized(const EffectiveTable<N>& table,
                                       const std::function<double(const Vec<N>&)>& v0,
                                       const ConcaveModulus& sigma_v0,
                                       const std::vector<double>& times,
                                       const std::vector<Vec<N>>& h_grid,
                                       double search_step = 0.02) {
    static_assert(N == 1, "homogenized solves are wired for b = 1");
    sigma_v0.validate();
    ValueField<N> out;
    out.kind = ValueField<N>::Kind::Homogenized;
    out.datum = "v0";
    out.hs = h_grid;
    for (double t : times) {
        out.times.push_back(t);
        std::vector<double> vals;
        if (t <= 1e-12) {
            for (const auto& h : h_grid) vals.push_back(v0(h));
        } else {
            double rho = minimizer_radius(sigma_v0, table.env, t);
            int ks = static_cast<int>(std::ceil(rho / search_step)) + 1;
            for (const auto& h : h_grid) {
                double best = kInf;
                int best_k = 0;
                for (int k = -ks; k <= ks; ++k) {
                    Vec<N> hp = h;
                    hp[0] += k * search_step;
                    double cand = v0(hp) + t * table.interp((h[0] - hp[0]) / t);
                    if (cand < best) {
                        best = cand;
                        best_k = k;
                    }
                }
                if (std::abs(best_k) >= ks)
                    throw Error("homogenized argmin on the search boundary; "
                                "enlarge the search radius");
                vals.push_back(best);
            }
        }
        out.hvals.push_back(std::move(vals));
    }
    return out;
}

// ---------------------------------------------------------------------------

template <int N>
struct ConvergenceReport {
    double eps = 0;
    double sup_error = 0;
    Vec<N> base{};
    double h_min = 0, h_max = 0, h_step = 0;
    double t_min = 0, t_max = 0, t_step = 0;
    std::string omega;
    bool finite = true;
};

// sup over the K grid of |u_eps((Phi_eps(h))(x), t) - v(h, t)|; interpolation
// happens only in v.
template <int N>
inline ConvergenceReport<N> convergence_error(const ValueField<N>& u,
                                              const ValueField<N>& v,
                                              double h_min, double h_max, double h_step,
                                              double t_min, double t_max, double t_step,
                                              const Idx<N>& base, double eps) {
    static_assert(N == 1);
    ConvergenceReport<N> rep;
    rep.eps = eps;
    rep.h_min = h_min;
    rep.h_max = h_max;
    rep.h_step = h_step;
    rep.t_min = t_min;
    rep.t_max = t_max;
    rep.t_step = t_step;
    rep.omega = u.omega;
    for (int a = 0; a < N; ++a) rep.base[a] = base[a] * u.lattice.dx;

    const int cpu = static_cast<int>(std::lround(1.0 / u.lattice.dx));
    int nh = static_cast<int>(std::lround((h_max - h_min) / h_step));
    int nt = static_cast<int>(std::lround((t_max - t_min) / t_step));
    for (int it = 0; it <= nt; ++it) {
        double t = t_min + it * t_step;
        const Field<N>& slice = u.slice_at(t);
        for (int ih = 0; ih <= nh; ++ih) {
            Vec<N> h{};
            h[0] = h_min + ih * h_step;
            Idx<N> g = phi_map<N>(eps, h);
            Idx<N> node = base;
            node[0] += g[0] * cpu;
            if (!slice.box().contains(node))
                throw Error("u_eps lacks lattice coverage at h = " +
                            format_double(h[0]) + ", t = " + format_double(t));
            double ue = slice.at(node);
            double vv = v.eval_homogenized(h, t);
            double gap = std::abs(ue - vv);
            if (!std::isfinite(gap)) rep.finite = false;
            rep.sup_error = std::max(rep.sup_error, gap);
        }
    }
    return rep;
}

// Empirical d_eps-equicontinuity of value fields across eps on t >= t0.
template <int N>
struct RegularityReport {
    std::vector<double> eps;
    std::vector<double> lipschitz;  // scaled space-Lipschitz constant, t >= t0
    double budget = 0;
    bool pass = true;
};

template <int N>
inline RegularityReport<N> audit_value_regularity(
    const std::vector<ValueField<N>>& fields, double t0,
    const ConcaveModulus& sigma, const CoercivityEnvelope& env) {
    static_assert(N == 1);
    RegularityReport<N> rep;
    double rho1 = minimizer_radius(sigma, env, std::max(t0, 1.0));
    rep.budget = sigma.linear_majorant_slope(1e-6) +
                 (env.Theta_L.eval(rho1 / t0 + 1.0) - env.Theta_L.eval(rho1 / t0)) +
                 1.0;
    for (const auto& f : fields) {
        double lip = 0;
        for (std::size_t si = 0; si < f.times.size(); ++si) {
            if (f.times[si] < t0 - 1e-12) continue;
            const Field<N>& sl = f.slices[si];
            for (int i = sl.box().lo[0]; i < sl.box().hi[0]; ++i) {
                double a = sl.at(Idx<1>{i}), b = sl.at(Idx<1>{i + 1});
                if (a == kInf || b == kInf) continue;
                lip = std::max(lip, std::abs(b - a) / (f.eps * f.lattice.dx));
            }
        }
        rep.eps.push_back(f.eps);
        rep.lipschitz.push_back(lip);
        if (lip > rep.budget) rep.pass = false;
    }
    return rep;
}

}  // namespace hjh
