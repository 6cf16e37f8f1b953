// Runtime audits of the standing assumptions (H1)-(H5) on concrete media.
// Failures are report entries, never exceptions: the caller decides policy.
#pragma once

#include "hjh/media.hpp"

namespace hjh {

struct AssumptionEntry {
    std::string name;
    bool pass = false;
    double defect = 0;  // meaning depends on the entry, see note
    std::string note;
};

struct AuditReport {
    std::vector<AssumptionEntry> entries;
    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }
};

struct AuditOptions {
    int samples = 1000;
    double box_radius = 3.0;       // where x is drawn (dyadic lattice)
    double momentum_radius = 3.0;
    int max_shift = 5;             // |g|_inf bound for stationarity draws
    double stationarity_tol = 1e-10;
    double convexity_margin = 1e-9;  // required midpoint margin per |dp|^2/8
    std::uint64_t seed = 2024;
};

namespace detail {

// Dyadic draw: multiples of 2^-10 so that x+g is exact in double and lifted
// periodic media audit to literally zero defect.
template <int N>
inline Vec<N> draw_dyadic(Rng& rng, double radius) {
    Vec<N> x{};
    for (int i = 0; i < N; ++i) {
        double u = std::floor(rng.uniform01() * 2048.0) / 1024.0 - 1.0;
        x[i] = u * radius;
    }
    return x;
}

template <int N>
inline Vec<N> draw_ball(Rng& rng, double radius) {
    Vec<N> p{};
    for (int i = 0; i < N; ++i) p[i] = (2.0 * rng.uniform01() - 1.0) * radius;
    return p;
}

}  // namespace detail

template <int N>
inline AuditReport audit_assumptions(const Medium<N>& m, const AuditOptions& opt = {}) {
    AuditReport rep;
    Rng rng(opt.seed);

    // (H1) evaluator totality: every sampled call must return a finite value
    {
        bool ok = true;
        for (int s = 0; s < opt.samples; ++s) {
            auto w = sample_environment(m, rng.next_u64());
            auto x = detail::draw_dyadic<N>(rng, opt.box_radius);
            auto p = detail::draw_ball<N>(rng, opt.momentum_radius);
            if (!std::isfinite(m.H(x, p, w))) ok = false;
        }
        rep.entries.push_back({"H1-continuous-random", ok, 0.0,
                               "finite evaluations at all sampled points"});
    }

    // (H2) C^2 proxy: second differences in p stabilize between two scales
    {
        double worst = 0;
        for (int s = 0; s < opt.samples / 10 + 1; ++s) {
            auto w = sample_environment(m, rng.next_u64());
            auto x = detail::draw_dyadic<N>(rng, opt.box_radius);
            auto p = detail::draw_ball<N>(rng, opt.momentum_radius);
            Vec<N> e{};
            e[0] = 1.0;
            auto second = [&](double h) {
                Vec<N> pp = p + (h * e), pm = p - (h * e);
                return (m.H(x, pp, w) + m.H(x, pm, w) - 2.0 * m.H(x, p, w)) / (h * h);
            };
            double d1 = second(1e-3), d2 = second(2e-3);
            worst = std::max(worst, std::abs(d1 - d2));
        }
        rep.entries.push_back({"H2-regularity", worst < 1.0, worst,
                               "second-difference stability across scales"});
    }

    // (H3) strict convexity in p: midpoint margin normalized by |p1-p2|^2/8
    {
        double min_margin = kInf;
        for (int s = 0; s < opt.samples; ++s) {
            auto w = sample_environment(m, rng.next_u64());
            auto x = detail::draw_dyadic<N>(rng, opt.box_radius);
            auto p1 = detail::draw_ball<N>(rng, opt.momentum_radius);
            auto p2 = detail::draw_ball<N>(rng, opt.momentum_radius);
            double d2 = dot<N>(p1 - p2, p1 - p2);
            if (d2 < 1e-8) continue;
            Vec<N> mid = 0.5 * (p1 + p2);
            double gap = 0.5 * (m.H(x, p1, w) + m.H(x, p2, w)) - m.H(x, mid, w);
            min_margin = std::min(min_margin, gap / (d2 / 8.0));
        }
        rep.entries.push_back({"H3-strict-convexity", min_margin > opt.convexity_margin,
                               min_margin, "min midpoint margin per |p1-p2|^2/8"});
    }

    // (H4) coercivity sandwich against the stored envelopes
    {
        double worst = 0;
        bool ok = true;
        for (int s = 0; s < opt.samples; ++s) {
            auto w = sample_environment(m, rng.next_u64());
            auto x = detail::draw_dyadic<N>(rng, opt.box_radius);
            auto p = detail::draw_ball<N>(rng, opt.momentum_radius);
            double h = m.H(x, p, w);
            double r = norm2<N>(p);
            double lo = m.env.theta.eval(r), hi = m.env.Theta.eval(r);
            double viol = std::max(lo - h, h - hi);
            worst = std::max(worst, viol);
            if (viol > 1e-9) ok = false;
        }
        rep.entries.push_back({"H4-coercivity", ok, worst,
                               "max violation of theta <= H <= Theta"});
    }

    // (H5) stationarity: H(x+g,p,w) vs H(x,p,tau_g w)
    {
        double worst = 0;
        for (int s = 0; s < opt.samples; ++s) {
            auto w = sample_environment(m, rng.next_u64());
            auto x = detail::draw_dyadic<N>(rng, opt.box_radius);
            auto p = detail::draw_ball<N>(rng, opt.momentum_radius);
            GroupElement<N> g;
            for (int i = 0; i < N; ++i)
                g.h[i] = static_cast<int>(rng.next_u64() % (2 * opt.max_shift + 1)) -
                         opt.max_shift;
            double lhs = m.H(g.translate(x), p, w);
            double rhs = m.H(x, p, shift_env(m, g, w));
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        rep.entries.push_back({"H5-stationarity", worst <= opt.stationarity_tol, worst,
                               "max |H(x+g,p,w) - H(x,p,tau_g w)|"});
    }

    return rep;
}

}  // namespace hjh
