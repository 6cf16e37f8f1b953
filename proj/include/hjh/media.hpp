// Stationary ergodic Hamiltonian/Lagrangian families on R^n with Z^n acting
// by unit translations. Shipped media: periodic potentials (the environment
// space is a singleton), the quasi-periodic torus foliation, and Riemannian
// metric families (built in stablenorm.hpp). Stationarity is exact by
// construction: media are stored in quotient form and lifted.
#pragma once

#include <algorithm>
#include <functional>

#include "hjh/common.hpp"
#include "hjh/envelope.hpp"

namespace hjh {

template <int N>
struct GroupElement {
    Idx<N> h{};  // Z^b component; the torsion factor is trivial here

    static GroupElement zero() { return GroupElement{}; }

    GroupElement operator+(const GroupElement& o) const {
        GroupElement r;
        r.h = h + o.h;
        return r;
    }

    Vec<N> translate(const Vec<N>& x) const {
        Vec<N> r = x;
        for (int i = 0; i < N; ++i) r[i] += static_cast<double>(h[i]);
        return r;
    }
};

struct EnvironmentSample {
    std::string medium_id;
    std::uint64_t seed = 0;
    std::vector<double> params;  // quasi-periodic: single phase in [0,1)
};

enum class MediumKind { Periodic, QuasiPeriodic, Metric };

inline const char* to_string(MediumKind k) {
    switch (k) {
        case MediumKind::Periodic: return "periodic";
        case MediumKind::QuasiPeriodic: return "quasi-periodic";
        case MediumKind::Metric: return "metric";
    }
    return "?";
}

// Kernel structure the DP engine exploits. Additive: L(x,q,w) = sum_i
// ke[i] q_i^2 - V(x,w). ConformalAxis0: L(x,q,w) = c(x_1,w) |q|^2 with the
// factor depending on the first coordinate only. Generic media fall back to
// calling L directly.
template <int N>
struct KernelInfo {
    enum class Form { Generic, Additive, ConformalAxis0 } form = Form::Generic;
    std::function<double(const Vec<N>&, const EnvironmentSample&)> field;
    Vec<N> ke_diag{};
};

template <int N>
struct Medium {
    MediumKind kind = MediumKind::Periodic;
    std::string id;       // content hash of the defining spec
    std::string describe; // human-readable one-liner

    std::function<double(const Vec<N>&, const Vec<N>&, const EnvironmentSample&)> H;
    // closed-form Lagrangian when available; eval_L falls back to the
    // numeric conjugate otherwise
    std::function<double(const Vec<N>&, const Vec<N>&, const EnvironmentSample&)> L_closed;

    std::vector<double> alpha;  // frequency vector, quasi-periodic only
    CoercivityEnvelope env;
    KernelInfo<N> kernel;
    int homogeneity_degree = 0;  // 2 for metric media, 0 otherwise

    // P-sampling: deterministic function of (medium, seed)
    std::function<std::vector<double>(std::uint64_t)> sampler;
};

template <int N>
inline EnvironmentSample sample_environment(const Medium<N>& m, std::uint64_t seed) {
    EnvironmentSample s;
    s.medium_id = m.id;
    s.seed = seed;
    s.params = m.sampler ? m.sampler(seed) : std::vector<double>{};
    return s;
}

// tau_g: periodic media have a singleton environment; quasi-periodic media
// shift the phase by alpha.g mod 1.
template <int N>
inline EnvironmentSample shift_env(const Medium<N>& m, const GroupElement<N>& g,
                                   const EnvironmentSample& omega) {
    if (omega.medium_id != m.id)
        throw MediumError("shift_env: sample belongs to medium " + omega.medium_id +
                          ", not " + m.id);
    EnvironmentSample out = omega;
    if (m.kind == MediumKind::QuasiPeriodic) {
        double inc = 0;
        for (int i = 0; i < N; ++i) inc += m.alpha[static_cast<std::size_t>(i)] * g.h[i];
        out.params[0] = frac_mod1(out.params[0] + inc);
    }
    return out;
}

template <int N>
inline double eval_H(const Medium<N>& m, const Vec<N>& x, const Vec<N>& p,
                     const EnvironmentSample& w) {
    return m.H(x, p, w);
}

// Convex conjugate sup_p (p.q - H) on a uniform momentum grid. The grid
// radius comes from the coercivity envelope so the sup is interior; an
// argmax on the boundary is an error asking for a larger radius.
template <int N>
inline double eval_L_numeric(const Medium<N>& m, const Vec<N>& x, const Vec<N>& q,
                             const EnvironmentSample& w, double grid_step = 1e-2,
                             double radius = 0.0) {
    if (radius <= 0.0) {
        // |p*| at the sup satisfies theta'(|p*|) <= |q|; invert loosely
        double qn = norm2<N>(q);
        radius = 2.0 * (qn + 1.0);
        // ensure theta(radius) - theta(0) >= qn * radius, i.e. slope cover
        while (m.env.theta.eval(radius) - m.env.theta.min_value() < qn * radius &&
               radius < m.env.theta.radius())
            radius *= 1.5;
    }
    int half = static_cast<int>(std::ceil(radius / grid_step));
    double best = -kInf;
    bool boundary = false;
    Idx<N> it{};
    for (int i = 0; i < N; ++i) it[i] = -half;
    while (true) {
        Vec<N> p{};
        bool on_edge = false;
        for (int i = 0; i < N; ++i) {
            p[i] = it[i] * grid_step;
            if (it[i] == -half || it[i] == half) on_edge = true;
        }
        double v = dot<N>(p, q) - m.H(x, p, w);
        if (v > best) {
            best = v;
            boundary = on_edge;
        }
        int axis = 0;
        while (axis < N && ++it[axis] > half) it[axis++] = -half;
        if (axis == N) break;
    }
    if (boundary)
        throw MediumError("eval_L: conjugate argmax on momentum-grid boundary; "
                          "enlarge the radius (" + format_double(radius) + ")");
    return best;
}

template <int N>
inline double eval_L(const Medium<N>& m, const Vec<N>& x, const Vec<N>& q,
                     const EnvironmentSample& w) {
    if (m.L_closed) return m.L_closed(x, q, w);
    return eval_L_numeric(m, x, q, w);
}

// ---------------------------------------------------------------------------
// Periodic media: H(x,p) = K(p) + V(x) with V smooth and 1-periodic.

enum class KineticKind { Quadratic, Abs };

template <int N>
struct PotentialSpec {
    // "zero", "cosine" (1D: a*cos 2 pi x), "cosine2d" (a1 cos 2 pi x1 + a2
    // cos 2 pi x2), "table" (1D periodic table on [0,1], endpoints repeated)
    std::string name = "zero";
    std::vector<double> params;
};

template <int N>
struct PeriodicSpec {
    PotentialSpec<N> potential;
    KineticKind kinetic = KineticKind::Quadratic;
};

namespace detail {

template <int N>
struct PotentialFn {
    std::function<double(const Vec<N>&)> f;
    double vmin = 0, vmax = 0;
    std::string tag;
};

template <int N>
inline PotentialFn<N> make_potential(const PotentialSpec<N>& spec) {
    PotentialFn<N> out;
    if (spec.name == "zero") {
        out.f = [](const Vec<N>&) { return 0.0; };
        out.vmin = out.vmax = 0.0;
        out.tag = "zero";
    } else if (spec.name == "cosine") {
        double a = spec.params.empty() ? 1.0 : spec.params[0];
        out.f = [a](const Vec<N>& x) {
            return a * std::cos(2.0 * M_PI * frac_mod1(x[0]));
        };
        out.vmin = -std::abs(a);
        out.vmax = std::abs(a);
        out.tag = "cosine(" + format_double(a) + ")";
    } else if (spec.name == "cosine2d") {
        if (N != 2) throw MediumError("potential cosine2d needs dimension 2");
        double a1 = spec.params.size() > 0 ? spec.params[0] : 1.0;
        double a2 = spec.params.size() > 1 ? spec.params[1] : 1.0;
        out.f = [a1, a2](const Vec<N>& x) {
            return a1 * std::cos(2.0 * M_PI * frac_mod1(x[0])) +
                   a2 * std::cos(2.0 * M_PI * frac_mod1(x[1]));
        };
        out.vmin = -(std::abs(a1) + std::abs(a2));
        out.vmax = std::abs(a1) + std::abs(a2);
        out.tag = "cosine2d(" + format_double(a1) + "," + format_double(a2) + ")";
    } else if (spec.name == "table") {
        if (N != 1) throw MediumError("potential table is 1-dimensional");
        const auto& v = spec.params;
        if (v.size() < 3) throw MediumError("potential table needs >= 3 samples");
        if (v.front() != v.back())
            throw MediumError("potential table is not 1-periodic: value at 0 is " +
                              format_double(v.front()) + ", at 1 is " +
                              format_double(v.back()));
        std::size_t m = v.size() - 1;
        out.f = [v, m](const Vec<N>& x) {
            double s = frac_mod1(x[0]) * static_cast<double>(m);
            std::size_t i = std::min(static_cast<std::size_t>(s), m - 1);
            double t = s - static_cast<double>(i);
            return v[i] + t * (v[i + 1] - v[i]);
        };
        out.vmin = *std::min_element(v.begin(), v.end());
        out.vmax = *std::max_element(v.begin(), v.end());
        out.tag = "table[" + std::to_string(m) + "]";
    } else {
        throw MediumError("unknown potential preset '" + spec.name + "'");
    }
    return out;
}

}  // namespace detail

template <int N>
inline Medium<N> make_periodic_medium(const PeriodicSpec<N>& spec) {
    static_assert(N == 1 || N == 2, "periodic media support n in {1,2}");
    if (spec.kinetic != KineticKind::Quadratic)
        throw MediumError("kinetic term is not superlinearly coercive; "
                          "only |p|^2/2 is accepted");
    auto pot = detail::make_potential<N>(spec.potential);

    Medium<N> m;
    m.kind = MediumKind::Periodic;
    m.describe = "periodic H=|p|^2/2+" + pot.tag;
    m.id = hex64(fnv1a64("periodic|" + std::to_string(N) + "|" + pot.tag));
    auto V = pot.f;
    m.H = [V](const Vec<N>& x, const Vec<N>& p, const EnvironmentSample&) {
        return 0.5 * dot<N>(p, p) + V(x);
    };
    m.L_closed = [V](const Vec<N>& x, const Vec<N>& q, const EnvironmentSample&) {
        return 0.5 * dot<N>(q, q) - V(x);
    };
    double vmin = pot.vmin, vmax = pot.vmax;
    m.env = CoercivityEnvelope::from_hamiltonian_bounds(
        [vmin](double r) { return 0.5 * r * r + vmin; },
        [vmax](double r) { return 0.5 * r * r + vmax; });
    m.kernel.form = KernelInfo<N>::Form::Additive;
    m.kernel.field = [V](const Vec<N>& x, const EnvironmentSample&) { return V(x); };
    for (int i = 0; i < N; ++i) m.kernel.ke_diag[i] = 0.5;
    m.sampler = [](std::uint64_t) { return std::vector<double>{}; };
    return m;
}

// ---------------------------------------------------------------------------
// Quasi-periodic medium (foliation of a torus by irrational planes):
//   H_alpha(x,p,w) = B(x, w + alpha.x, p, p.alpha),
// with B 1-periodic in its angle arguments and tau_h(w) = w + alpha.h mod 1.

template <int N>
struct QuasiPeriodicSpec {
    // base preset "cosine_product": B = (|p|^2 + q^2)/2 + a cos(2 pi x_1) *
    // ... * cos(2 pi x_n) * cos(2 pi theta)
    std::string base = "cosine_product";
    double amplitude = 1.0;
    std::vector<double> alpha;
    long long resonance_height = 1000000;
};

// Non-resonance audit for (alpha, 1): searches integer vectors nu with
// |nu|_inf up to the height for alpha . nu1 + nu2 = 0. In 1D this is exact
// via continued fractions; rejection names the offending vector.
inline void audit_nonresonant(const std::vector<double>& alpha, long long height,
                              double tol = 1e-9) {
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        double a = alpha[i];
        // continued-fraction convergents p/q of a with q <= height
        double x = a;
        long long p0 = 1, q0 = 0, p1 = static_cast<long long>(std::floor(x)), q1 = 1;
        x -= std::floor(x);
        for (int it = 0; it < 64 && q1 <= height; ++it) {
            if (std::abs(a - static_cast<double>(p1) / static_cast<double>(q1)) < tol / static_cast<double>(q1)) {
                throw ResonanceError(
                    "alpha component " + std::to_string(i) + " = " + format_double(a) +
                    " is resonant: (alpha,1).(" + std::to_string(q1) + "," +
                    std::to_string(-p1) + ") = 0 within tolerance");
            }
            if (x < 1e-18) break;
            x = 1.0 / x;
            long long c = static_cast<long long>(std::floor(x));
            x -= std::floor(x);
            long long p2 = c * p1 + p0, q2 = c * q1 + q0;
            p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        }
    }
}

template <int N>
inline Medium<N> make_quasiperiodic_medium(const QuasiPeriodicSpec<N>& spec) {
    if (spec.base != "cosine_product")
        throw MediumError("unknown quasi-periodic base '" + spec.base + "'");
    if (static_cast<int>(spec.alpha.size()) != N)
        throw MediumError("alpha must have dimension " + std::to_string(N));
    audit_nonresonant(spec.alpha, spec.resonance_height);

    Medium<N> m;
    m.kind = MediumKind::QuasiPeriodic;
    std::string atag;
    for (double a : spec.alpha) atag += format_double(a) + ",";
    m.describe = "quasi-periodic cosine_product a=" + format_double(spec.amplitude) +
                 " alpha=[" + atag + "]";
    m.id = hex64(fnv1a64("quasiperiodic|" + std::to_string(N) + "|" + atag + "|" +
                         format_double(spec.amplitude)));
    m.alpha = spec.alpha;
    std::vector<double> alpha = spec.alpha;
    double amp = spec.amplitude;
    double a2 = 0;
    for (double a : alpha) a2 += a * a;

    auto Vqp = [alpha, amp](const Vec<N>& x, double w) {
        double c = amp;
        double phase = w;
        for (int i = 0; i < N; ++i) {
            c *= std::cos(2.0 * M_PI * frac_mod1(x[i]));
            phase += alpha[static_cast<std::size_t>(i)] * x[i];
        }
        return c * std::cos(2.0 * M_PI * frac_mod1(phase));
    };
    m.H = [Vqp, alpha](const Vec<N>& x, const Vec<N>& p, const EnvironmentSample& w) {
        double pa = 0;
        for (int i = 0; i < N; ++i) pa += p[i] * alpha[static_cast<std::size_t>(i)];
        return 0.5 * (dot<N>(p, p) + pa * pa) + Vqp(x, w.params[0]);
    };
    // conjugate of q -> q' M^-1 q / 2 with M = I + alpha alpha^T
    m.L_closed = [Vqp, alpha, a2](const Vec<N>& x, const Vec<N>& q,
                                  const EnvironmentSample& w) {
        double qa = 0;
        for (int i = 0; i < N; ++i) qa += q[i] * alpha[static_cast<std::size_t>(i)];
        return 0.5 * (dot<N>(q, q) - qa * qa / (1.0 + a2)) - Vqp(x, w.params[0]);
    };
    double aa = std::abs(amp);
    m.env = CoercivityEnvelope::from_hamiltonian_bounds(
        [aa](double r) { return 0.5 * r * r - aa; },
        [aa, a2](double r) { return 0.5 * (1.0 + a2) * r * r + aa; });
    m.kernel.form = KernelInfo<N>::Form::Generic;
    if (N == 1) {
        // 1D: L = q^2/(2(1+a^2)) - V, additive form
        m.kernel.form = KernelInfo<N>::Form::Additive;
        m.kernel.field = [Vqp](const Vec<N>& x, const EnvironmentSample& w) {
            return Vqp(x, w.params[0]);
        };
        m.kernel.ke_diag[0] = 0.5 / (1.0 + a2);
    }
    m.sampler = [](std::uint64_t seed) {
        Rng rng(seed);
        return std::vector<double>{rng.uniform01()};
    };
    return m;
}

}  // namespace hjh
