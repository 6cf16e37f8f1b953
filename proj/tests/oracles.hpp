// Independent oracles used by the tests and the acceptance suite. These
// never touch the lattice pipeline: the cell-problem oracle integrates the
// Hamiltonian flow-time integral by quadrature and inverts it by bisection.
#pragma once

#include <cmath>
#include <stdexcept>

namespace oracles {

// integral_0^1 sqrt(2 (lam - a cos 2 pi s)) ds for lam >= a
inline double cosine_period_integral(double lam, double a) {
    const int panels = 1 << 15;
    double sum = 0;
    for (int i = 0; i < panels; ++i) {
        double s0 = static_cast<double>(i) / panels;
        double s1 = static_cast<double>(i + 1) / panels;
        double sm = 0.5 * (s0 + s1);
        auto f = [&](double s) {
            double v = 2.0 * (lam - a * std::cos(2.0 * M_PI * s));
            return std::sqrt(std::max(v, 0.0));
        };
        sum += (f(s0) + 4.0 * f(sm) + f(s1)) / 6.0 * (s1 - s0);
    }
    return sum;
}

// Effective Hamiltonian of H = p^2/2 + a cos(2 pi x): flat at max V = a for
// |P| <= c0 = integral at lam = a, else the root of the period integral.
inline double cosine_hbar(double P, double a = 1.0) {
    P = std::abs(P);
    double c0 = cosine_period_integral(a, a);
    if (P <= c0) return a;
    double lo = a, hi = a + 0.5 * P * P + 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (cosine_period_integral(mid, a) < P)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Hopf-Lax closed form for v0 = |h|, Lbar = h^2/2 (Huber function).
inline double huber_hopf_lax(double h, double t) {
    double ah = std::abs(h);
    if (ah >= t) return ah - 0.5 * t;
    return ah * ah / (2.0 * t);
}

}  // namespace oracles
