// Piecewise-linear convex radial envelopes and their Legendre conjugates.
// These carry the coercivity data that sizes propagation cones, minimizer
// radii and the action sandwich bounds.
#pragma once

#include <algorithm>
#include <functional>

#include "hjh/common.hpp"

namespace hjh {

// Convex nondecreasing function of a radius r >= 0, stored as samples on an
// increasing grid and interpolated linearly. Beyond the last sample it
// extends with the final slope, so conjugates are exact only for slopes the
// sampled range covers; callers must stay inside max_slope().
class PiecewiseConvex {
  public:
    PiecewiseConvex() = default;

    PiecewiseConvex(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        validate();
    }

    static PiecewiseConvex sample(const std::function<double(double)>& f,
                                  double radius, int points) {
        std::vector<double> xs(static_cast<std::size_t>(points));
        std::vector<double> ys(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) {
            double x = radius * static_cast<double>(i) / (points - 1);
            xs[static_cast<std::size_t>(i)] = x;
            ys[static_cast<std::size_t>(i)] = f(x);
        }
        return PiecewiseConvex(std::move(xs), std::move(ys));
    }

    double operator()(double r) const { return eval(r); }

    double eval(double r) const {
        if (r <= xs_.front()) return ys_.front();
        if (r >= xs_.back())
            return ys_.back() + max_slope() * (r - xs_.back());
        auto it = std::upper_bound(xs_.begin(), xs_.end(), r);
        std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        double t = (r - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
        return ys_[i - 1] + t * (ys_[i] - ys_[i - 1]);
    }

    double min_value() const { return ys_.front(); }
    double radius() const { return xs_.back(); }

    double max_slope() const {
        std::size_t n = xs_.size();
        return (ys_[n - 1] - ys_[n - 2]) / (xs_[n - 1] - xs_[n - 2]);
    }

    // Legendre conjugate at slope s: sup_r (s*r - f(r)). Exact for the
    // piecewise-linear interpolant since the sup sits on a breakpoint.
    double conjugate_at(double s) const {
        if (s > max_slope() + 1e-9)
            throw Error("envelope: conjugate slope " + format_double(s) +
                        " beyond sampled range (max " +
                        format_double(max_slope()) + ")");
        double best = -kInf;
        for (std::size_t i = 0; i < xs_.size(); ++i)
            best = std::max(best, s * xs_[i] - ys_[i]);
        return best;
    }

    PiecewiseConvex conjugate(double slope_radius, int points) const {
        std::vector<double> xs(static_cast<std::size_t>(points));
        std::vector<double> ys(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) {
            double s = slope_radius * static_cast<double>(i) / (points - 1);
            xs[static_cast<std::size_t>(i)] = s;
            ys[static_cast<std::size_t>(i)] = conjugate_at(s);
        }
        return PiecewiseConvex(std::move(xs), std::move(ys));
    }

    // Smallest r with f(r) >= y; requires y reachable within the sampled
    // radius. Used to invert the lower envelope when sizing cones.
    double inverse_at(double y) const {
        if (y <= ys_.front()) return xs_.front();
        if (y > eval(xs_.back()))
            throw Error("envelope: inverse target beyond sampled radius");
        double lo = xs_.front(), hi = xs_.back();
        for (int it = 0; it < 200 && hi - lo > 1e-12 * (1 + hi); ++it) {
            double mid = 0.5 * (lo + hi);
            if (eval(mid) >= y)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    bool nondecreasing() const {
        for (std::size_t i = 1; i < ys_.size(); ++i)
            if (ys_[i] < ys_[i - 1] - 1e-12) return false;
        return true;
    }

  private:
    void validate() const {
        if (xs_.size() < 2 || xs_.size() != ys_.size())
            throw Error("envelope: need at least two samples");
        for (std::size_t i = 1; i < xs_.size(); ++i)
            if (xs_[i] <= xs_[i - 1])
                throw Error("envelope: radius grid must increase");
        // convexity of the samples (slopes nondecreasing)
        double prev = -kInf;
        for (std::size_t i = 1; i < xs_.size(); ++i) {
            double slope = (ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]);
            if (slope < prev - 1e-9)
                throw Error("envelope: samples are not convex");
            prev = std::max(prev, slope);
        }
    }

    std::vector<double> xs_;
    std::vector<double> ys_;
};

// The four envelopes attached to a medium: theta/Theta sandwich H in the
// momentum, theta_L/Theta_L sandwich L (and the minimal action) in the
// velocity. theta_L is the conjugate of Theta and Theta_L of theta.
struct CoercivityEnvelope {
    PiecewiseConvex theta;     // lower bound on H(|p|)
    PiecewiseConvex Theta;     // upper bound on H(|p|)
    PiecewiseConvex theta_L;   // lower bound on L(|q|)
    PiecewiseConvex Theta_L;   // upper bound on L(|q|)

    static CoercivityEnvelope from_hamiltonian_bounds(
        const std::function<double(double)>& lo,
        const std::function<double(double)>& hi, double radius = 64.0,
        int points = 1025) {
        CoercivityEnvelope e;
        // Piecewise-linear interpolation of a convex function lies above it,
        // which is safe for the upper envelope but not for the lower one.
        // Shift the lower samples down by twice the worst midpoint excess;
        // for convex functions that dominates the chord error everywhere.
        double excess = 0;
        for (int i = 0; i + 1 < points; ++i) {
            double a = radius * static_cast<double>(i) / (points - 1);
            double b = radius * static_cast<double>(i + 1) / (points - 1);
            excess = std::max(excess,
                              0.5 * (lo(a) + lo(b)) - lo(0.5 * (a + b)));
        }
        double slack = 2.0 * excess;
        e.theta = PiecewiseConvex::sample(
            [&](double r) { return lo(r) - slack; }, radius, points);
        e.Theta = PiecewiseConvex::sample(hi, radius, points);
        double sl = 0.999 * std::min(e.theta.max_slope(), e.Theta.max_slope());
        e.theta_L = e.Theta.conjugate(sl, points);
        e.Theta_L = e.theta.conjugate(sl, points);
        return e;
    }
};

}  // namespace hjh
