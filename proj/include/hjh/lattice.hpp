// Space-time lattice, index boxes and value fields for the DP engine.
#pragma once

#include "hjh/common.hpp"
#include "hjh/envelope.hpp"

namespace hjh {

template <int N>
struct Box {
    Idx<N> lo{}, hi{};  // inclusive

    bool contains(const Idx<N>& i) const {
        for (int a = 0; a < N; ++a)
            if (i[a] < lo[a] || i[a] > hi[a]) return false;
        return true;
    }

    std::size_t extent(int axis) const {
        return static_cast<std::size_t>(hi[axis] - lo[axis] + 1);
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < N; ++a) s *= extent(a);
        return s;
    }

    std::size_t flat(const Idx<N>& i) const {
        std::size_t f = 0;
        for (int a = 0; a < N; ++a)
            f = f * extent(a) + static_cast<std::size_t>(i[a] - lo[a]);
        return f;
    }

    Box clipped(const Box& other) const {
        Box r = *this;
        for (int a = 0; a < N; ++a) {
            r.lo[a] = std::max(r.lo[a], other.lo[a]);
            r.hi[a] = std::min(r.hi[a], other.hi[a]);
        }
        return r;
    }

    Box grown(int by) const {
        Box r = *this;
        for (int a = 0; a < N; ++a) {
            r.lo[a] -= by;
            r.hi[a] += by;
        }
        return r;
    }

    bool empty() const {
        for (int a = 0; a < N; ++a)
            if (hi[a] < lo[a]) return true;
        return false;
    }
};

template <int N>
class Field {
  public:
    Field() = default;
    explicit Field(const Box<N>& box, double fill = kInf)
        : box_(box), v_(box.size(), fill) {}

    const Box<N>& box() const { return box_; }

    double& at(const Idx<N>& i) { return v_[box_.flat(i)]; }
    double at(const Idx<N>& i) const { return v_[box_.flat(i)]; }

    double get_or_inf(const Idx<N>& i) const {
        return box_.contains(i) ? v_[box_.flat(i)] : kInf;
    }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::size_t size() const { return v_.size(); }

  private:
    Box<N> box_;
    std::vector<double> v_;
};

// Lattice geometry. dx and dt are in unit-cell units; speed_cap is the cone
// slope A; domain_radius is the half-width of the spatial box, which must
// dominate A * horizon so cones never touch the boundary.
template <int N>
struct Lattice {
    double dx = 0.05;
    double dt = 0.1;
    double speed_cap = 2.0;
    double domain_radius = 10.0;

    int reach() const {
        int r = static_cast<int>(std::ceil(speed_cap * dt / dx - 1e-12));
        if (r < 1)
            throw LatticeError("stencil radius ceil(A dt/dx) must be >= 1 (A=" +
                               format_double(speed_cap) + ", dt=" +
                               format_double(dt) + ", dx=" + format_double(dx) + ")");
        return r;
    }

    int domain_cells() const {
        return static_cast<int>(std::round(domain_radius / dx));
    }

    Box<N> domain_box() const {
        Box<N> b;
        for (int a = 0; a < N; ++a) {
            b.lo[a] = -domain_cells();
            b.hi[a] = domain_cells();
        }
        return b;
    }

    Vec<N> point(const Idx<N>& i) const {
        Vec<N> x{};
        for (int a = 0; a < N; ++a) x[a] = i[a] * dx;
        return x;
    }

    // nearest lattice index; rejects points off the lattice
    Idx<N> index_of(const Vec<N>& x, double tol = 1e-9) const {
        Idx<N> i{};
        for (int a = 0; a < N; ++a) {
            double c = x[a] / dx;
            i[a] = static_cast<int>(std::lround(c));
            if (std::abs(c - i[a]) > tol)
                throw LatticeError("point component " + format_double(x[a]) +
                                   " is not on the spatial lattice (dx=" +
                                   format_double(dx) + ")");
        }
        return i;
    }

    int steps_of(double t, double tol = 1e-9) const {
        double s = t / dt;
        int k = static_cast<int>(std::lround(s));
        if (k < 0 || std::abs(s - k) > tol)
            throw LatticeError("time " + format_double(t) +
                               " is not a multiple of dt=" + format_double(dt));
        return k;
    }
};

// Cone slope rule: the minimizer between x' and x in time t has action at
// most t Theta_L(d/t), and theta_L bounds its speed from below, so the
// smallest sufficient slope solves theta_L(A) = Theta_L(d/t). A safety
// factor absorbs lattice wiggle.
inline double cone_slope(const CoercivityEnvelope& env, double dist, double t,
                         double safety = 1.5) {
    double ratio = t > 0 ? dist / t : 0.0;
    double target = env.Theta_L.eval(ratio);
    double s = env.theta_L.inverse_at(target);
    s = std::max(s, ratio * 1.05);
    return safety * std::max(s, 0.5);
}

}  // namespace hjh
