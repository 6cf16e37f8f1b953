// Discrete minimal-action engine: one Lax-Oleinik step as a min-plus stencil
// update, dynamic programming inside propagation cones, rescaled actions via
// the exact scaling identity, and the cone-Lipschitz audit.
//
// A step computes out(x) = min_y { in(y) + scale * dt * Lbar_leg(y, x) }
// over per-axis offsets |k| <= reach, where Lbar_leg averages the running
// cost along the straight leg from y to x at the midpoint of every crossed
// cell. Anchoring the cost at y (or at a single midpoint) is low-order in
// the leg length and the min exploits the quadrature blindness: legs
// comparable to the potential's period can jump across expensive regions.
// Per-cell midpoints sit on the half-grid, so leg averages are prefix sums
// over the odd half-grid entries and cost O(1) per offset. Ties resolve
// toward the lexicographically smallest y. Additive and conformal kernels
// run as separated per-axis min-plus passes; the pass over axis 0 runs last
// and offsets iterate with ascending source index, which together preserve
// the lexicographic tie-break.
#pragma once

#include "hjh/lattice.hpp"
#include "hjh/media.hpp"

namespace hjh {

template <int N>
struct StepOptions {
    double cost_scale = 1.0;
    // chosen offset per out-node (N == 1 and generic paths only)
    std::vector<std::int16_t>* argmin = nullptr;
};

namespace detail {

// Min-plus pass along the contiguous (last) axis.
// out(.., c) = min_k src(.., c - k) + addend(c, k); addend is produced per
// row so row-constant factors are computed once. Offsets iterate k = +r..-r
// so source indices ascend and strict < keeps the smallest one on ties.
template <int N, class MakeRow>
inline void minplus_contig(const Field<N>& src, Field<N>& out, int r,
                           const MakeRow& make_row,
                           std::vector<std::int16_t>* argmin = nullptr) {
    const Box<N>& ob = out.box();
    const Box<N>& sb = src.box();
    const int ax = N - 1;
    const std::size_t olen = ob.extent(ax), slen = sb.extent(ax);
    const std::size_t rows = ob.size() / olen;

    Idx<N> lead = ob.lo;
    for (std::size_t row = 0; row < rows; ++row) {
        bool in_src = true;
        if constexpr (N > 1) {
            for (int a = 0; a < ax; ++a)
                if (lead[a] < sb.lo[a] || lead[a] > sb.hi[a]) in_src = false;
        }
        double* orow = out.data() + row * olen;
        for (std::size_t j = 0; j < olen; ++j) orow[j] = kInf;
        if (in_src) {
            auto addend = make_row(lead);
            Idx<N> si = lead;
            si[ax] = sb.lo[ax];
            const double* srow = src.data() + sb.flat(si);
            for (int k = r; k >= -r; --k) {
                long shift = static_cast<long>(ob.lo[ax]) - k -
                             static_cast<long>(sb.lo[ax]);
                std::size_t j0 = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
                long jmax = static_cast<long>(slen) - 1 - shift;
                if (jmax < 0) continue;
                std::size_t j1 = std::min(olen - 1, static_cast<std::size_t>(jmax));
                if (j0 > j1) continue;
                const double* s = srow + (static_cast<long>(j0) + shift);
                double* o = orow + j0;
                const int cbase = ob.lo[ax] + static_cast<int>(j0);
                const std::size_t cnt = j1 - j0 + 1;
                if (argmin) {
                    for (std::size_t j = 0; j < cnt; ++j) {
                        double cand = s[j] + addend(cbase + static_cast<int>(j), k);
                        if (cand < o[j]) {
                            o[j] = cand;
                            (*argmin)[row * olen + j0 + j] =
                                static_cast<std::int16_t>(k);
                        }
                    }
                } else {
                    for (std::size_t j = 0; j < cnt; ++j) {
                        double cand = s[j] + addend(cbase + static_cast<int>(j), k);
                        if (cand < o[j]) o[j] = cand;
                    }
                }
            }
        }
        if constexpr (N > 1) {
            int a = ax - 1;
            while (a >= 0 && ++lead[a] > ob.hi[a]) lead[a--] = ob.lo[a];
        }
    }
}

// Min-plus pass along axis 0 for N == 2, row-wise over the contiguous axis.
// The addend is constant along a row: addend(y0, k).
template <class Addend>
inline void minplus_axis0(const Field<2>& src, Field<2>& out, int r,
                          const Addend& addend) {
    const Box<2>& ob = out.box();
    const Box<2>& sb = src.box();
    const std::size_t olen = ob.extent(1), slen = sb.extent(1);
    (void)slen;
    int c_lo = std::max(ob.lo[1], sb.lo[1]);
    int c_hi = std::min(ob.hi[1], sb.hi[1]);

    for (int i0 = ob.lo[0]; i0 <= ob.hi[0]; ++i0) {
        double* orow =
            out.data() + static_cast<std::size_t>(i0 - ob.lo[0]) * olen;
        for (std::size_t j = 0; j < olen; ++j) orow[j] = kInf;
        if (c_hi < c_lo) continue;
        for (int k = r; k >= -r; --k) {
            int y0 = i0 - k;
            if (y0 < sb.lo[0] || y0 > sb.hi[0]) continue;
            const double add = addend(y0, k);
            const double* srow =
                src.data() + static_cast<std::size_t>(y0 - sb.lo[0]) * sb.extent(1);
            const double* s = srow + (c_lo - sb.lo[1]);
            double* o = orow + (c_lo - ob.lo[1]);
            const int cnt = c_hi - c_lo + 1;
            for (int j = 0; j < cnt; ++j) {
                double cand = s[j] + add;
                if (cand < o[j]) o[j] = cand;
            }
        }
    }
}

// Scalar field sampled on the half-grid along one axis, with prefix sums
// over the odd entries. leg_avg(c, k) is the average of the field over the
// per-cell midpoints of the straight leg from node c-k to node c; those
// midpoints are exactly the odd half-grid points between the endpoints.
struct LegTable {
    std::vector<double> vals;  // value at half-index tbase + i
    std::vector<double> podd;  // prefix sums of odd half-index entries
    int tbase = 0;
    int first_odd = 0;

    void build(const std::function<double(double)>& f, int lo, int hi, int r,
               double dx) {
        tbase = 2 * lo - r - 1;
        int tend = 2 * hi + r + 1;
        vals.resize(static_cast<std::size_t>(tend - tbase + 1));
        for (int m = tbase; m <= tend; ++m)
            vals[static_cast<std::size_t>(m - tbase)] = f(m * dx / 2.0);
        first_odd = (((tbase % 2) + 2) % 2 == 0) ? tbase + 1 : tbase;
        std::size_t nodd = static_cast<std::size_t>((tend - first_odd) / 2 + 1);
        podd.assign(nodd + 1, 0.0);
        for (std::size_t j = 0; j < nodd; ++j)
            podd[j + 1] =
                podd[j] +
                vals[static_cast<std::size_t>(first_odd - tbase) + 2 * j];
    }

    double even(int c) const {
        return vals[static_cast<std::size_t>(2 * c - tbase)];
    }

    double leg_avg(int c, int k) const {
        if (k == 0) return even(c);
        int ak = k > 0 ? k : -k;
        int m1 = k > 0 ? 2 * (c - k) + 1 : 2 * c + 1;
        std::size_t j1 = static_cast<std::size_t>((m1 - first_odd) / 2);
        return (podd[j1 + static_cast<std::size_t>(ak)] - podd[j1]) / ak;
    }
};

}  // namespace detail

// One Lax-Oleinik update of a value slice. `out_box` chooses the support of
// the result (it may grow the input box by up to one reach).
template <int N>
inline Field<N> lax_oleinik_step(const Field<N>& in, const Medium<N>& m,
                                 const EnvironmentSample& w, const Lattice<N>& lat,
                                 const Box<N>& out_box,
                                 const StepOptions<N>& opt = {}) {
    const int r = lat.reach();
    const double dt = lat.dt, dx = lat.dx;
    const double scale = opt.cost_scale;
    Field<N> out(out_box);

    using Form = typename KernelInfo<N>::Form;
    const Form form = m.kernel.form;

    // half-grid bounds along each axis (union of in and out boxes)
    Idx<N> hlo{}, hhi{};
    for (int a = 0; a < N; ++a) {
        hlo[a] = std::min(in.box().lo[a], out_box.lo[a]);
        hhi[a] = std::max(in.box().hi[a], out_box.hi[a]);
    }

    if (form == Form::Additive) {
        std::array<std::vector<double>, N> ke;
        for (int a = 0; a < N; ++a) {
            ke[a].resize(static_cast<std::size_t>(2 * r + 1));
            for (int k = -r; k <= r; ++k) {
                double v = k * dx / dt;
                ke[a][static_cast<std::size_t>(k + r)] =
                    scale * dt * m.kernel.ke_diag[a] * v * v;
            }
        }
        // separable potential: one leg table per axis, V(x) = sum_a V_a(x_a)
        // up to a constant split
        std::array<detail::LegTable, N> pot;
        for (int a = 0; a < N; ++a) {
            pot[a].build(
                [&](double c) {
                    Vec<N> x{};
                    x[a] = c;
                    return scale * dt * m.kernel.field(x, w);
                },
                hlo[a], hhi[a], r, dx);
        }
        double v0 = 0;
        {
            Vec<N> zero{};
            v0 = scale * dt * m.kernel.field(zero, w);
        }
        if constexpr (N == 1) {
            const auto& p0 = pot[0];
            detail::minplus_contig<N>(
                in, out, r,
                [&](const Idx<N>&) {
                    return [&](int c, int k) {
                        return ke[0][static_cast<std::size_t>(k + r)] -
                               p0.leg_avg(c, k);
                    };
                },
                opt.argmin);
        } else {
            Box<N> mid_box = in.box();
            mid_box.lo[N - 1] = out_box.lo[N - 1];
            mid_box.hi[N - 1] = out_box.hi[N - 1];
            Field<N> mid(mid_box);
            const auto& p1 = pot[1];
            detail::minplus_contig<N>(in, mid, r, [&](const Idx<N>&) {
                return [&](int c, int k) {
                    return ke[1][static_cast<std::size_t>(k + r)] -
                           (p1.leg_avg(c, k) - v0);
                };
            });
            const auto& p0 = pot[0];
            detail::minplus_axis0(mid, out, r, [&](int y0, int k) {
                return ke[0][static_cast<std::size_t>(k + r)] -
                       p0.leg_avg(y0 + k, k);
            });
        }
        return out;
    }

    if (form == Form::ConformalAxis0) {
        // conformal factor depends on the axis-0 coordinate only
        detail::LegTable cfac;
        cfac.build(
            [&](double c) {
                Vec<N> x{};
                x[0] = c;
                return scale * dt * m.kernel.field(x, w);
            },
            hlo[0], hhi[0], r, dx);
        std::vector<double> sq(static_cast<std::size_t>(2 * r + 1));
        for (int k = -r; k <= r; ++k) {
            double v = k * dx / dt;
            sq[static_cast<std::size_t>(k + r)] = v * v;
        }
        if constexpr (N == 1) {
            detail::minplus_contig<N>(
                in, out, r,
                [&](const Idx<N>&) {
                    return [&](int c, int k) {
                        return cfac.leg_avg(c, k) *
                               sq[static_cast<std::size_t>(k + r)];
                    };
                },
                opt.argmin);
        } else {
            Box<N> mid_box = in.box();
            mid_box.lo[N - 1] = out_box.lo[N - 1];
            mid_box.hi[N - 1] = out_box.hi[N - 1];
            Field<N> mid(mid_box);
            // axis-1 legs keep the axis-0 coordinate fixed at the row
            detail::minplus_contig<N>(in, mid, r, [&](const Idx<N>& lead) {
                const double c0 = cfac.even(lead[0]);
                return [&, c0](int, int k) {
                    return c0 * sq[static_cast<std::size_t>(k + r)];
                };
            });
            detail::minplus_axis0(mid, out, r, [&](int y0, int k) {
                return cfac.leg_avg(y0 + k, k) *
                       sq[static_cast<std::size_t>(k + r)];
            });
        }
        return out;
    }

    // generic kernel: direct stencil loop in ascending-source order, cost
    // integrated along the leg at one midpoint per crossed cell layer
    std::vector<Idx<N>> offsets;
    {
        Idx<N> k{};
        for (int a = 0; a < N; ++a) k[a] = r;
        while (true) {
            offsets.push_back(k);
            int a = N - 1;
            while (a >= 0 && --k[a] < -r) k[a--] = r;
            if (a < 0) break;
        }
    }
    const Box<N>& ib = in.box();
    Idx<N> i = out_box.lo;
    while (true) {
        double best = kInf;
        std::int16_t bestk = 0;
        for (std::size_t oi = 0; oi < offsets.size(); ++oi) {
            const auto& k = offsets[oi];
            Idx<N> y = i - k;
            if (!ib.contains(y)) continue;
            double v = in.at(y);
            if (v == kInf) continue;
            Vec<N> vel{};
            int q = 1;
            for (int a = 0; a < N; ++a) {
                vel[a] = k[a] * dx / dt;
                q = std::max(q, std::abs(k[a]));
            }
            double lsum = 0;
            for (int j = 0; j < q; ++j) {
                double th = (j + 0.5) / q;
                Vec<N> p{};
                for (int a = 0; a < N; ++a) p[a] = (y[a] + th * k[a]) * dx;
                lsum += eval_L(m, p, vel, w);
            }
            double cand = v + scale * dt * lsum / q;
            if (cand < best) {
                best = cand;
                bestk = static_cast<std::int16_t>(oi);
            }
        }
        out.at(i) = best;
        if (opt.argmin) (*opt.argmin)[out_box.flat(i)] = bestk;
        int a = N - 1;
        while (a >= 0 && ++i[a] > out_box.hi[a]) i[a--] = out_box.lo[a];
        if (a < 0) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// DP drivers.

template <int N>
struct ConeDpOptions {
    double cost_scale = 1.0;
    bool prune_to_target = false;  // intersect with the backward cone
    Idx<N> target{};
};

// Value slice of phi(x0, ., steps*dt, w): dynamic programming from a delta
// seed at x0. The slice support stays inside the forward cone (and inside
// the backward cone of the target when pruning is enabled).
template <int N>
inline Field<N> dp_from_point(const Medium<N>& m, const EnvironmentSample& w,
                              const Lattice<N>& lat, const Idx<N>& x0, int steps,
                              const ConeDpOptions<N>& opt = {}) {
    if (steps < 1) throw LatticeError("dp_from_point: need at least one step");
    const int r = lat.reach();
    const Box<N> domain = lat.domain_box();

    for (int a = 0; a < N; ++a) {
        if (x0[a] - r * steps < domain.lo[a] || x0[a] + r * steps > domain.hi[a])
            throw LatticeError(
                "propagation cone reaches the domain boundary; increase "
                "domain_radius beyond " +
                format_double(lat.domain_radius) + " (need >= " +
                format_double(norm_inf<N>(lat.point(x0)) +
                              lat.speed_cap * steps * lat.dt + lat.dx) +
                ")");
    }

    Box<N> seed_box{x0, x0};
    Field<N> cur(seed_box, 0.0);
    for (int s = 1; s <= steps; ++s) {
        Box<N> forward = Box<N>{x0, x0}.grown(r * s).clipped(domain);
        if (opt.prune_to_target) {
            Box<N> backward{opt.target, opt.target};
            forward = forward.clipped(backward.grown(r * (steps - s)));
        }
        if (forward.empty())
            throw LatticeError("dp_from_point: empty propagation region");
        StepOptions<N> so;
        so.cost_scale = opt.cost_scale;
        cur = lax_oleinik_step(cur, m, w, lat, forward, so);
    }
    return cur;
}

// phi(x', x, t, w) by DP inside the cone. Errors: off-cone queries name the
// required slope; cones touching the domain boundary ask for a larger box.
template <int N>
inline double minimal_action(const Medium<N>& m, const EnvironmentSample& w,
                             const Vec<N>& xfrom, const Vec<N>& xto, double t,
                             const Lattice<N>& lat) {
    Idx<N> i0 = lat.index_of(xfrom);
    Idx<N> i1 = lat.index_of(xto);
    int steps = lat.steps_of(t);
    if (steps < 1) throw LatticeError("minimal_action: horizon shorter than dt");
    double dist = norm2<N>(xto - xfrom);
    if (dist >= lat.speed_cap * t)
        throw ConeError("query outside the propagation cone: |x-x'| = " +
                        format_double(dist) + " >= A t with A = " +
                        format_double(lat.speed_cap) + "; need A > " +
                        format_double(dist / t));
    ConeDpOptions<N> opt;
    opt.prune_to_target = true;
    opt.target = i1;
    Field<N> last = dp_from_point(m, w, lat, i0, steps, opt);
    return last.at(i1);
}

// phi_eps(x', x, t, w) = eps * phi(x', x, t/eps, w); the identity is the
// implementation.
template <int N>
inline double rescaled_action(const Medium<N>& m, const EnvironmentSample& w,
                              double eps, const Vec<N>& xfrom, const Vec<N>& xto,
                              double t, const Lattice<N>& lat) {
    if (eps <= 0) throw LatticeError("rescaled_action: eps must be positive");
    return eps * minimal_action(m, w, xfrom, xto, t / eps, lat);
}

// ---------------------------------------------------------------------------
// Cone-Lipschitz audit: empirical Lipschitz constants of phi on C_A.

struct LipschitzReport {
    double lip_space = 0;  // max |d phi / d x| over cone-interior pairs
    double lip_time = 0;   // max |d phi / d t|
    double constant() const { return std::max(lip_space, lip_time); }
};

template <int N>
inline LipschitzReport verify_cone_lipschitz(const Medium<N>& m,
                                             const EnvironmentSample& w,
                                             const Lattice<N>& lat, const Vec<N>& xfrom,
                                             double t_lo, double t_hi,
                                             double cone_fraction = 0.9) {
    LipschitzReport rep;
    Idx<N> i0 = lat.index_of(xfrom);
    int s_lo = lat.steps_of(t_lo), s_hi = lat.steps_of(t_hi);
    Field<N> prev;
    Box<N> seed{i0, i0};
    Field<N> cur(seed, 0.0);
    const int r = lat.reach();
    const Box<N> domain = lat.domain_box();
    for (int s = 1; s <= s_hi; ++s) {
        Box<N> forward = Box<N>{i0, i0}.grown(r * s).clipped(domain);
        cur = lax_oleinik_step(cur, m, w, lat, forward, {});
        if (s >= s_lo) {
            double t = s * lat.dt;
            double rad = cone_fraction * lat.speed_cap * t;
            const Box<N>& b = cur.box();
            Idx<N> i = b.lo;
            while (true) {
                double v = cur.at(i);
                if (v != kInf && norm2<N>(lat.point(i) - xfrom) < rad) {
                    for (int a = 0; a < N; ++a) {
                        Idx<N> j = i;
                        j[a] += 1;
                        double u = cur.get_or_inf(j);
                        if (u != kInf && norm2<N>(lat.point(j) - xfrom) < rad)
                            rep.lip_space =
                                std::max(rep.lip_space, std::abs(u - v) / lat.dx);
                    }
                    if (prev.size() && prev.box().contains(i)) {
                        double u = prev.at(i);
                        if (u != kInf &&
                            norm2<N>(lat.point(i) - xfrom) <
                                cone_fraction * lat.speed_cap * (t - lat.dt))
                            rep.lip_time =
                                std::max(rep.lip_time, std::abs(v - u) / lat.dt);
                    }
                }
                int a = N - 1;
                while (a >= 0 && ++i[a] > b.hi[a]) i[a--] = b.lo[a];
                if (a < 0) break;
            }
        }
        prev = cur;
    }
    return rep;
}

}  // namespace hjh
