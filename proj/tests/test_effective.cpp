#include <catch_amalgamated.hpp>

#include "hjh/effective.hpp"
#include "oracles.hpp"

using namespace hjh;

namespace {

Medium<1> free1() {
    PeriodicSpec<1> s;
    return make_periodic_medium(s);
}

Medium<1> cosine1() {
    PeriodicSpec<1> s;
    s.potential.name = "cosine";
    s.potential.params = {1.0};
    return make_periodic_medium(s);
}

Medium<1> golden_qp() {
    QuasiPeriodicSpec<1> s;
    s.alpha = {(std::sqrt(5.0) - 1.0) / 2.0};
    return make_quasiperiodic_medium(s);
}

EstimateGrid grid0505() {
    EstimateGrid g;
    g.dx = 0.05;
    g.dt = 0.05;
    return g;
}

EstimateGrid grid_fine() {
    EstimateGrid g;
    g.dx = 0.05;
    g.dt = 0.2;  // velocity granularity 0.25
    return g;
}

}  // namespace

TEST_CASE("phi_map floor formula and anti-drift bound") {
    CHECK(phi_map<1>(0.5, Vec<1>{1.3})[0] == 2);
    for (double eps : {0.7, 0.21, 0.05}) CHECK(phi_map<1>(eps, Vec<1>{0.0})[0] == 0);
    CHECK(phi_map<1>(0.5, Vec<1>{-1.3})[0] == -3);

    Rng rng(13);
    for (int i = 0; i < 1000; ++i) {
        double eps = 0.01 + rng.uniform01();
        Vec<2> h{(2 * rng.uniform01() - 1) * 5.0, (2 * rng.uniform01() - 1) * 5.0};
        Idx<2> g = phi_map<2>(eps, h);
        Vec<2> back{eps * g[0], eps * g[1]};
        CHECK(norm2<2>(back - h) <= eps * 2.0 + 1e-12);
    }
}

TEST_CASE("subadditive estimate: free medium, h = 1 converges to 1/2") {
    auto m = free1();
    auto w = sample_environment(m, 0);
    auto s = subadditive_estimate(m, w, Vec<1>{1.0}, {2, 4, 8, 16}, grid0505());
    CHECK(std::abs(s.estimate - 0.5) <= 0.02);
    CHECK(s.spread <= 0.02);
}

TEST_CASE("subadditive estimate at h = 0 finds -max V (parking)") {
    auto m = cosine1();
    auto w = sample_environment(m, 0);
    auto s = subadditive_estimate(m, w, Vec<1>{0.0}, {2, 4, 8}, grid0505());
    CHECK(s.estimate == Catch::Approx(-1.0).margin(1e-9));
}

TEST_CASE("subadditive estimates at doubled horizon stay within the spread") {
    auto m = cosine1();
    auto w = sample_environment(m, 0);
    auto s = subadditive_estimate(m, w, Vec<1>{0.5}, {4, 8, 16}, grid_fine());
    auto s2 = subadditive_estimate(m, w, Vec<1>{0.5}, {8, 16, 32}, grid_fine());
    CHECK(std::abs(s2.estimate - s.estimate) <=
          s.spread + s2.spread + 1e-12);
}

TEST_CASE("effective table: free medium recovers h^2/2 within 5%") {
    auto m = free1();
    auto grid = DirectionGrid<1>::uniform1d(2.0, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {4, 8, 16};
    opt.lattice = grid_fine();
    auto table = effective_lagrangian_table(m, grid, opt);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        double h = grid.points[i][0];
        double expect = 0.5 * h * h;
        if (std::abs(h) < 0.2) {
            CHECK(std::abs(table.convexified[i] - expect) <= 0.01);
        } else {
            CHECK(table.convexified[i] ==
                  Catch::Approx(expect).epsilon(0.05).margin(1e-9));
        }
    }
}

TEST_CASE("midpoint convexity of the convexified table is exact") {
    auto m = cosine1();
    auto grid = DirectionGrid<1>::uniform1d(2.0, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {2, 4, 8};
    opt.lattice = grid_fine();
    auto table = effective_lagrangian_table(m, grid, opt);
    // sorted order = grid construction order here
    const auto& v = table.convexified;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 2; j < v.size(); ++j) {
            if ((j - i) % 2 != 0) continue;
            std::size_t mid = (i + j) / 2;
            CHECK(v[mid] <= 0.5 * (v[i] + v[j]));
        }
    // convexified never exceeds raw
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] <= table.raw[i] + 1e-15);
}

TEST_CASE("envelope sandwich for the effective Lagrangian") {
    auto m = cosine1();
    auto grid = DirectionGrid<1>::uniform1d(2.0, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {2, 4, 8};
    opt.lattice = grid_fine();
    auto table = effective_lagrangian_table(m, grid, opt);
    double slack = 0.05 + 2.0 * (opt.lattice.dx + opt.lattice.dt);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        double h = std::abs(grid.points[i][0]);
        CHECK(table.convexified[i] >= m.env.theta_L.eval(h) - slack);
        CHECK(table.convexified[i] <= m.env.Theta_L.eval(h) + slack);
    }
}

TEST_CASE("effective Hamiltonian: quadratic table is self-dual") {
    auto m = free1();
    auto grid = DirectionGrid<1>::uniform1d(3.0, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {4, 8, 16};
    opt.lattice = grid_fine();
    auto table = effective_lagrangian_table(m, grid, opt);
    // momenta on the direction-grid step: the grid-restricted conjugate of
    // h^2/2 is exact exactly where the argmax lands on a grid point
    std::vector<Vec<1>> ps;
    for (int i = -6; i <= 6; ++i) ps.push_back(Vec<1>{0.25 * i});
    effective_hamiltonian(table, ps);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        double P = ps[i][0];
        double expect = 0.5 * P * P;
        CHECK(table.hbar[i] ==
              Catch::Approx(expect).epsilon(0.05).margin(1e-6));
    }
}

TEST_CASE("effective Hamiltonian of the cosine medium: flat piece and "
          "quadrature oracle") {
    auto m = cosine1();
    auto grid = DirectionGrid<1>::uniform1d(3.0, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {4, 8, 16};
    opt.lattice = grid_fine();
    auto table = effective_lagrangian_table(m, grid, opt);
    std::vector<Vec<1>> ps;
    for (int i = -20; i <= 20; ++i) ps.push_back(Vec<1>{0.1 * i});
    effective_hamiltonian(table, ps);

    const double c0 = 4.0 / M_PI;
    CHECK(oracles::cosine_period_integral(1.0, 1.0) ==
          Catch::Approx(c0).margin(1e-5));

    for (std::size_t i = 0; i < ps.size(); ++i) {
        double P = std::abs(ps[i][0]);
        if (P <= c0)
            CHECK(table.hbar[i] == Catch::Approx(1.0).epsilon(0.05));
    }
    for (double P : {1.5, 2.0}) {
        double expect = oracles::cosine_hbar(P);
        std::size_t idx = 0;
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (std::abs(ps[i][0] - P) < 1e-12) idx = i;
        CHECK(table.hbar[idx] == Catch::Approx(expect).epsilon(0.05));
    }
}

TEST_CASE("conjugate argmax on the grid boundary is a hard error") {
    auto m = free1();
    auto grid = DirectionGrid<1>::uniform1d(1.0, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {2, 4};
    opt.lattice = grid_fine();
    auto table = effective_lagrangian_table(m, grid, opt);
    std::vector<Vec<1>> ps{Vec<1>{3.0}};  // slope beyond the grid's range
    CHECK_THROWS_AS(effective_hamiltonian(table, ps), Error);
}

TEST_CASE("Fenchel double conjugate recovers the convexified table within "
          "one grid modulus") {
    auto m = cosine1();
    auto grid = DirectionGrid<1>::uniform1d(2.5, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {4, 8, 16};
    opt.lattice = grid_fine();
    auto table = effective_lagrangian_table(m, grid, opt);
    std::vector<Vec<1>> ps;
    for (int i = -60; i <= 60; ++i) ps.push_back(Vec<1>{0.1 * i});
    // trim to keep the conjugate argmax interior
    std::vector<Vec<1>> usable;
    for (const auto& p : ps) {
        if (std::abs(p[0]) <= 2.0) usable.push_back(p);
    }
    effective_hamiltonian(table, usable);
    auto back = double_conjugate(table);
    // modulus: P-step * max|h| plus h-step * max|P|
    double tol = 0.1 * 2.5 + 0.25 * 2.0 * 0 + 1e-9;
    for (std::size_t i = 0; i < back.size(); ++i) {
        double h = std::abs(table.grid.points[i][0]);
        if (h > 1.5) continue;  // slopes there exceed the momentum range
        CHECK(back[i] <= table.convexified[i] + 1e-9);
        CHECK(back[i] >= table.convexified[i] - tol);
    }
}

TEST_CASE("omega concentration on the quasi-periodic medium") {
    auto m = golden_qp();
    DirectionGrid<1> grid;
    for (double h : {-1.0, -0.5, 0.0, 0.5, 1.0}) grid.points.push_back(Vec<1>{h});
    EffectiveOptions<1> opt;
    opt.schedule = {4, 8, 16};
    opt.lattice = grid_fine();
    opt.seeds = {1, 2, 3, 4, 5, 6, 7, 8};
    auto table = effective_lagrangian_table(m, grid, opt);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        if (grid.points[i][0] == 0.0) continue;
        INFO("h = " << grid.points[i][0] << " raw = " << table.raw[i]
                    << " spread = " << table.omega_spread[i]);
        CHECK(table.omega_spread[i] <= 0.10 * std::abs(table.raw[i]));
    }
}

TEST_CASE("two point check: zero displacement and free-medium value") {
    auto m = free1();
    auto w = sample_environment(m, 0);
    auto grid = DirectionGrid<1>::uniform1d(2.0, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {4, 8, 16};
    opt.lattice = grid_fine();
    auto table = effective_lagrangian_table(m, grid, opt);

    auto repz = two_point_check(m, w, Vec<1>{1.0}, Vec<1>{1.0}, 1.0,
                                {0.25, 0.125}, table);
    for (double g : repz.gap) CHECK(g <= 0.03);

    auto rep = two_point_check(m, w, Vec<1>{1.0}, Vec<1>{0.0}, 2.0,
                               {0.25, 0.125}, table);
    for (std::size_t i = 0; i < rep.eps.size(); ++i) {
        CHECK(rep.rhs[i] == Catch::Approx(0.25).epsilon(0.05));
        CHECK(rep.lhs[i] == Catch::Approx(0.25).epsilon(0.05));
    }
}

TEST_CASE("two point check gap halves on the quasi-periodic medium") {
    auto m = golden_qp();
    auto w = sample_environment(m, 5);
    auto grid = DirectionGrid<1>::uniform1d(2.0, 0.25);
    EffectiveOptions<1> opt;
    opt.schedule = {4, 8, 16, 32};
    opt.lattice = grid_fine();
    opt.seeds = {1, 2, 3, 4};
    auto table = effective_lagrangian_table(m, grid, opt);
    auto rep = two_point_check(m, w, Vec<1>{1.0}, Vec<1>{0.25}, 1.0,
                               {0.2, 0.1, 0.05}, table);
    CHECK(rep.gap.back() <= 0.5 * rep.gap.front() + 1e-9);
}
