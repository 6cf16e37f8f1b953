#include <catch_amalgamated.hpp>

#include "hjh/audit.hpp"
#include "hjh/stablenorm.hpp"

using namespace hjh;

namespace {

// direction grid for 2D metric tables: symmetric, contains 0, halves and
// the diagonal so homogeneity and triangle audits have in-grid pairs
DirectionGrid<2> metric_grid() {
    DirectionGrid<2> g;
    g.points.push_back(Vec<2>{0.0, 0.0});
    auto add = [&](double a, double b) {
        g.points.push_back(Vec<2>{a, b});
        g.points.push_back(Vec<2>{-a, -b});
    };
    add(1.0, 0.0);
    add(0.0, 1.0);
    add(0.5, 0.0);
    add(0.0, 0.5);
    add(1.0, 1.0);
    add(0.5, 0.5);
    add(1.0, -1.0);
    add(0.5, -0.5);
    return g;
}

EffectiveOptions<2> metric_options() {
    EffectiveOptions<2> opt;
    opt.schedule = {1, 2, 4};
    opt.lattice.dx = 0.05;
    opt.lattice.dt = 0.2;
    // anchored estimates carry an O(1/n) boundary cost; for periodic media
    // stationarity makes every base an upper bound of the limit, so the
    // minimum over cell base points is the sharpest admissible estimate
    opt.base_points = {Vec<2>{0.0, 0.0}, Vec<2>{0.5, 0.0}, Vec<2>{0.0, 0.5},
                       Vec<2>{0.5, 0.5}};
    return opt;
}

const EffectiveTable<2>& conformal_table() {
    static EffectiveTable<2> table = [] {
        auto m = metric_medium(MetricFamily<2>::conformal_cosine(0.5));
        return effective_lagrangian_table(m, metric_grid(), metric_options());
    }();
    return table;
}

}  // namespace

TEST_CASE("metric medium closed forms") {
    auto m = metric_medium(MetricFamily<2>::flat());
    auto w = sample_environment(m, 0);
    CHECK(m.H(Vec<2>{0.2, 0.3}, Vec<2>{2.0, 0.0}, w) == 1.0);  // |p|^2/4
    CHECK(eval_L(m, Vec<2>{0.2, 0.3}, Vec<2>{1.0, 1.0}, w) == 2.0);  // |v|^2

    auto c = metric_medium(MetricFamily<2>::conformal_cosine(0.5));
    double fac = std::pow(1.0 + 0.5 * std::cos(2.0 * M_PI * 0.3), 2.0);
    CHECK(eval_L(c, Vec<2>{0.3, 0.7}, Vec<2>{1.0, 2.0}, w) ==
          Catch::Approx(fac * 5.0).margin(1e-12));
    CHECK(c.homogeneity_degree == 2);
}

TEST_CASE("conformal metric medium passes the (H1)-(H5) audit") {
    auto m = metric_medium(MetricFamily<2>::conformal_cosine(0.5));
    auto rep = audit_assumptions(m);
    CHECK(rep.all_pass());
}

TEST_CASE("non-positive-definite family is rejected") {
    MetricFamily<2> bad;
    bad.name = "degenerate";
    bad.g = [](const Vec<2>&, const EnvironmentSample&) {
        Mat<2> m{};
        m[0][0] = 1.0;
        m[1][1] = -0.5;
        return m;
    };
    bad.eig_min = -0.5;
    bad.eig_max = 1.0;
    CHECK_THROWS_AS(metric_medium(bad), MediumError);
}

TEST_CASE("dijkstra lengths: flat metric and domination monotonicity") {
    auto flat = MetricFamily<2>::flat();
    EnvironmentSample w{"", 0, {}};
    Box<2> box;
    box.lo = {-20, -20};
    box.hi = {40, 40};
    double d = dijkstra_length(flat, w, box, 0.05, Idx<2>{0, 0}, Idx<2>{20, 0});
    CHECK(d == Catch::Approx(1.0).epsilon(0.02));

    // domination: g2 = 4 * g1 doubles every edge weight exactly
    MetricFamily<2> big = flat;
    big.g = [](const Vec<2>&, const EnvironmentSample&) {
        Mat<2> m{};
        m[0][0] = m[1][1] = 4.0;
        return m;
    };
    big.eig_min = big.eig_max = 4.0;
    double d2 = dijkstra_length(big, w, box, 0.05, Idx<2>{0, 0}, Idx<2>{20, 0});
    CHECK(d2 >= d);
    CHECK(d2 == Catch::Approx(2.0 * d).margin(1e-12));
}

TEST_CASE("periodic stable norm: flat recovers Euclidean within 2%") {
    auto flat = MetricFamily<2>::flat();
    auto res = periodic_stable_norm(flat, Idx<2>{1, 0}, {4, 8});
    CHECK(res.value == Catch::Approx(1.0).epsilon(0.02));
}

TEST_CASE("periodic stable norm: conformal lane value 0.5 within 5%") {
    auto fam = MetricFamily<2>::conformal_cosine(0.5);
    auto res = periodic_stable_norm(fam, Idx<2>{0, 1}, {32, 64});
    CHECK(res.value == Catch::Approx(0.5).epsilon(0.05));
}

TEST_CASE("stationary stable norm: flat metric is Euclidean within 3%") {
    auto m = metric_medium(MetricFamily<2>::flat());
    auto table = effective_lagrangian_table(m, metric_grid(), metric_options());
    auto norm = stationary_stable_norm(table);
    for (std::size_t i = 0; i < norm.dirs.size(); ++i) {
        double expect = norm2<2>(norm.dirs[i]);
        if (expect == 0) {
            CHECK(norm.values[i] == 0.0);
        } else {
            CHECK(norm.values[i] == Catch::Approx(expect).epsilon(0.03));
        }
    }
}

TEST_CASE("stationary stable norm: conformal lane direction") {
    auto norm = stationary_stable_norm(conformal_table());
    CHECK(norm.value(Vec<2>{0.0, 1.0}) == Catch::Approx(0.5).epsilon(0.05));
    CHECK(norm.value(Vec<2>{0.0, 0.0}) == 0.0);
}

TEST_CASE("ergodic and periodic-oracle methods agree within 5%") {
    auto fam = MetricFamily<2>::conformal_cosine(0.5);
    auto norm = stationary_stable_norm(conformal_table());
    for (auto h : {Idx<2>{0, 1}, Idx<2>{1, 0}, Idx<2>{1, 1}}) {
        auto per = periodic_stable_norm(fam, h, {32, 64});
        double erg = norm.value(Vec<2>{static_cast<double>(h[0]),
                                       static_cast<double>(h[1])});
        INFO("h = (" << h[0] << "," << h[1] << ") periodic = " << per.value
                     << " ergodic = " << erg);
        CHECK(std::abs(per.value - erg) <= 0.05 * per.value);
    }
}

TEST_CASE("negative effective Lagrangian trips the pipeline-defect error") {
    auto table = conformal_table();
    table.convexified[table.index_of(Vec<2>{0.5, 0.0})] = -0.1;
    CHECK_THROWS_AS(stationary_stable_norm(table), Error);
}

TEST_CASE("norm audit: flat within 3%, conformal within 5%") {
    auto m = metric_medium(MetricFamily<2>::flat());
    auto flat_table = effective_lagrangian_table(m, metric_grid(), metric_options());
    auto flat_norm = stationary_stable_norm(flat_table);
    auto rep = norm_audit(flat_norm);
    CHECK(rep.pass(0.03));

    auto cn = stationary_stable_norm(conformal_table());
    auto crep = norm_audit(cn);
    INFO("homogeneity " << crep.homogeneity_violation << " triangle "
                        << crep.triangle_violation);
    CHECK(crep.pass(0.05));
}

TEST_CASE("triangle holds with near equality on collinear triples") {
    auto norm = stationary_stable_norm(conformal_table());
    double half = norm.value(Vec<2>{0.0, 0.5});
    double full = norm.value(Vec<2>{0.0, 1.0});
    CHECK(full <= 2.0 * half + 1e-12);
    CHECK(full == Catch::Approx(2.0 * half).epsilon(0.05));
}

TEST_CASE("homogeneity of the effective Lagrangian on metric media") {
    auto rep = homogeneity_check(conformal_table(), {-1.0, 0.5, 2.0});
    INFO("max defect " << rep.max_defect);
    CHECK(rep.max_defect <= 0.05);
    // lambda = 1 is the identity: zero defect by construction
    auto rep1 = homogeneity_check(conformal_table(), {1.0});
    CHECK(rep1.max_defect == 0.0);
}

TEST_CASE("flat metric effective Lagrangian is the exact quadratic") {
    auto m = metric_medium(MetricFamily<2>::flat());
    auto table = effective_lagrangian_table(m, metric_grid(), metric_options());
    for (std::size_t i = 0; i < table.grid.points.size(); ++i) {
        double expect = dot<2>(table.grid.points[i], table.grid.points[i]);
        CHECK(table.convexified[i] ==
              Catch::Approx(expect).epsilon(0.05).margin(1e-9));
    }
}
