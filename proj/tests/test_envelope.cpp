#include <catch_amalgamated.hpp>

#include "hjh/envelope.hpp"

using namespace hjh;

TEST_CASE("piecewise convex eval and conjugate agree with quadratics") {
    // f(r) = r^2/2 + 1 sampled densely; conjugate should be s^2/2 - 1
    auto f = PiecewiseConvex::sample([](double r) { return 0.5 * r * r + 1.0; },
                                     32.0, 2049);
    CHECK(f.eval(2.0) == Catch::Approx(3.0).margin(1e-3));
    for (double s : {0.0, 0.5, 1.0, 3.0, 10.0}) {
        CHECK(f.conjugate_at(s) == Catch::Approx(0.5 * s * s - 1.0).margin(2e-3));
    }
}

TEST_CASE("conjugate slope out of range is an error") {
    auto f = PiecewiseConvex::sample([](double r) { return 0.5 * r * r; }, 4.0, 257);
    CHECK_THROWS_AS(f.conjugate_at(10.0), Error);
}

TEST_CASE("inverse_at finds the smallest preimage") {
    auto f = PiecewiseConvex::sample([](double r) { return r * r; }, 16.0, 1025);
    CHECK(f.inverse_at(4.0) == Catch::Approx(2.0).margin(1e-4));
    CHECK(f.inverse_at(-1.0) == 0.0);
}

TEST_CASE("coercivity envelopes: theta_L = conj Theta, Theta_L = conj theta") {
    // cosine medium envelopes: theta = r^2/2 - 1, Theta = r^2/2 + 1
    auto env = CoercivityEnvelope::from_hamiltonian_bounds(
        [](double r) { return 0.5 * r * r - 1.0; },
        [](double r) { return 0.5 * r * r + 1.0; });
    CHECK(env.theta_L.eval(2.0) == Catch::Approx(0.5 * 4.0 - 1.0).margin(5e-3));
    CHECK(env.Theta_L.eval(2.0) == Catch::Approx(0.5 * 4.0 + 1.0).margin(5e-3));
    CHECK(env.theta_L.nondecreasing());
    CHECK(env.Theta_L.nondecreasing());
    // sandwich: theta <= Theta and theta_L <= Theta_L on the audited radius
    for (double r = 0; r < 30.0; r += 0.37) {
        CHECK(env.theta.eval(r) <= env.Theta.eval(r) + 1e-12);
        CHECK(env.theta_L.eval(r) <= env.Theta_L.eval(r) + 1e-12);
    }
}
