#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bolab/errors.hpp"
#include "bolab/integrator.hpp"
#include "bolab/spectral_ops.hpp"
#include "bolab/transform.hpp"
#include "support.hpp"

using namespace bolab;
using bolab::testing::pi;

namespace {

Field first_derivative_data(const Grid& g, double amplitude = 1.0) {
    return sample(g, [amplitude](double x) { return -2.0 * amplitude * x * std::exp(-x * x); });
}

BOParams params_to(double t_end, double dt = 2e-3) {
    BOParams p;
    p.dt = dt;
    p.t_end = t_end;
    p.record_stride = 5;
    p.contamination_limit = 1e-4;
    return p;
}

} // namespace

TEST_CASE("dealias fraction is 2/3 for the quadratic nonlinearity") {
    CHECK(default_dealias_fraction(0) == doctest::Approx(2.0 / 3.0));
    CHECK(default_dealias_fraction(1) == doctest::Approx(0.4));
    CHECK_THROWS_AS(default_dealias_fraction(-1), std::invalid_argument);
}

TEST_CASE("nonlinear term of a gaussian in conservative form") {
    const Grid g = make_grid(1024, 40.0);
    const Field u = testing::gaussian(g);
    // -u u_x = 2 x exp(-2 x^2)
    const Field expect = sample(g, [](double x) { return 2.0 * x * std::exp(-2.0 * x * x); });
    CHECK(max_abs_diff(nonlinear_term(u, 0, 2.0 / 3.0), expect) < 1e-12);
    // k = 1: -u^3 u_x = -(u^4)_x / 4 = 2 x exp(-4 x^2)
    const Field expect3 = sample(g, [](double x) { return 2.0 * x * std::exp(-4.0 * x * x); });
    CHECK(max_abs_diff(nonlinear_term(u, 1, 0.5), expect3) < 1e-12);
}

TEST_CASE("free evolution equals the exact linear propagator") {
    const Grid g = make_grid(1024, 200.0);
    const Field u0 = first_derivative_data(g);
    BOParams p = params_to(1.0, 0.01);
    p.nonlinear = false;
    p.snapshot_times = {0.5};
    const Trajectory tr = evolve(u0, p);
    const Field exact = inverse(linear_propagator(forward(u0), 1.0));
    CHECK(max_abs_diff(tr.at(1.0), exact) < 1e-13);
    CHECK(max_abs_diff(tr.at(0.5), inverse(linear_propagator(forward(u0), 0.5))) < 1e-13);
}

TEST_CASE("a zero step is the identity") {
    const Grid g = make_grid(256, 40.0);
    const SpectralState s{0.0, forward(first_derivative_data(g))};
    BOParams p;
    const SpectralState r = step_ifrk4(s, 0.0, p);
    CHECK(r.t == 0.0);
    for (int k = g.kmin(); k <= g.kmax(); ++k) CHECK(std::abs(r.u_hat.at(k) - s.u_hat.at(k)) < 1e-15);
}

TEST_CASE("evolve lands on 0, snapshot times and t_end") {
    const Grid g = make_grid(512, 100.0);
    BOParams p = params_to(0.5, 0.03);
    p.snapshot_times = {0.1, 0.25, 0.1};
    const Trajectory tr = evolve(first_derivative_data(g), p);
    REQUIRE(tr.snapshots.size() == 4);
    CHECK(tr.snapshots[0].t == 0.0);
    CHECK(tr.snapshots[1].t == 0.1);
    CHECK(tr.snapshots[2].t == 0.25);
    CHECK(tr.snapshots[3].t == 0.5);
    CHECK(tr.records.front().t == 0.0);
    CHECK(tr.records.back().t == 0.5);
    CHECK_THROWS_AS(tr.at(0.3), std::out_of_range);
}

TEST_CASE("evolve validates its parameters") {
    const Grid g = make_grid(256, 60.0);
    const Field u0 = first_derivative_data(g);
    BOParams p = params_to(1.0);
    p.snapshot_times = {2.0};
    CHECK_THROWS_AS(evolve(u0, p), std::invalid_argument);
    p = params_to(1.0);
    p.dt = 0.0;
    CHECK_THROWS_AS(evolve(u0, p), std::invalid_argument);
    p = params_to(-1.0);
    p.snapshot_times = {0.5};
    CHECK_THROWS_AS(evolve(u0, p), std::invalid_argument);
}

TEST_CASE("initial data at the boundary is rejected") {
    const Grid g = make_grid(256, 20.0);
    CHECK_THROWS_AS(evolve(testing::gaussian(g, 0.0, 5.0), params_to(0.1)), ContaminationError);
}

TEST_CASE("blow-up of the explicit stage raises an instability error") {
    const Grid g = make_grid(256, 40.0);
    const Field u0 = 1e4 * first_derivative_data(g);
    CHECK_THROWS_AS(evolve(u0, params_to(5.0, 0.5)), InstabilityError);
}

TEST_CASE("short nonlinear run conserves mass, L2 norm and energy") {
    const Grid g = make_grid(2048, 200.0);
    const Trajectory tr = evolve(first_derivative_data(g), params_to(1.0));
    const auto& a = tr.records.front();
    for (const auto& r : tr.records) {
        CHECK(std::abs(r.i1 - a.i1) < 1e-12);
        CHECK(std::abs(r.l2 / a.l2 - 1.0) < 1e-10);
        CHECK(std::abs(r.hamiltonian - a.hamiltonian) < 1e-7 * std::abs(a.hamiltonian));
    }
}

TEST_CASE("forward then backward returns to the data") {
    const Grid g = make_grid(1024, 200.0);
    const Field u0 = first_derivative_data(g);
    const Field uT = evolve(u0, params_to(1.0)).at(1.0);
    BOParams back = params_to(-1.0);
    back.initial_contamination_limit = 1e-4;
    CHECK(max_abs_diff(evolve(uT, back).at(-1.0), u0) < 1e-10);
}

TEST_CASE("closed-form special time for the canonical data") {
    // mu1 = -A sqrt(pi), ||u0||^2 = A^2 sqrt(pi/2)
    CHECK(*tstar_quadratic(-std::sqrt(pi), std::sqrt(pi / 2)) == doctest::Approx(4.0 * std::sqrt(2.0)));
    CHECK(*tstar_quadratic(-0.5 * std::sqrt(pi), 0.25 * std::sqrt(pi / 2)) == doctest::Approx(8.0 * std::sqrt(2.0)));
    CHECK_FALSE(tstar_quadratic(0.0, 1.0).has_value());
    CHECK_THROWS_AS(tstar_quadratic(1.0, 0.0), std::invalid_argument);
    CHECK(momentum_law(4.0 * std::sqrt(2.0), -std::sqrt(pi), std::sqrt(pi / 2)) == doctest::Approx(std::sqrt(pi)));
}

TEST_CASE("nested-integral root reduces to the quadratic root for k = 0") {
    std::vector<double> t, p;
    for (int i = 0; i <= 200; ++i) {
        t.push_back(0.05 * i);
        p.push_back(2.0);  // ||u||^2 conserved
    }
    const TStarResult r = tstar_from_series(t, p, -1.5, 0);
    REQUIRE(r.tstar.has_value());
    CHECK(*r.tstar == doctest::Approx(3.0).epsilon(1e-12));
    const TStarResult none = tstar_from_series(t, p, 1.5, 0);
    CHECK_FALSE(none.tstar.has_value());
    CHECK(none.diagnostic == "span");
    CHECK_THROWS_AS(tstar_from_series({0.0}, {1.0}, 1.0, 0), SpanError);
    CHECK_THROWS_AS(tstar_from_series({0.1, 0.2}, {1.0, 1.0}, 1.0, 0), SpanError);
}

TEST_CASE("nested-integral root from a trajectory matches the closed form") {
    const Grid g = make_grid(4096, 400.0);
    const Field u0 = first_derivative_data(g);
    BOParams p = params_to(7.0, 4e-3);
    p.record_stride = 1;
    const Trajectory tr = evolve(u0, p);
    const TStarResult r = tstar_general(tr, 0);
    REQUIRE(r.tstar.has_value());
    CHECK(*r.tstar == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-6));
}
