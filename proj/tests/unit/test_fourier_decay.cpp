#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bolab/decay.hpp"
#include "bolab/errors.hpp"
#include "bolab/spectral_ops.hpp"
#include "bolab/transform.hpp"
#include "support.hpp"

using namespace bolab;
using bolab::testing::pi;

namespace {

Field first_derivative_data(const Grid& g, double amplitude = 1.0) {
    return sample(g, [amplitude](double x) { return -2.0 * amplitude * x * std::exp(-x * x); });
}

Spectrum cubic_cusp(const Grid& g) {
    Spectrum s(g);
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        const double xi = g.xi(k);
        s.at(k) = std::pow(std::abs(xi), 3) * std::exp(-xi * xi);
    }
    return s;
}

} // namespace

TEST_CASE("fourth-derivative stencil is exact on polynomials up to degree 9") {
    for (double x0 : {0.0, 0.7, -2.3}) {
        for (int p = 0; p <= 9; ++p) {
            const double h = 0.25;
            double fd = 0.0;
            for (int i = 0; i < 9; ++i) fd += kFourthDerivativeStencil[static_cast<std::size_t>(i)] * std::pow(x0 + (i - 4) * h, p);
            fd /= std::pow(h, 4);
            double exact = 0.0;
            if (p >= 4) exact = p * (p - 1) * (p - 2) * (p - 3) * std::pow(x0, p - 4);
            CHECK(fd == doctest::Approx(exact).epsilon(1e-8).scale(1e3));
        }
    }
}

TEST_CASE("jump estimator returns 12 on |xi|^3 exp(-xi^2)") {
    for (double dxi : {0.02, 0.01, 0.005}) {
        const double L = 2.0 * pi / dxi;
        const Grid g = make_grid(4096, L);
        const JumpEstimate je = jump_estimate(cubic_cusp(g));
        CHECK(je.jump == doctest::Approx(12.0).epsilon(0.01));
        CHECK(je.imag_residual == 0.0);
    }
}

TEST_CASE("jump estimator sees no jump in smooth spectra and no Hermitian defect") {
    const Grid g = make_grid(4096, 400.0);
    const Spectrum s = forward(first_derivative_data(g));
    const JumpEstimate je = jump_estimate(s);
    CHECK(std::abs(je.jump) < 1e-8);
    CHECK(je.imag_residual < 1e-12);
}

TEST_CASE("jump estimator preconditions") {
    CHECK_THROWS_AS(jump_estimate(Spectrum(make_grid(32, 10.0))), std::invalid_argument);
    const Grid g = make_grid(1024, 100.0);
    CHECK_THROWS_AS(jump_estimate(forward(testing::gaussian(g))), std::invalid_argument);
}

TEST_CASE("free-flow jump is -12 t mu1") {
    // The sgn(xi) term of the third derivative jumps by -12 i t d/dxi \hat u0(0) = -12 t mu1.
    const Grid g = make_grid(8192, 400.0);
    const Field u0 = first_derivative_data(g);
    const double mu1 = -std::sqrt(pi);
    for (double t : {0.5, 1.0, 2.0}) {
        const JumpEstimate je = jump_estimate(linear_propagator(forward(u0), t));
        CHECK(je.jump == doctest::Approx(-12.0 * t * mu1).epsilon(0.01));
    }
}

TEST_CASE("kappa is grid-stable under n -> 2n and L -> 2L") {
    const std::vector<double> ts{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    const double base = calibrate_kappa(first_derivative_data(make_grid(8192, 400.0)), ts).kappa;
    const double fine = calibrate_kappa(first_derivative_data(make_grid(16384, 400.0)), ts).kappa;
    const double wide = calibrate_kappa(first_derivative_data(make_grid(16384, 800.0)), ts).kappa;
    CHECK(base == doctest::Approx(2.0).epsilon(0.01));
    CHECK(std::abs(fine / base - 1.0) < 0.01);
    CHECK(std::abs(wide / base - 1.0) < 0.01);
    CHECK_THROWS_AS(calibrate_kappa(testing::gaussian(make_grid(1024, 100.0), 0.0, 1.0), ts), std::invalid_argument);
}

TEST_CASE("jump model vanishes at 0 and t*") {
    const double mu1 = -std::sqrt(pi), l2sq = std::sqrt(pi / 2);
    const DecayModel m = make_decay_model(mu1, l2sq, 2.0);
    REQUIRE(m.tstar.has_value());
    CHECK(*m.tstar == doctest::Approx(4.0 * std::sqrt(2.0)));
    CHECK(jump_model(m, 0.0) == 0.0);
    CHECK(std::abs(jump_model(m, *m.tstar)) < 1e-12);
    CHECK(jump_model(m, 1.0) == doctest::Approx(-12.0 * (mu1 + l2sq / 4.0)));
    CHECK_FALSE(make_decay_model(0.0, 1.0, 2.0).tstar.has_value());
    CHECK_THROWS_AS(make_decay_model(1.0, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("jump model from an affine momentum equals the closed form") {
    const double mu1 = -1.3, l2sq = 0.9, kappa = 2.0;
    const DecayModel m = make_decay_model(mu1, l2sq, kappa);
    std::vector<double> t, mu;
    for (int i = 0; i <= 40; ++i) {
        t.push_back(0.25 * i);
        mu.push_back(mu1 + 0.5 * t.back() * l2sq);
    }
    const auto J = jump_model_from_momentum(kappa, t, mu);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(J[i] == doctest::Approx(jump_model(m, t[i])).epsilon(1e-12));
}

TEST_CASE("F terms: order 0 is the propagated spectrum, higher orders need zero mean") {
    const Grid g = make_grid(2048, 200.0);
    const Spectrum s = forward(first_derivative_data(g));
    const FTerm f0 = f_term(0, 0.7, s);
    const Spectrum w = linear_propagator(s, 0.7);
    for (int k : {-50, -1, 1, 3, 200}) CHECK(std::abs(f0.regular.at(k) - w.at(k)) < 1e-13);
    CHECK_THROWS_AS(f_term(5, 1.0, s), std::invalid_argument);
    CHECK_THROWS_AS(f_term(3, 1.0, forward(testing::gaussian(g))), std::invalid_argument);
}

TEST_CASE("sum of the E terms reproduces the fourth derivative") {
    const Grid g = make_grid(4096, 200.0);
    const Field u0 = first_derivative_data(g);
    for (double t : {0.5, 1.0, 2.0}) {
        const ETermTable tab = e_term_table(t, u0);
        CHECK(tab.identity_error < 1e-8);
        CHECK(std::isnan(tab.norms[4]));
        for (int j = 0; j < 10; ++j)
            if (j != 4) CHECK(std::isfinite(tab.ratios[static_cast<std::size_t>(j)]));
    }
    const auto E = e_terms(1.0, u0);
    for (int k = g.kmin(); k <= g.kmax(); ++k) CHECK(E[4].at(k) == cplx(0.0));
}

TEST_CASE("second momentum probe needs records across [0, t*]") {
    const Grid g = make_grid(1024, 200.0);
    BOParams p;
    p.t_end = 0.2;
    p.dt = 0.01;
    p.contamination_limit = 1e-4;
    const Trajectory tr = evolve(first_derivative_data(g), p);
    CHECK_THROWS_AS(second_momentum_probe(tr, 5.0), SpanError);
}
