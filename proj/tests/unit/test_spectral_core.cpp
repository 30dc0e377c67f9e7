#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bolab/errors.hpp"
#include "bolab/spectral_ops.hpp"
#include "bolab/transform.hpp"
#include "support.hpp"

using namespace bolab;
using bolab::testing::pi;

TEST_CASE("grid construction validates size and length") {
    CHECK_THROWS_AS(make_grid(15, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2 * 11 * 16, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(64, 0.0), std::invalid_argument);
    const Grid g = make_grid(64, 10.0);
    CHECK(g.x(0) == doctest::Approx(-5.0));
    CHECK(g.dxi() == doctest::Approx(2.0 * pi / 10.0));
    CHECK(g.kmin() == -32);
    CHECK(g.kmax() == 31);
}

TEST_CASE("transform of exp(-x^2) is sqrt(pi) exp(-xi^2/4)") {
    const Grid g = make_grid(1024, 40.0);
    const Spectrum s = forward(testing::gaussian(g));
    double worst = 0.0;
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        const double xi = g.xi(k);
        worst = std::max(worst, std::abs(s.at(k) - cplx(std::sqrt(pi) * std::exp(-xi * xi / 4.0), 0.0)));
    }
    CHECK(worst < 1e-13);
}

TEST_CASE("shifted gaussian picks up the phase exp(-i xi a)") {
    const Grid g = make_grid(1024, 40.0);
    const double a = 1.5;
    const Spectrum s = forward(testing::gaussian(g, a));
    for (int k : {-20, -3, 1, 7, 40}) {
        const double xi = g.xi(k);
        const cplx expect = std::polar(std::sqrt(pi) * std::exp(-xi * xi / 4.0), -xi * a);
        CHECK(std::abs(s.at(k) - expect) < 1e-13);
    }
}

TEST_CASE("inverse undoes forward") {
    const Grid g = make_grid(512, 30.0);
    testing::BumpGenerator gen(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Field u = gen(g);
        CHECK(max_abs_diff(inverse(forward(u)), u) < 1e-14 * (1.0 + max_abs(u)));
    }
}

TEST_CASE("forward transform is bit-identical across calls") {
    const Grid g = make_grid(2048, 100.0);
    const Field u = testing::gaussian(g, 0.3, 1.7);
    const Spectrum a = forward(u), b = forward(u);
    CHECK(a.coeffs == b.coeffs);
}

TEST_CASE("spectral derivative of a gaussian matches the Hermite closed form") {
    const Grid g = make_grid(1024, 40.0);
    const Field u = testing::gaussian(g);
    const Field d4 = derivative(u, 4);
    // d^4/dx^4 exp(-x^2) = (16 x^4 - 48 x^2 + 12) exp(-x^2)
    const Field expect = sample(g, [](double x) { return (16 * x * x * x * x - 48 * x * x + 12) * std::exp(-x * x); });
    CHECK(max_abs_diff(d4, expect) < 1e-8);
    CHECK_THROWS_AS(derivative(forward(u), 9), std::invalid_argument);
}

TEST_CASE("Hilbert transform maps cos to sin on periodic modes") {
    const Grid g = make_grid(128, 2.0 * pi);
    for (int m : {1, 5, 40}) {
        const Field c = sample(g, [m](double x) { return std::cos(m * x); });
        const Field s = sample(g, [m](double x) { return std::sin(m * x); });
        CHECK(max_abs_diff(hilbert(c), s) < 1e-13);
    }
}

TEST_CASE("Hilbert multiplier zeroes the mean and the Nyquist mode") {
    const Grid g = make_grid(64, 10.0);
    Spectrum s(g);
    for (int k = g.kmin(); k <= g.kmax(); ++k) s.at(k) = cplx(1.0 + k, 0.5);
    const Spectrum h = hilbert(s);
    CHECK(h.at(0) == cplx(0.0));
    CHECK(h.at(g.kmin()) == cplx(0.0));
    CHECK(h.at(3) == cplx(0.0, -1.0) * s.at(3));
    CHECK(h.at(-3) == cplx(0.0, 1.0) * s.at(-3));
}

TEST_CASE("linear propagator is unitary and composes") {
    const Grid g = make_grid(512, 40.0);
    const Spectrum s = forward(testing::gaussian(g));
    const Spectrum a = linear_propagator(linear_propagator(s, 0.7), 0.6);
    const Spectrum b = linear_propagator(s, 1.3);
    double worst = 0.0;
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        worst = std::max(worst, std::abs(a.at(k) - b.at(k)));
        CHECK(std::abs(b.at(k)) == doctest::Approx(std::abs(s.at(k))).epsilon(1e-14));
    }
    CHECK(worst < 1e-13);
    CHECK_THROWS_AS(linear_propagator(s, std::nan("")), std::invalid_argument);
}

TEST_CASE("dealias cutoff follows the keep fraction") {
    CHECK(dealias_cutoff(12, 2.0 / 3.0) == 4);
    CHECK(dealias_cutoff(8192, 2.0 / 3.0) == 2730);
    CHECK(dealias_cutoff(64, 1.0) == 32);
    CHECK_THROWS_AS(dealias_cutoff(64, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(dealias_cutoff(64, 1.5), std::invalid_argument);
    const Grid g = make_grid(24, 6.0);
    Spectrum s(g);
    for (int k = g.kmin(); k <= g.kmax(); ++k) s.at(k) = 1.0;
    const Spectrum d = dealias(s, 2.0 / 3.0);
    for (int k = g.kmin(); k <= g.kmax(); ++k) CHECK(d.at(k) == cplx(std::abs(k) > 8 ? 0.0 : 1.0));
}

TEST_CASE("commutator rejects boundary-reaching input and bad orders") {
    const Grid g = make_grid(256, 20.0);
    const Field f = testing::gaussian(g);
    const Field wide = testing::gaussian(g, 0.0, 6.0);
    CHECK_THROWS_AS(commutator(wide, f, 0, 1), ContaminationError);
    CHECK_THROWS_AS(commutator(f, f, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(commutator(f, f, 4, 3), std::invalid_argument);
}

TEST_CASE("commutator is bilinear and vanishes for a = 0") {
    const Grid g = make_grid(256, 40.0);
    const Field f = testing::gaussian(g, 1.0);
    const Field a = testing::gaussian(g, -1.0, 2.0);
    CHECK(max_abs(commutator(Field(g), f, 1, 1)) == 0.0);
    const Field c1 = commutator(a, f, 1, 1);
    const Field c2 = commutator(2.0 * a, f, 1, 1);
    CHECK(max_abs_diff(c2, 2.0 * c1) < 1e-13 * max_abs(c2));
}
