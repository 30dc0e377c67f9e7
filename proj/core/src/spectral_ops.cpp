#include "bolab/spectral_ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bolab/errors.hpp"
#include "bolab/weights.hpp"

namespace bolab {

namespace {

constexpr cplx I{0.0, 1.0};

cplx ipow(int order) {
    switch (order % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

Field pointwise_product(const Field& a, const Field& b) {
    Field out(a.grid);
    for (int j = 0; j < a.grid.n(); ++j) out[j] = a[j] * b[j];
    return out;
}

} // namespace

Spectrum hilbert(const Spectrum& spec) {
    Spectrum out(spec.grid);
    const Grid& g = spec.grid;
    for (int k = g.kmin() + 1; k <= g.kmax(); ++k) {
        if (k > 0) out.at(k) = -I * spec.at(k);
        else if (k < 0) out.at(k) = I * spec.at(k);
    }
    return out;
}

Spectrum derivative(const Spectrum& spec, int order) {
    if (order < 0 || order > 8)
        throw std::invalid_argument("derivative: order must be in [0, 8], got " + std::to_string(order));
    if (order == 0) return spec;
    const Grid& g = spec.grid;
    const cplx unit = ipow(order);
    Spectrum out(g);
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        if (k == g.kmin() && order % 2 == 1) continue;
        out.at(k) = unit * std::pow(g.xi(k), order) * spec.at(k);
    }
    return out;
}

Spectrum linear_propagator(const Spectrum& spec, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("linear_propagator: non-finite t");
    const Grid& g = spec.grid;
    Spectrum out(g);
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        const double xi = g.xi(k);
        out.at(k) = std::polar(1.0, -t * xi * std::abs(xi)) * spec.at(k);
    }
    return out;
}

int dealias_cutoff(int n, double keep_fraction) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw std::invalid_argument("dealias: keep_fraction must be in (0, 1]");
    // Guard against 2/3 * 12 / 2 evaluating to 3.9999...
    return static_cast<int>(std::floor(keep_fraction * (n / 2) + 1e-9));
}

Spectrum dealias(const Spectrum& spec, double keep_fraction) {
    const int cut = dealias_cutoff(spec.grid.n(), keep_fraction);
    Spectrum out = spec;
    const Grid& g = spec.grid;
    for (int k = g.kmin(); k <= g.kmax(); ++k)
        if (std::abs(k) > cut) out.at(k) = 0.0;
    return out;
}

Field hilbert(const Field& f) { return inverse(hilbert(forward(f))); }

Field derivative(const Field& f, int order) { return inverse(derivative(forward(f), order)); }

Field commutator(const Field& a, const Field& f, int l, int m) {
    if (l < 0 || m < 0 || l + m > 6)
        throw std::invalid_argument("commutator: need l, m >= 0 and l + m <= 6");
    if (!(a.grid == f.grid)) throw std::invalid_argument("commutator: grid mismatch");
    a.require_finite("commutator");
    f.require_finite("commutator");
    for (const Field* in : {&a, &f}) {
        const double ratio = boundary_contamination(*in);
        if (ratio > kCommutatorContaminationLimit)
            throw ContaminationError(ratio, "commutator: input reaches the periodic boundary");
    }

    constexpr double two_thirds = 2.0 / 3.0;
    const Field ad = inverse(dealias(forward(a), two_thirds));
    const Spectrum g_hat = dealias(derivative(forward(f), m), two_thirds);
    const Field g = inverse(g_hat);
    const Field hg = inverse(hilbert(g_hat));

    const Field first = pointwise_product(ad, hg);
    const Field second = inverse(hilbert(forward(pointwise_product(ad, g))));
    return inverse(derivative(forward(first - second), l));
}

} // namespace bolab
