#include "bolab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bolab/transform.hpp"

namespace bolab {

namespace {

struct Blend {
    double lo, h;         // blend on [lo, lo + h]
    double y0, s0, c0;    // value, slope, curvature at lo
    double y1;            // value at lo + h (slope, curvature 0)
};

Blend blend_of(double cap) {
    const double y0 = std::sqrt(1.0 + cap * cap);
    return {cap, 2.0 * cap, y0, cap / y0, 1.0 / (y0 * y0 * y0), 2.0 * cap};
}

// Quintic Hermite basis on [0,1] and its first two derivatives.
struct Basis {
    double h0, h1, g0, k0;
};

Basis basis(double t) {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    return {1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5, 10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5, 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5)};
}

Basis basis_d1(double t) {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    return {-30.0 * t2 + 60.0 * t3 - 30.0 * t4, 30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4, 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4)};
}

Basis basis_d2(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {-60.0 * t + 180.0 * t2 - 120.0 * t3, 60.0 * t - 180.0 * t2 + 120.0 * t3,
            -36.0 * t + 96.0 * t2 - 60.0 * t3, 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3)};
}

double combine(const Blend& b, const Basis& e) {
    return b.y0 * e.h0 + b.y1 * e.h1 + b.h * b.s0 * e.g0 + b.h * b.h * b.c0 * e.k0;
}

// Value, slope, curvature for x >= 0.
double weight_pos(double cap, double x) {
    if (x <= cap) return std::sqrt(1.0 + x * x);
    if (x >= 3.0 * cap) return 2.0 * cap;
    const Blend b = blend_of(cap);
    return combine(b, basis((x - b.lo) / b.h));
}

double slope_pos(double cap, double x) {
    if (x <= cap) return x / std::sqrt(1.0 + x * x);
    if (x >= 3.0 * cap) return 0.0;
    const Blend b = blend_of(cap);
    return combine(b, basis_d1((x - b.lo) / b.h)) / b.h;
}

double curvature_pos(double cap, double x) {
    if (x <= cap) return std::pow(1.0 + x * x, -1.5);
    if (x >= 3.0 * cap) return 0.0;
    const Blend b = blend_of(cap);
    return combine(b, basis_d2((x - b.lo) / b.h)) / (b.h * b.h);
}

} // namespace

WeightSpec make_weight_spec(double cap) {
    if (!(cap > 0.0) || !std::isfinite(cap)) throw std::invalid_argument("make_weight_spec: cap must be positive");
    WeightSpec spec{cap, 0.0, 0.0};
    constexpr int samples = 20000;
    double prev = weight_pos(cap, 0.0);
    for (int i = 0; i <= samples; ++i) {
        const double x = 4.0 * cap * i / samples;
        const double w = weight_pos(cap, x);
        const double d = slope_pos(cap, x);
        if (d < -1e-12 || d > 1.0 + 1e-12 || w + 1e-12 < prev)
            throw std::invalid_argument("make_weight_spec: blend is not monotone with slope <= 1 for this cap");
        spec.max_slope = std::max(spec.max_slope, d);
        spec.max_x_slope_ratio = std::max(spec.max_x_slope_ratio, x * d / w);
        prev = w;
    }
    if (spec.max_x_slope_ratio > 3.0) throw std::invalid_argument("make_weight_spec: x w' <= 3 w violated");
    return spec;
}

double truncated_weight(const WeightSpec& spec, double x) { return weight_pos(spec.cap, std::abs(x)); }

double truncated_weight_slope(const WeightSpec& spec, double x) {
    const double d = slope_pos(spec.cap, std::abs(x));
    return x < 0.0 ? -d : d;
}

double truncated_weight_curvature(const WeightSpec& spec, double x) {
    return curvature_pos(spec.cap, std::abs(x));
}

NormReport z_norm(const Field& u, double s, double r) {
    if (s < 0.0 || s > 8.0) throw std::invalid_argument("z_norm: s must be in [0, 8]");
    if (r < 0.0) throw std::invalid_argument("z_norm: r must be non-negative");
    u.require_finite("z_norm");
    const Grid& g = u.grid;
    NormReport rep;
    rep.s = s;
    rep.r = r;
    rep.trusted_window = trusted_window(g);

    const Spectrum spec = forward(u);
    double hs = 0.0;
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        const double xi = g.xi(k);
        hs += std::pow(1.0 + xi * xi, s) * std::norm(spec.at(k));
    }
    rep.hs_norm = std::sqrt(hs * g.dxi() / (2.0 * std::numbers::pi));

    double wsum = 0.0;
    for (int j = 0; j < g.n(); ++j) {
        const double x = g.x(j);
        if (std::abs(x) > rep.trusted_window) continue;
        wsum += std::pow(std::abs(x), 2.0 * r) * u[j] * u[j];
    }
    rep.weight_norm = std::sqrt(wsum * g.dx());
    rep.z_norm = std::hypot(rep.hs_norm, rep.weight_norm);
    rep.boundary_ratio = boundary_contamination(u);
    rep.weight_reliable = rep.boundary_ratio <= kContaminationLimit;
    return rep;
}

double weighted_l2_truncated(const Field& u, const WeightSpec& spec, int power) {
    if (power < 1 || power > 3) throw std::invalid_argument("weighted_l2_truncated: power must be 1, 2 or 3");
    u.require_finite("weighted_l2_truncated");
    const Grid& g = u.grid;
    double sum = 0.0;
    for (int j = 0; j < g.n(); ++j) {
        const double w = std::pow(truncated_weight(spec, g.x(j)), power);
        sum += (w * u[j]) * (w * u[j]);
    }
    return std::sqrt(sum * g.dx());
}

double bracket_weighted_l2(const Field& u, int power) {
    const Grid& g = u.grid;
    const double win = trusted_window(g);
    double sum = 0.0;
    for (int j = 0; j < g.n(); ++j) {
        const double x = g.x(j);
        if (std::abs(x) > win) continue;
        const double w = std::pow(1.0 + x * x, 0.5 * power);
        sum += (w * u[j]) * (w * u[j]);
    }
    return std::sqrt(sum * g.dx());
}

namespace {

// Node indices inside the window, thinned to 8 per octave of |x|.
std::vector<int> octave_samples(const Grid& g, std::pair<double, double> window) {
    auto [a, b] = window;
    if (a > b) std::swap(a, b);
    if (a <= 0.0 && b >= 0.0) throw std::invalid_argument("tail_amplitude: window must exclude x = 0");
    std::vector<int> inside;
    for (int j = 0; j < g.n(); ++j) {
        const double x = g.x(j);
        if (x >= a && x <= b) inside.push_back(j);
    }
    if (inside.empty()) throw std::invalid_argument("tail_amplitude: window contains no nodes");
    // Walk outward in |x|.
    if (g.x(inside.front()) < 0.0) std::reverse(inside.begin(), inside.end());

    const double step = std::pow(2.0, 1.0 / 8.0);
    std::vector<int> picked;
    double next = std::abs(g.x(inside.front()));
    for (int j : inside) {
        const double ax = std::abs(g.x(j));
        if (ax + 1e-12 >= next) {
            picked.push_back(j);
            next = ax * step;
        }
    }
    if (picked.size() < 8) throw std::invalid_argument("tail_amplitude: window spans fewer than 8 octave samples");
    return picked;
}

} // namespace

TailFit tail_amplitude(const Field& u, std::pair<double, double> window) {
    u.require_finite("tail_amplitude");
    const Grid& g = u.grid;
    const std::vector<int> idx = octave_samples(g, window);
    const double floor = 1e-13 * max_abs(u);

    TailFit fit;
    fit.points = static_cast<int>(idx.size());
    std::vector<double> X, Y;
    for (int j : idx) {
        const double v = std::abs(u[j]);
        if (!(v > floor)) {
            fit.residual = std::numeric_limits<double>::infinity();
            return fit;
        }
        X.push_back(std::log(std::abs(g.x(j))));
        Y.push_back(std::log(v));
    }
    const double m = static_cast<double>(X.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sx += X[i];
        sy += Y[i];
        sxx += X[i] * X[i];
        sxy += X[i] * Y[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    double ss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double e = Y[i] - (intercept + slope * X[i]);
        ss += e * e;
    }
    fit.exponent = -slope;
    fit.residual = std::sqrt(ss / m);
    fit.reliable = fit.residual <= kTailResidualLimit;
    fit.amplitude = fit.reliable ? std::exp(intercept) : 0.0;
    return fit;
}

double tail_amplitude_fixed(const Field& u, std::pair<double, double> window, double exponent) {
    const Grid& g = u.grid;
    const std::vector<int> idx = octave_samples(g, window);
    // Least squares in log space with the slope pinned.
    double acc = 0.0;
    for (int j : idx) {
        const double v = std::max(std::abs(u[j]), std::numeric_limits<double>::min());
        acc += std::log(v) + exponent * std::log(std::abs(g.x(j)));
    }
    return std::exp(acc / static_cast<double>(idx.size()));
}

double boundary_contamination(const Field& u) {
    const Grid& g = u.grid;
    const double edge = 0.475 * g.length();
    double outer = 0.0, peak = 0.0;
    for (int j = 0; j < g.n(); ++j) {
        const double a = std::abs(u[j]);
        peak = std::max(peak, a);
        if (std::abs(g.x(j)) >= edge) outer = std::max(outer, a);
    }
    return peak > 0.0 ? outer / peak : 0.0;
}

} // namespace bolab
