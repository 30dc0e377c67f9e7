#include "bolab/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bolab/errors.hpp"
#include "bolab/fit.hpp"
#include "bolab/spectral_ops.hpp"
#include "bolab/transform.hpp"

namespace bolab {

namespace {

constexpr cplx I{0.0, 1.0};

double max_coeff(const Spectrum& s) {
    double m = 0.0;
    for (const cplx& c : s.coeffs) m = std::max(m, std::abs(c));
    return m;
}

bool mean_zero(const Spectrum& s) { return std::abs(s.at(0)) <= 1e-8 * std::max(max_coeff(s), 1e-300); }

// \hat{(-i x)^m u0} for m = 0..4.
std::array<Spectrum, 5> moment_spectra(const Field& u0) {
    const Grid& g = u0.grid;
    std::array<Spectrum, 5> out{Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g)};
    Field w = u0;
    for (int m = 0; m <= 4; ++m) {
        out[static_cast<std::size_t>(m)] = forward(w);
        for (auto& c : out[static_cast<std::size_t>(m)].coeffs) {
            // (-i)^m
            static const cplx unit[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
            c *= unit[m % 4];
        }
        for (int j = 0; j < g.n(); ++j) w[j] *= g.x(j);
    }
    return out;
}

// Regular part of d^m/dxi^m exp(-i t xi|xi|), divided by the exponential,
// at frequency xi with sign s (s = sgn xi, given separately for the limits).
cplx phase_derivative(int m, double t, double xi, double s) {
    const double a = std::abs(xi);
    switch (m) {
    case 0: return 1.0;
    case 1: return -2.0 * I * t * a;
    case 2: return -2.0 * I * t * s - 4.0 * t * t * xi * xi;
    case 3: return -12.0 * t * t * xi + 8.0 * I * t * t * t * xi * xi * a;
    case 4: return -12.0 * t * t + 48.0 * I * t * t * t * xi * a + 16.0 * t * t * t * t * xi * xi * xi * xi;
    default: throw std::invalid_argument("phase_derivative: order above 4");
    }
}

constexpr int binom(int n, int k) {
    int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - i + 1) / i;
    return r;
}

cplx leibniz(int j, double t, double xi, double s, const std::array<cplx, 5>& g) {
    cplx acc = 0.0;
    for (int m = 0; m <= j; ++m) acc += static_cast<double>(binom(j, m)) * phase_derivative(m, t, xi, s) * g[static_cast<std::size_t>(j - m)];
    return std::polar(1.0, -t * xi * std::abs(xi)) * acc;
}

double l2_xi(const Spectrum& s) {
    double acc = 0.0;
    for (const cplx& c : s.coeffs) acc += std::norm(c);
    return std::sqrt(acc * s.grid.dxi());
}

} // namespace

DecayModel make_decay_model(double mu1, double l2sq, double kappa) {
    DecayModel m{mu1, l2sq, kappa, tstar_quadratic(mu1, l2sq)};
    return m;
}

double jump_model(const DecayModel& model, double t) {
    return model.kappa * -6.0 * (t * model.mu1 + 0.25 * t * t * model.l2sq);
}

std::vector<double> jump_model_from_momentum(double kappa, const std::vector<double>& times,
                                             const std::vector<double>& momentum) {
    if (times.size() != momentum.size()) throw std::invalid_argument("jump_model_from_momentum: size mismatch");
    std::vector<double> out(times.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        acc += 0.5 * (times[i] - times[i - 1]) * (momentum[i] + momentum[i - 1]);
        out[i] = -6.0 * kappa * acc;
    }
    return out;
}

FTerm f_term(int j, double t, const Spectrum& u0_spec) {
    if (j < 0 || j > 4) throw std::invalid_argument("f_term: j must be in 0..4");
    if (j >= 3 && !mean_zero(u0_spec))
        throw std::invalid_argument("f_term: j >= 3 requires zero-mean data");
    const Grid& g = u0_spec.grid;
    const auto gm = moment_spectra(inverse(u0_spec));
    FTerm out{Spectrum(g), 0.0, 0.0};
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        std::array<cplx, 5> d;
        for (int m = 0; m <= 4; ++m) d[static_cast<std::size_t>(m)] = gm[static_cast<std::size_t>(m)].at(k);
        if (k == 0) {
            out.right_limit = leibniz(j, t, 0.0, 1.0, d);
            out.left_limit = leibniz(j, t, 0.0, -1.0, d);
            continue;
        }
        const double xi = g.xi(k);
        out.regular.at(k) = leibniz(j, t, xi, xi > 0 ? 1.0 : -1.0, d);
    }
    return out;
}

std::array<Spectrum, 10> e_terms(double t, const Field& u0) {
    const Grid& g = u0.grid;
    const auto gm = moment_spectra(u0);
    std::array<Spectrum, 10> E{Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g),
                               Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g), Spectrum(g)};
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        const double xi = g.xi(k), a = std::abs(xi);
        const double sg = (xi > 0) - (xi < 0);
        const cplx ph = std::polar(1.0, -t * xi * a);
        const cplx g0 = gm[0].at(k), g1 = gm[1].at(k), g2 = gm[2].at(k), g3 = gm[3].at(k), g4 = gm[4].at(k);
        E[0].at(k) = ph * (-12.0 * t2) * g0;
        E[1].at(k) = ph * (48.0 * I * t3 * xi * a) * g0;
        E[2].at(k) = ph * (16.0 * t4 * xi * xi * xi * xi) * g0;
        E[3].at(k) = ph * (-48.0 * t2 * xi) * g1;
        E[5].at(k) = ph * (32.0 * I * t3 * xi * xi * a) * g1;
        E[6].at(k) = ph * (-24.0 * t2 * xi * xi) * g2;
        E[7].at(k) = ph * (-12.0 * I * t * sg) * g2;
        E[8].at(k) = ph * (-8.0 * I * t * a) * g3;
        E[9].at(k) = ph * g4;
    }
    return E;
}

ETermTable e_term_table(double t, const Field& u0) {
    const Spectrum u0_hat = forward(u0);
    if (!mean_zero(u0_hat)) throw std::invalid_argument("e_term_table: data must have zero mean");
    const Grid& g = u0.grid;
    ETermTable tab;
    tab.t = t;
    const auto E = e_terms(t, u0);

    // Majorants: spatial derivatives spectrally, weights with the sawtooth x.
    auto weighted = [&](int xpow, int dorder) {
        Field d = inverse(derivative(u0_hat, dorder));
        for (int j = 0; j < g.n(); ++j) d[j] *= std::pow(g.x(j), xpow);
        return l2_norm(d);
    };
    const double n0 = l2_norm(u0);
    tab.majorants = {n0,
                     weighted(0, 2),
                     weighted(0, 4),
                     n0 + weighted(1, 1),
                     std::numeric_limits<double>::quiet_NaN(),
                     weighted(1, 3) + weighted(0, 2),
                     n0 + weighted(2, 2) + weighted(1, 1),
                     weighted(2, 0),
                     weighted(3, 1) + weighted(2, 0),
                     weighted(4, 0)};

    for (std::size_t j = 0; j < 10; ++j) {
        if (j == 4) {
            tab.norms[j] = tab.ratios[j] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        tab.norms[j] = l2_xi(E[j]);
        tab.ratios[j] = tab.norms[j] / tab.majorants[j];
    }

    const FTerm f4 = f_term(4, t, u0_hat);
    double worst = 0.0, scale = 0.0;
    for (int k = g.kmin(); k <= g.kmax(); ++k) {
        if (k == 0) continue;
        cplx sum = 0.0;
        for (const auto& e : E) sum += e.at(k);
        worst = std::max(worst, std::abs(sum - f4.regular.at(k)));
        scale = std::max(scale, std::abs(f4.regular.at(k)));
    }
    tab.identity_error = scale > 0.0 ? worst / scale : worst;
    return tab;
}

JumpEstimate jump_estimate(const Spectrum& spec) {
    const Grid& g = spec.grid;
    if (g.n() < 64) throw std::invalid_argument("jump_estimate: need n >= 64");
    if (!mean_zero(spec)) throw std::invalid_argument("jump_estimate: spectrum must vanish at xi = 0");

    // One-sided third derivative at 0 from samples at side * j * stride.
    auto one_sided = [&](int side, int stride) {
        const double h = stride * g.dxi();
        const cplx f0 = spec.at(0), f1 = spec.at(side * stride), f2 = spec.at(2 * side * stride),
                   f3 = spec.at(3 * side * stride), f4 = spec.at(4 * side * stride);
        const cplx d = (-5.0 * f0 + 18.0 * f1 - 24.0 * f2 + 14.0 * f3 - 3.0 * f4) / (2.0 * h * h * h);
        return static_cast<double>(side) * d;
    };
    auto richardson = [&](int side) { return (4.0 * one_sided(side, 1) - one_sided(side, 2)) / 3.0; };

    const cplx jump = richardson(+1) - richardson(-1);
    return {jump.real(), std::abs(jump.imag())};
}

Calibration calibrate_kappa(const Field& u0, const std::vector<double>& t_samples) {
    Calibration cal;
    cal.mu1 = 0.0;
    const Grid& g = u0.grid;
    for (int j = 0; j < g.n(); ++j) cal.mu1 += g.x(j) * u0[j];
    cal.mu1 *= g.dx();
    if (std::abs(cal.mu1) < 1e-12 * std::max(l2_norm(u0), 1e-300))
        throw std::invalid_argument("calibrate_kappa: first moment of the data is zero");

    const Spectrum u0_hat = forward(u0);
    std::vector<double> predictor;
    for (double t : t_samples) {
        cal.times.push_back(t);
        cal.jumps.push_back(jump_estimate(linear_propagator(u0_hat, t)).jump);
        predictor.push_back(-6.0 * t * cal.mu1);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < predictor.size(); ++i) {
        num += predictor[i] * cal.jumps[i];
        den += predictor[i] * predictor[i];
    }
    if (!(den > 0.0)) throw std::invalid_argument("calibrate_kappa: degenerate time samples");
    cal.kappa = num / den;
    std::vector<double> model(predictor.size());
    for (std::size_t i = 0; i < model.size(); ++i) model[i] = cal.kappa * predictor[i];
    cal.residual = relative_residual(cal.jumps, model);
    return cal;
}

ProbeResult second_momentum_probe(const Trajectory& traj, double tstar) {
    std::vector<double> t, m2;
    const double lo = std::min(0.0, tstar), hi = std::max(0.0, tstar);
    for (const auto& r : traj.records) {
        if (r.t >= lo - 1e-12 && r.t <= hi + 1e-12) {
            t.push_back(r.t);
            m2.push_back(r.second_moment);
        }
    }
    if (t.size() < 64 || std::abs(t.front() - lo) > 1e-12 || std::abs(t.back() - hi) > 1e-9)
        throw SpanError("second_momentum_probe: records do not cover [0, t*] with 64 samples");

    auto trapezoid = [&](std::size_t stride) {
        double acc = 0.0;
        std::size_t i = 0;
        for (; i + stride < t.size(); i += stride) acc += 0.5 * (t[i + stride] - t[i]) * (m2[i] + m2[i + stride]);
        if (i + 1 < t.size()) acc += 0.5 * (t.back() - t[i]) * (m2[i] + m2.back());
        return acc;
    };
    ProbeResult out;
    out.samples = static_cast<int>(t.size());
    out.value = trapezoid(1);
    out.error = std::abs(out.value - trapezoid(2)) / 3.0;
    if (tstar < 0.0) out.value = -out.value;
    return out;
}

} // namespace bolab
