#include "bolab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bolab/errors.hpp"
#include "bolab/moments.hpp"
#include "bolab/spectral_ops.hpp"
#include "bolab/transform.hpp"

namespace bolab {

double default_dealias_fraction(int k) {
    if (k < 0) throw std::invalid_argument("nonlinearity power k must be non-negative");
    // Alias-free bound for the degree-(2k+2) product: 2/3 when k = 0.
    const double p = 2.0 * k + 2.0;
    return 2.0 / (p + 1.0);
}

namespace {

constexpr cplx I{0.0, 1.0};

// Half-spectrum integrating-factor RK4 stepper. State is the raw r2c output
// of the samples (no L/n scaling, no node-offset phase): every operator here
// is a Fourier multiplier or a pointwise product, both of which commute with
// that change of representation.
class Stepper {
public:
    Stepper(const Grid& g, const BOParams& p)
        : n_(g.n()), m_(g.n() / 2 + 1), power_(2 * p.k + 2), nonlinear_(p.nonlinear), ws_(g.n()),
          xi_(static_cast<std::size_t>(m_)), keep_(static_cast<std::size_t>(m_)),
          real_(static_cast<std::size_t>(n_)), tmp_(static_cast<std::size_t>(m_)) {
        if (!(p.dealias_fraction > 0.0 && p.dealias_fraction <= 1.0))
            throw std::invalid_argument("dealias_fraction must be in (0, 1]");
        const int cut = dealias_cutoff(n_, p.dealias_fraction);
        for (int k = 0; k < m_; ++k) {
            xi_[static_cast<std::size_t>(k)] = g.xi(k);
            keep_[static_cast<std::size_t>(k)] = (k <= cut && k < n_ / 2) ? 1.0 : 0.0;
        }
        for (auto* v : {&a_, &b_, &c_, &d_, &w_}) v->resize(static_cast<std::size_t>(m_));
    }

    int half() const { return m_; }

    // out = mask * F[ -(u^p)_x / p ] with u = F^{-1}[mask * in].
    void nonlinear(const std::vector<cplx>& in, std::vector<cplx>& out) {
        if (!nonlinear_) {
            std::fill(out.begin(), out.end(), cplx{});
            return;
        }
        for (int k = 0; k < m_; ++k) tmp_[static_cast<std::size_t>(k)] = keep_[static_cast<std::size_t>(k)] * in[static_cast<std::size_t>(k)];
        ws_.c2r(tmp_, real_);
        const double inv_n = 1.0 / n_;
        for (double& v : real_) {
            const double u = v * inv_n;
            double up = u * u;
            for (int e = 2; e < power_; e += 2) up *= u * u;
            v = up;
        }
        ws_.r2c(real_, out);
        const double scale = -1.0 / power_;
        for (int k = 0; k < m_; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            out[kk] *= keep_[kk] * scale * I * xi_[kk];
        }
    }

    void set_dt(double dt) {
        if (dt == dt_ && !e_full_.empty()) return;
        dt_ = dt;
        e_full_.resize(static_cast<std::size_t>(m_));
        e_half_.resize(static_cast<std::size_t>(m_));
        for (int k = 0; k < m_; ++k) {
            const double w = xi_[static_cast<std::size_t>(k)] * xi_[static_cast<std::size_t>(k)];
            e_full_[static_cast<std::size_t>(k)] = std::polar(1.0, -w * dt);
            e_half_[static_cast<std::size_t>(k)] = std::polar(1.0, -0.5 * w * dt);
        }
    }

    void step(std::vector<cplx>& u, double dt) {
        set_dt(dt);
        const double h2 = 0.5 * dt;
        nonlinear(u, a_);
        for (int k = 0; k < m_; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            w_[kk] = e_half_[kk] * (u[kk] + h2 * a_[kk]);
        }
        nonlinear(w_, b_);
        for (int k = 0; k < m_; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            w_[kk] = e_half_[kk] * u[kk] + h2 * b_[kk];
        }
        nonlinear(w_, c_);
        for (int k = 0; k < m_; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            w_[kk] = e_full_[kk] * u[kk] + dt * e_half_[kk] * c_[kk];
        }
        nonlinear(w_, d_);
        const double h6 = dt / 6.0;
        for (int k = 0; k < m_; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            u[kk] = e_full_[kk] * u[kk] +
                    h6 * (e_full_[kk] * a_[kk] + 2.0 * e_half_[kk] * (b_[kk] + c_[kk]) + d_[kk]);
        }
    }

    void to_real(const std::vector<cplx>& u, std::vector<double>& out) {
        ws_.c2r(u, out);
        const double inv_n = 1.0 / n_;
        for (double& v : out) v *= inv_n;
    }

    FftWorkspace& workspace() { return ws_; }

private:
    int n_, m_, power_;
    bool nonlinear_;
    FftWorkspace ws_;
    std::vector<double> xi_, keep_, real_;
    std::vector<cplx> tmp_, a_, b_, c_, d_, w_;
    std::vector<cplx> e_full_, e_half_;
    double dt_ = std::numeric_limits<double>::quiet_NaN();
};

std::vector<cplx> to_raw(const Spectrum& s) {
    const Grid& g = s.grid;
    const int m = g.n() / 2 + 1;
    std::vector<cplx> raw(static_cast<std::size_t>(m));
    const double inv_dx = 1.0 / g.dx();
    for (int k = 0; k < m - 1; ++k) raw[static_cast<std::size_t>(k)] = ((k % 2 == 0) ? inv_dx : -inv_dx) * s.at(k);
    raw[static_cast<std::size_t>(m - 1)] = 0.0;  // Nyquist carried as zero
    return raw;
}

Spectrum from_raw(const Grid& g, const std::vector<cplx>& raw) {
    Spectrum s(g);
    const int m = g.n() / 2 + 1;
    for (int k = 0; k < m - 1; ++k) {
        const cplx c = ((k % 2 == 0) ? g.dx() : -g.dx()) * raw[static_cast<std::size_t>(k)];
        s.at(k) = c;
        if (k > 0) s.at(-k) = std::conj(c);
    }
    return s;
}

bool finite(const std::vector<cplx>& v) {
    for (const cplx& c : v)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

} // namespace

Field nonlinear_term(const Field& u, int k, double dealias_fraction) {
    u.require_finite("nonlinear_term");
    if (k < 0) throw std::invalid_argument("nonlinear_term: k must be non-negative");
    const Grid& g = u.grid;
    const Field ud = inverse(dealias(forward(u), dealias_fraction));
    const int p = 2 * k + 2;
    Field up(g);
    for (int j = 0; j < g.n(); ++j) {
        up[j] = std::pow(ud[j], p);
        if (!std::isfinite(up[j])) throw InstabilityError(0, "nonlinear_term: u^(2k+2) overflowed");
    }
    Spectrum s = dealias(derivative(forward(up), 1), dealias_fraction);
    for (auto& c : s.coeffs) c *= -1.0 / p;
    return inverse(s);
}

SpectralState step_ifrk4(const SpectralState& state, double dt, const BOParams& params) {
    state.u_hat.require_finite("step_ifrk4");
    if (!std::isfinite(dt)) throw std::invalid_argument("step_ifrk4: non-finite dt");
    const Grid& g = state.u_hat.grid;
    Stepper stepper(g, params);
    std::vector<cplx> raw = to_raw(state.u_hat);
    stepper.step(raw, dt);
    if (!finite(raw)) throw InstabilityError(1, "step_ifrk4: non-finite state after step");
    return {state.t + dt, from_raw(g, raw)};
}

InvariantRecord invariants(double t, const Field& u, int k) {
    InvariantRecord r;
    const Grid& g = u.grid;
    const Spectrum s = forward(u);
    r.t = t;
    r.i1 = integrate(u);
    r.l2 = l2_norm(u);
    // Whole period: the wave front leaves the trusted window well before
    // the boundary ratio grows, and cutting it off costs more than the
    // periodization error.
    const double half = 0.5 * g.length();
    r.momentum = moment_quadrature(u, 1, half);
    r.second_moment = moment_quadrature(u, 2, half);
    const Field du = inverse(hilbert(derivative(s, 1)));
    const int p = 2 * k + 2;
    double h = 0.0, pw = 0.0;
    for (int j = 0; j < g.n(); ++j) {
        h += 0.5 * u[j] * du[j] + u[j] * u[j] * u[j] / 6.0;
        pw += std::pow(u[j], p);
    }
    r.hamiltonian = h * g.dx();
    r.power_integral = pw * g.dx();
    r.boundary_ratio = boundary_contamination(u);
    return r;
}

const Field& Trajectory::at(double t) const {
    for (const auto& s : snapshots)
        if (s.t == t) return s.u;
    throw std::out_of_range("Trajectory: no snapshot at t = " + std::to_string(t));
}

Trajectory evolve(const Field& u0, const BOParams& params) {
    u0.require_finite("evolve");
    if (!(params.dt > 0.0) || !std::isfinite(params.dt)) throw std::invalid_argument("evolve: dt must be positive");
    if (!std::isfinite(params.t_end)) throw std::invalid_argument("evolve: non-finite t_end");
    if (params.record_stride < 1) throw std::invalid_argument("evolve: record_stride must be >= 1");
    const double initial_ratio = boundary_contamination(u0);
    if (initial_ratio > params.initial_contamination_limit)
        throw ContaminationError(initial_ratio, "evolve: initial data reaches the periodic boundary");

    const double lo = std::min(0.0, params.t_end), hi = std::max(0.0, params.t_end);
    std::vector<double> targets{0.0, params.t_end};
    for (double ts : params.snapshot_times) {
        if (!(ts >= lo && ts <= hi))
            throw std::invalid_argument("evolve: snapshot time " + std::to_string(ts) + " outside integration range");
        targets.push_back(ts);
    }
    const double dir = params.t_end < 0.0 ? -1.0 : 1.0;
    std::sort(targets.begin(), targets.end(), [dir](double a, double b) { return dir * a < dir * b; });
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    const Grid& g = u0.grid;
    Stepper stepper(g, params);
    std::vector<cplx> state = to_raw(forward(u0));
    std::vector<double> real(static_cast<std::size_t>(g.n()));

    Trajectory traj;
    traj.params = params;

    auto record = [&](double t, bool snapshot) {
        stepper.to_real(state, real);
        Field u(g, real);
        InvariantRecord rec = invariants(t, u, params.k);
        if (rec.boundary_ratio > params.contamination_limit)
            throw ContaminationError(rec.boundary_ratio,
                                     "evolve: boundary ratio " + std::to_string(rec.boundary_ratio) +
                                         " at t = " + std::to_string(t));
        if (traj.records.empty() || traj.records.back().t != t) traj.records.push_back(rec);
        if (snapshot) traj.snapshots.push_back({t, std::move(u)});
    };

    double t = 0.0;
    std::size_t steps = 0;
    const double step = dir * params.dt;
    for (double target : targets) {
        while (t != target) {
            const double remaining = target - t;
            const bool last = std::abs(remaining) <= params.dt * (1.0 + 1e-9);
            const double h = last ? remaining : step;
            stepper.step(state, h);
            ++steps;
            t = last ? target : t + h;
            if (!finite(state))
                throw InstabilityError(steps, "evolve: non-finite state at step " + std::to_string(steps));
            if (!last && steps % static_cast<std::size_t>(params.record_stride) == 0) record(t, false);
        }
        record(t, true);
    }

    std::sort(traj.snapshots.begin(), traj.snapshots.end(), [](const Snapshot& a, const Snapshot& b) { return a.t < b.t; });
    std::sort(traj.records.begin(), traj.records.end(),
              [](const InvariantRecord& a, const InvariantRecord& b) { return a.t < b.t; });
    return traj;
}

double momentum_law(double t, double mu1, double l2sq) { return mu1 + 0.5 * t * l2sq; }

std::optional<double> tstar_quadratic(double mu1, double l2sq) {
    if (!(l2sq > 0.0)) throw std::invalid_argument("tstar_quadratic: ||u0||_2^2 must be positive");
    if (mu1 == 0.0) return std::nullopt;
    return -4.0 * mu1 / l2sq;
}

TStarResult tstar_from_series(const std::vector<double>& times, const std::vector<double>& power_integrals,
                              double mu1, int k) {
    if (times.size() < 2 || times.size() != power_integrals.size())
        throw SpanError("tstar: need at least two samples");
    if (times.front() != 0.0) throw SpanError("tstar: series must start at t = 0");
    const double inv_p = 1.0 / (2.0 * k + 2.0);

    // mu(t) by cumulative trapezoid, outer integral G(t) likewise.
    const std::size_t m = times.size();
    std::vector<double> mu(m), G(m);
    mu[0] = mu1;
    G[0] = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
        const double h = times[i] - times[i - 1];
        if (!(h > 0.0)) throw SpanError("tstar: times must be strictly increasing");
        mu[i] = mu[i - 1] + inv_p * 0.5 * h * (power_integrals[i] + power_integrals[i - 1]);
        G[i] = G[i - 1] + 0.5 * h * (mu[i] + mu[i - 1]);
    }

    for (std::size_t i = 1; i + 1 < m; ++i) {
        if (G[i] == 0.0) return {times[i], ""};
        if ((G[i] > 0.0) == (G[i + 1] > 0.0) && G[i + 1] != 0.0) continue;
        // mu is linear on [t_i, t_{i+1}], so G is quadratic there.
        const double t0 = times[i], h = times[i + 1] - t0;
        const double slope = (mu[i + 1] - mu[i]) / h;
        auto Gat = [&](double s) { return G[i] + mu[i] * s + 0.5 * slope * s * s; };
        double a = 0.0, b = h;
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, t0); ++it) {
            const double c = 0.5 * (a + b);
            if ((Gat(c) > 0.0) == (Gat(a) > 0.0)) a = c;
            else b = c;
        }
        return {t0 + 0.5 * (a + b), ""};
    }
    if (m >= 2 && G[m - 1] == 0.0) return {times[m - 1], ""};
    return {std::nullopt, "span"};
}

TStarResult tstar_general(const Trajectory& traj, int k) {
    if (traj.records.empty()) throw SpanError("tstar: empty trajectory");
    const bool backward = traj.records.front().t < 0.0;
    const InvariantRecord& origin = backward ? traj.records.back() : traj.records.front();
    if (origin.t != 0.0) throw SpanError("tstar: records must start at t = 0");
    // A backward run is the forward problem in s = -t with the power term
    // entering mu(-s) with the opposite sign.
    std::vector<double> times, power;
    const double sign = backward ? -1.0 : 1.0;
    auto push = [&](const InvariantRecord& r) {
        times.push_back(sign * r.t);
        power.push_back(sign * r.power_integral);
    };
    if (backward)
        for (auto it = traj.records.rbegin(); it != traj.records.rend(); ++it) push(*it);
    else
        for (const auto& r : traj.records) push(r);
    TStarResult res = tstar_from_series(times, power, origin.momentum, k);
    if (res.tstar) *res.tstar *= sign;
    return res;
}

} // namespace bolab
