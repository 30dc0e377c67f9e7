#include "bolab/transform.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace bolab {

namespace {
// The FFTW planner is not re-entrant.
std::mutex planner_mutex;
} // namespace

FftWorkspace::FftWorkspace(int n) : n_(n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("FftWorkspace: n must be even");
    std::lock_guard lock(planner_mutex);
    real_ = fftw_alloc_real(static_cast<std::size_t>(n));
    spec_ = fftw_alloc_complex(static_cast<std::size_t>(half()));
    forward_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
}

FftWorkspace::~FftWorkspace() {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(backward_);
    fftw_destroy_plan(forward_);
    fftw_free(spec_);
    fftw_free(real_);
}

void FftWorkspace::r2c(std::span<const double> in, std::span<cplx> out) {
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(forward_);
    const auto* src = reinterpret_cast<const cplx*>(spec_);
    std::copy(src, src + half(), out.begin());
}

void FftWorkspace::c2r(std::span<const cplx> in, std::span<double> out) {
    std::copy(in.begin(), in.end(), reinterpret_cast<cplx*>(spec_));
    fftw_execute(backward_);
    std::copy(real_, real_ + n_, out.begin());
}

FftWorkspace& thread_workspace(int n) {
    thread_local std::map<int, std::unique_ptr<FftWorkspace>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftWorkspace>(n);
    return *slot;
}

Spectrum forward(const Field& field, FftWorkspace& ws) {
    field.require_finite("forward");
    const Grid& g = field.grid;
    const int n = g.n();
    std::vector<cplx> half(static_cast<std::size_t>(n / 2 + 1));
    ws.r2c(field.values, half);

    // Node offset -L/2 contributes (-1)^k.
    const double scale = g.dx();
    Spectrum out(g);
    for (int k = 0; k <= n / 2; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const cplx c = sign * scale * half[static_cast<std::size_t>(k)];
        if (k < n / 2) {
            out.at(k) = c;
            if (k > 0) out.at(-k) = std::conj(c);
        } else {
            out.at(-k) = c;
        }
    }
    return out;
}

Spectrum forward(const Field& field) { return forward(field, thread_workspace(field.grid.n())); }

Field inverse(const Spectrum& spec, FftWorkspace& ws) {
    spec.require_finite("inverse");
    const Grid& g = spec.grid;
    const int n = g.n();
    std::vector<cplx> half(static_cast<std::size_t>(n / 2 + 1));
    const double scale = 1.0 / g.length();
    for (int k = 0; k < n / 2; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        half[static_cast<std::size_t>(k)] = sign * scale * spec.at(k);
    }
    const double nyq_sign = ((n / 2) % 2 == 0) ? 1.0 : -1.0;
    half[static_cast<std::size_t>(n / 2)] = nyq_sign * scale * spec.at(-n / 2).real();

    Field out(g);
    ws.c2r(half, out.values);
    return out;
}

Field inverse(const Spectrum& spec) { return inverse(spec, thread_workspace(spec.grid.n())); }

} // namespace bolab
