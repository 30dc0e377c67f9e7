#pragma once

#include <fftw3.h>

#include <span>

#include "bolab/grid.hpp"

namespace bolab {

/// Owns FFTW plans and aligned scratch for one transform length.
///
/// A workspace is not safe to share between threads; give each worker its
/// own. Plans use FFTW_ESTIMATE so that the same inputs always take the same
/// code path and produce bit-identical output.
class FftWorkspace {
public:
    explicit FftWorkspace(int n);
    ~FftWorkspace();
    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;

    int n() const noexcept { return n_; }
    int half() const noexcept { return n_ / 2 + 1; }

    /// Unnormalized real-to-half-complex DFT, out.size() == n/2+1.
    void r2c(std::span<const double> in, std::span<cplx> out);
    /// Unnormalized inverse of r2c (result is n times the input signal).
    void c2r(std::span<const cplx> in, std::span<double> out);

private:
    int n_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan forward_;
    fftw_plan backward_;
};

/// Per-thread workspace cache keyed by transform length.
FftWorkspace& thread_workspace(int n);

Spectrum forward(const Field& field, FftWorkspace& ws);
Spectrum forward(const Field& field);

/// Inverse transform to real samples. Uses the k >= 0 half of the spectrum,
/// so the caller is expected to pass a Hermitian spectrum.
Field inverse(const Spectrum& spec, FftWorkspace& ws);
Field inverse(const Spectrum& spec);

} // namespace bolab
