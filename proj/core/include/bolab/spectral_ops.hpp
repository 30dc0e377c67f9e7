#pragma once

#include "bolab/grid.hpp"
#include "bolab/transform.hpp"

namespace bolab {

/// Multiplier -i sgn(xi) with sgn(0) = 0. The Nyquist mode is zeroed since
/// its image would not be the transform of a real field.
Spectrum hilbert(const Spectrum& spec);

/// Multiplier (i xi)^order, 0 <= order <= 8. Odd orders zero the Nyquist mode.
Spectrum derivative(const Spectrum& spec, int order);

/// Free Benjamin-Ono group: multiplier exp(-i t xi |xi|).
Spectrum linear_propagator(const Spectrum& spec, double t);

/// Largest |k| kept by dealias() for a grid of n points.
int dealias_cutoff(int n, double keep_fraction);

/// Zero every mode with |k| > keep_fraction * n / 2.
Spectrum dealias(const Spectrum& spec, double keep_fraction);

/// Real-space convenience wrappers.
Field hilbert(const Field& f);
Field derivative(const Field& f, int order);

/// d^l/dx^l ( a H(d^m f/dx^m) - H(a d^m f/dx^m) ), products formed after a
/// 2/3-rule dealias of both factors.
///
/// Requires l, m >= 0 and l + m <= 6. Throws ContaminationError when either input
/// has boundary_contamination() above kCommutatorContaminationLimit.
Field commutator(const Field& a, const Field& f, int l, int m);

inline constexpr double kCommutatorContaminationLimit = 1e-9;

} // namespace bolab
