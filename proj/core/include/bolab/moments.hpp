#pragma once

#include "bolab/grid.hpp"

namespace bolab {

/// \int x^power u dx by trapezoid quadrature over |x| <= half_width, using
/// the centered (sawtooth) coordinate.
double moment_quadrature(const Field& u, int power, double half_width);

} // namespace bolab
