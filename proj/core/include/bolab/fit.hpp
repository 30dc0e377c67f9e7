#pragma once

#include <span>
#include <vector>

namespace bolab {

/// Least-squares coefficients c minimizing || sum_j c_j columns[j] - y ||_2.
std::vector<double> least_squares(const std::vector<std::vector<double>>& columns, std::span<const double> y);

/// sqrt( sum (y - fit)^2 / sum y^2 ), or the absolute RMS when y == 0.
double relative_residual(std::span<const double> y, std::span<const double> fit);

/// Fit y = a t + b t^2 (through the origin).
struct QuadraticFit {
    double linear = 0.0;
    double quadratic = 0.0;
    double residual = 0.0;
    /// -linear / quadratic, the nonzero root; NaN when quadratic == 0.
    double root() const;
};
QuadraticFit fit_quadratic_through_origin(std::span<const double> t, std::span<const double> y);

/// Fit y = c t^power through the origin, with relative residual.
struct MonomialFit {
    double coefficient = 0.0;
    double residual = 0.0;
};
MonomialFit fit_monomial(std::span<const double> t, std::span<const double> y, int power);

} // namespace bolab
