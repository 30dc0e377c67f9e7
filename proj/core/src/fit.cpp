#include "bolab/fit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bolab {

std::vector<double> least_squares(const std::vector<std::vector<double>>& columns, std::span<const double> y) {
    const auto rows = static_cast<Eigen::Index>(y.size());
    const auto cols = static_cast<Eigen::Index>(columns.size());
    if (cols == 0 || rows < cols) throw std::invalid_argument("least_squares: underdetermined system");
    Eigen::MatrixXd A(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const auto& c = columns[static_cast<std::size_t>(j)];
        if (static_cast<Eigen::Index>(c.size()) != rows) throw std::invalid_argument("least_squares: ragged columns");
        for (Eigen::Index i = 0; i < rows; ++i) A(i, j) = c[static_cast<std::size_t>(i)];
    }
    const Eigen::Map<const Eigen::VectorXd> b(y.data(), rows);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < cols) throw std::invalid_argument("least_squares: rank-deficient design");
    const Eigen::VectorXd x = qr.solve(b);
    return {x.data(), x.data() + cols};
}

double relative_residual(std::span<const double> y, std::span<const double> fit) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        num += (y[i] - fit[i]) * (y[i] - fit[i]);
        den += y[i] * y[i];
    }
    if (den == 0.0) return std::sqrt(num / static_cast<double>(y.size()));
    return std::sqrt(num / den);
}

double QuadraticFit::root() const {
    if (quadratic == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return -linear / quadratic;
}

QuadraticFit fit_quadratic_through_origin(std::span<const double> t, std::span<const double> y) {
    std::vector<double> c1(t.begin(), t.end()), c2(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) c2[i] = t[i] * t[i];
    const auto c = least_squares({c1, c2}, y);
    QuadraticFit fit{c[0], c[1], 0.0};
    std::vector<double> model(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) model[i] = fit.linear * t[i] + fit.quadratic * t[i] * t[i];
    fit.residual = relative_residual(y, model);
    return fit;
}

MonomialFit fit_monomial(std::span<const double> t, std::span<const double> y, int power) {
    std::vector<double> col(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) col[i] = std::pow(t[i], power);
    const auto c = least_squares({col}, y);
    std::vector<double> model(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) model[i] = c[0] * col[i];
    return {c[0], relative_residual(y, model)};
}

} // namespace bolab
