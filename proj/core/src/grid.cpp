#include "bolab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bolab {

double Grid::dxi() const noexcept { return 2.0 * std::numbers::pi / length_; }

std::vector<double> Grid::x_nodes() const {
    std::vector<double> out(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) out[static_cast<std::size_t>(j)] = x(j);
    return out;
}

std::vector<double> Grid::freqs() const {
    std::vector<double> out(static_cast<std::size_t>(n_));
    for (int k = kmin(); k <= kmax(); ++k) out[static_cast<std::size_t>(k - kmin())] = xi(k);
    return out;
}

Grid make_grid(int n, double length) {
    if (n < 16 || n % 2 != 0)
        throw std::invalid_argument("make_grid: n must be even and >= 16, got " + std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("make_grid: length must be positive");
    int rest = n;
    for (int p : {2, 3, 5, 7})
        while (rest % p == 0) rest /= p;
    if (rest != 1)
        throw std::invalid_argument("make_grid: n must factor into primes <= 7, got " + std::to_string(n));
    return Grid(n, length);
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(g.n()))
        throw std::invalid_argument("Field: sample count does not match grid");
}

bool Field::is_finite() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void Field::require_finite(const char* context) const {
    if (!is_finite()) throw std::invalid_argument(std::string(context) + ": non-finite field value");
}

bool Spectrum::is_finite() const noexcept {
    return std::all_of(coeffs.begin(), coeffs.end(),
                       [](cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

void Spectrum::require_finite(const char* context) const {
    if (!is_finite()) throw std::invalid_argument(std::string(context) + ": non-finite coefficient");
}

namespace {
void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("fields live on different grids");
}
} // namespace

Field operator+(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out(a.grid);
    for (int j = 0; j < a.grid.n(); ++j) out[j] = a[j] + b[j];
    return out;
}

Field operator-(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out(a.grid);
    for (int j = 0; j < a.grid.n(); ++j) out[j] = a[j] - b[j];
    return out;
}

Field operator*(double s, const Field& a) {
    Field out(a.grid);
    for (int j = 0; j < a.grid.n(); ++j) out[j] = s * a[j];
    return out;
}

double max_abs_diff(const Field& a, const Field& b) {
    require_same_grid(a, b);
    double m = 0.0;
    for (int j = 0; j < a.grid.n(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

double max_abs(const Field& a) {
    double m = 0.0;
    for (double v : a.values) m = std::max(m, std::abs(v));
    return m;
}

double integrate(const Field& u) {
    double s = 0.0;
    for (double v : u.values) s += v;
    return s * u.grid.dx();
}

double l2_norm(const Field& u) {
    double s = 0.0;
    for (double v : u.values) s += v * v;
    return std::sqrt(s * u.grid.dx());
}

} // namespace bolab
