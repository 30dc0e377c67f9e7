#pragma once

#include <complex>
#include <vector>

namespace bolab {

using cplx = std::complex<double>;

/// Uniform periodic grid on [-L/2, L/2) and its dual frequency grid.
///
/// Nodes are x_j = -L/2 + j L/n for j = 0..n-1. Frequencies are
/// xi_k = 2 pi k / L for k = -n/2..n/2-1; the single k = -n/2 entry is the
/// Nyquist mode.
class Grid {
public:
    int n() const noexcept { return n_; }
    double length() const noexcept { return length_; }
    double dx() const noexcept { return length_ / n_; }
    double dxi() const noexcept;

    double x(int j) const noexcept { return -0.5 * length_ + j * dx(); }
    double xi(int k) const noexcept { return k * dxi(); }

    int kmin() const noexcept { return -n_ / 2; }
    int kmax() const noexcept { return n_ / 2 - 1; }

    std::vector<double> x_nodes() const;
    /// Frequencies in natural order, k = -n/2 first.
    std::vector<double> freqs() const;

    bool operator==(const Grid& other) const noexcept {
        return n_ == other.n_ && length_ == other.length_;
    }

private:
    friend Grid make_grid(int n, double length);
    Grid(int n, double length) : n_(n), length_(length) {}

    int n_;
    double length_;
};

/// Throws std::invalid_argument for odd n, n < 16, n with a prime factor
/// above 7, or non-positive length.
Grid make_grid(int n, double length);

/// Real samples of a function at the grid nodes.
struct Field {
    Grid grid;
    std::vector<double> values;

    explicit Field(const Grid& g) : grid(g), values(static_cast<std::size_t>(g.n()), 0.0) {}
    Field(const Grid& g, std::vector<double> v);

    double& operator[](int j) { return values[static_cast<std::size_t>(j)]; }
    double operator[](int j) const { return values[static_cast<std::size_t>(j)]; }

    bool is_finite() const noexcept;
    /// Throws std::invalid_argument on NaN/Inf.
    void require_finite(const char* context) const;
};

/// Line-normalized Fourier coefficients: coeffs approximate
/// \hat u(xi) = \int e^{-i xi x} u(x) dx, i.e. the DFT scaled by L/n with the
/// phase of the node offset -L/2 folded in. Stored in natural order, so the
/// entry for wavenumber k lives at index k + n/2.
struct Spectrum {
    Grid grid;
    std::vector<cplx> coeffs;

    explicit Spectrum(const Grid& g) : grid(g), coeffs(static_cast<std::size_t>(g.n()), cplx{}) {}

    cplx& at(int k) { return coeffs[static_cast<std::size_t>(k + grid.n() / 2)]; }
    cplx at(int k) const { return coeffs[static_cast<std::size_t>(k + grid.n() / 2)]; }

    bool is_finite() const noexcept;
    void require_finite(const char* context) const;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

/// Largest |a - b| over all nodes.
double max_abs_diff(const Field& a, const Field& b);
double max_abs(const Field& a);

/// Trapezoid (= rectangle, periodic) quadrature of the samples.
double integrate(const Field& u);
/// (dx * sum u^2)^{1/2}
double l2_norm(const Field& u);

/// Field from a callable of x.
template <class F>
Field sample(const Grid& g, F&& f) {
    Field out(g);
    for (int j = 0; j < g.n(); ++j) out[j] = f(g.x(j));
    return out;
}

} // namespace bolab
