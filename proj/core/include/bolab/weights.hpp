#pragma once

#include <utility>

#include "bolab/grid.hpp"

namespace bolab {

/// Bounded surrogate for <x> = (1 + x^2)^{1/2}.
///
/// w(x) = <x> for |x| <= cap, w(x) = 2 cap for |x| >= 3 cap, and on the blend
/// region a quintic Hermite interpolant matching value, slope and curvature
/// at both ends (C^2 overall). Construct through make_weight_spec(), which
/// checks the slope cap numerically.
struct WeightSpec {
    double cap;
    /// Measured maxima over a dense sample, recorded at construction.
    double max_slope;
    double max_x_slope_ratio; ///< max of x w'(x) / w(x)
};

/// Throws std::invalid_argument if cap <= 0 or the blend violates
/// 0 <= w' <= 1 or x w' <= 3 w.
WeightSpec make_weight_spec(double cap);

double truncated_weight(const WeightSpec& spec, double x);
double truncated_weight_slope(const WeightSpec& spec, double x);
double truncated_weight_curvature(const WeightSpec& spec, double x);

struct NormReport {
    double s = 0.0;
    double r = 0.0;
    double hs_norm = 0.0;
    double weight_norm = 0.0;
    double z_norm = 0.0;
    double trusted_window = 0.0;
    /// False when the field fails the contamination guard; weight_norm is
    /// then not a statement about the line problem.
    bool weight_reliable = true;
    double boundary_ratio = 0.0;
};

/// Half-width of the window |x| <= L/4 in which decay quantities are trusted.
inline double trusted_window(const Grid& g) { return 0.25 * g.length(); }

inline constexpr double kContaminationLimit = 1e-9;

/// H^s norm spectrally, |x|^r weighted L^2 norm over the trusted window.
NormReport z_norm(const Field& u, double s, double r);

/// ||w_N^power u||_2 over the whole grid, power in {1, 2, 3}.
double weighted_l2_truncated(const Field& u, const WeightSpec& spec, int power);

/// ||<x>^power u||_2 over the trusted window.
double bracket_weighted_l2(const Field& u, int power);

struct TailFit {
    double amplitude = 0.0;
    double exponent = 0.0;
    double residual = 0.0;
    int points = 0;
    bool reliable = false;
};

inline constexpr double kTailResidualLimit = 0.05;

/// Least-squares fit of log|u| = log C - q log|x| over nodes with x in
/// [window.first, window.second], sampled at 8 points per octave of |x|.
/// The window must not contain x = 0. Throws std::invalid_argument when fewer
/// than 8 sample points remain. When a sample falls under the noise floor or
/// the residual exceeds kTailResidualLimit the fit is flagged unreliable and
/// amplitude is reported as 0.
TailFit tail_amplitude(const Field& u, std::pair<double, double> window);

/// Amplitude C of C/|x|^exponent with the exponent held fixed.
double tail_amplitude_fixed(const Field& u, std::pair<double, double> window, double exponent);

/// max |u| over the outer 5% of the domain divided by max |u|; 0 for u == 0.
double boundary_contamination(const Field& u);

} // namespace bolab
