#pragma once

#include <array>
#include <optional>
#include <vector>

#include "bolab/grid.hpp"
#include "bolab/integrator.hpp"

namespace bolab {

/// Scalars fixing the jump law
///   J(t) = kappa * (-6) * ( t mu1 + t^2 ||u0||_2^2 / 4 ).
struct DecayModel {
    double mu1 = 0.0;
    double l2sq = 0.0;
    double kappa = 0.0;
    std::optional<double> tstar;
};

/// Throws std::invalid_argument for l2sq <= 0.
DecayModel make_decay_model(double mu1, double l2sq, double kappa);

double jump_model(const DecayModel& model, double t);

/// kappa * (-6) * \int_0^t mu(s) ds from sampled momenta (times ascending
/// from 0, trapezoid rule). Covers k >= 1 where mu is not affine.
std::vector<double> jump_model_from_momentum(double kappa, const std::vector<double>& times,
                                             const std::vector<double>& momentum);

/// Regular part of d^j/dxi^j ( exp(-i t xi|xi|) \hat u0 ), j = 0..4, with
/// the derivatives of \hat u0 taken as transforms of (-i x)^m u0. Dirac
/// terms are dropped. The k = 0 entry of `regular` is set to zero; the two
/// one-sided limits at xi = 0 are reported separately.
struct FTerm {
    Spectrum regular;
    cplx right_limit;
    cplx left_limit;
};

/// Throws std::invalid_argument for j outside 0..4, or j >= 3 when \hat u0(0)
/// is not zero within tolerance.
FTerm f_term(int j, double t, const Spectrum& u0_spec);

/// The ten terms of the fourth derivative expansion, in the order
///   E1 -12 t^2 g          E6  32 i t^3 xi^2|xi| g'
///   E2  48 i t^3 xi|xi| g E7 -24 t^2 xi^2 g''
///   E3  16 t^4 xi^4 g     E8 -12 i t sgn(xi) g''
///   E4 -48 t^2 xi g'      E9  -8 i t |xi| g'''
///   E5  (Dirac; zero)     E10 g''''
/// each multiplied by exp(-i t xi|xi|), with g = \hat u0.
std::array<Spectrum, 10> e_terms(double t, const Field& u0);

struct ETermTable {
    double t = 0.0;
    /// ||E_j||_2 = (dxi sum |E_j|^2)^{1/2}; index 4 (E5) is NaN, it is a
    /// Dirac mass rather than an L^2 function.
    std::array<double, 10> norms{};
    /// Right-hand sides built from u0: ||u0||, ||u0''||, ||u0''''||, ...
    std::array<double, 10> majorants{};
    std::array<double, 10> ratios{};
    /// max |sum_{j != 5} E_j - F4| / max |F4| over xi != 0.
    double identity_error = 0.0;
};

/// Throws std::invalid_argument unless \hat u0(0) = 0 within tolerance.
ETermTable e_term_table(double t, const Field& u0);

/// Centered 9-point fourth derivative weights (divide by h^4), sixth order:
/// exact on polynomials of degree <= 9.
inline constexpr std::array<double, 9> kFourthDerivativeStencil{
    7.0 / 240.0, -2.0 / 5.0, 169.0 / 60.0, -122.0 / 15.0, 91.0 / 8.0, -122.0 / 15.0, 169.0 / 60.0, -2.0 / 5.0, 7.0 / 240.0};

struct JumpEstimate {
    double jump = 0.0;            ///< real part of the one-sided third derivative difference
    double imag_residual = 0.0;   ///< |imaginary part|, zero for a Hermitian spectrum
};

/// Jump of d^3/dxi^3 \hat u across xi = 0: 5-point one-sided stencils on
/// each side at steps dxi and 2 dxi, combined by one Richardson step.
/// Throws std::invalid_argument for n < 64 or \hat u(0) != 0.
JumpEstimate jump_estimate(const Spectrum& spec);

struct Calibration {
    double kappa = 0.0;
    double residual = 0.0;        ///< relative residual of the proportional fit
    double mu1 = 0.0;
    std::vector<double> times;
    std::vector<double> jumps;
};

/// Least-squares slope of the free-flow jump J_lin(t) against -6 t mu1.
/// Throws std::invalid_argument when mu1 is zero or the samples are all 0.
Calibration calibrate_kappa(const Field& u0, const std::vector<double>& t_samples);

struct ProbeResult {
    double value = 0.0;
    double error = 0.0;  ///< |trapezoid(h) - trapezoid(2h)| / 3
    int samples = 0;
};

/// \int_0^{tstar} \int x^2 u dx dt from trajectory records. Throws
/// SpanError when fewer than 64 records cover [0, tstar].
ProbeResult second_momentum_probe(const Trajectory& traj, double tstar);

} // namespace bolab
