#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bolab/grid.hpp"
#include "bolab/weights.hpp"

namespace bolab {

/// Keep fraction for the degree-p product u^p with p = 2k + 2: 2 / (p + 1).
/// Gives the 2/3 rule for k = 0.
double default_dealias_fraction(int k);

struct BOParams {
    int k = 0;                 ///< nonlinearity u^{2k+1} u_x; k = 0 is Benjamin-Ono
    double dt = 2e-3;          ///< step magnitude; direction follows sign(t_end)
    double t_end = 0.0;
    std::vector<double> snapshot_times;
    double dealias_fraction = 2.0 / 3.0;
    bool nonlinear = true;     ///< false evolves the free group only
    int record_stride = 1;     ///< invariant record every this many steps
    /// Boundary ratio above which evolve() aborts with ContaminationError.
    double contamination_limit = kContaminationLimit;
    /// Guard applied to u0. Continuation runs starting from an evolved state
    /// may relax it to contamination_limit.
    double initial_contamination_limit = kContaminationLimit;
};

struct InvariantRecord {
    double t = 0.0;
    double i1 = 0.0;            ///< \int u dx
    double l2 = 0.0;            ///< ||u||_2
    double momentum = 0.0;      ///< \int x u dx
    double hamiltonian = 0.0;   ///< \int (u H u_x / 2 + u^3 / 6) dx
    double boundary_ratio = 0.0;
    double second_moment = 0.0; ///< \int x^2 u dx
    double power_integral = 0.0;///< ||u||_{2k+2}^{2k+2}
};

struct Snapshot {
    double t;
    Field u;
};

struct Trajectory {
    BOParams params;
    std::vector<Snapshot> snapshots;   ///< strictly increasing in t
    std::vector<InvariantRecord> records;

    /// Snapshot at exactly time t; throws std::out_of_range otherwise.
    const Field& at(double t) const;
};

/// -u^{2k+1} u_x in conservative form -(u^{2k+2})_x / (2k+2), dealiased.
/// Throws InstabilityError if the power overflows.
Field nonlinear_term(const Field& u, int k, double dealias_fraction);

struct SpectralState {
    double t;
    Spectrum u_hat;
};

/// One integrating-factor RK4 step of size dt (may be negative or zero).
SpectralState step_ifrk4(const SpectralState& state, double dt, const BOParams& params);

/// Integrate from 0 to params.t_end, landing exactly on 0, t_end and every
/// snapshot time. Throws InstabilityError, ContaminationError, or
/// std::invalid_argument for snapshot times outside [min(0,t_end), max(0,t_end)].
Trajectory evolve(const Field& u0, const BOParams& params);

InvariantRecord invariants(double t, const Field& u, int k = 0);

/// mu(t) = mu1 + (t/2) ||u0||_2^2.
double momentum_law(double t, double mu1, double l2sq);

/// t* = -4 mu1 / ||u0||_2^2; nullopt when mu1 == 0. Throws for l2sq <= 0.
std::optional<double> tstar_quadratic(double mu1, double l2sq);

struct TStarResult {
    std::optional<double> tstar;
    std::string diagnostic;  ///< empty on success, "span" when no bracket
};

/// Root of \int_0^T ( mu1 + \int_0^t ||u||_{2k+2}^{2k+2} dt' / (2k+2) ) dt
/// from the trajectory records. Throws SpanError when the records do not
/// start at t = 0 or hold fewer than two samples.
TStarResult tstar_general(const Trajectory& traj, int k);

/// Same root, from explicit series (times ascending from 0).
TStarResult tstar_from_series(const std::vector<double>& times, const std::vector<double>& power_integrals,
                              double mu1, int k);

} // namespace bolab
