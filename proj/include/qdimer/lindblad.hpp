#pragma once

#include <vector>

#include "qdimer/model.hpp"

namespace qdimer {

/// Fixed-step RK4 settings. dt defaults to 5e-4 * T; the number of steps per
/// period is rounded so stroboscopic times land exactly on multiples of T.
/// When the requested step would be outside the RK4 stability region for the
/// generator's spectral range (which grows like A*N), the step count is
/// raised automatically; effective_steps_per_period reports the value used.
struct IntegratorConfig {
    double dt_factor = 5e-4;      // dt = dt_factor * T
    int transient_periods = 100;
    bool stabilize = true;

    int requested_steps_per_period() const;
};

/// Density matrix with its clock. Hermiticity is re-imposed after every RK4
/// step; trace and positivity are monitored, not enforced.
struct DensityMatrix {
    Matrix data;
    double time = 0.0;
};

/// rho' = L(rho) = -i [H(t), rho] + D(rho). Hermitian and traceless output.
Matrix lindblad_rhs(const ModelParams& params, const DimerOperators& ops, const Matrix& rho, double t);

/// Reusable propagator: banded RHS kernels plus RK4 workspaces.
class LindbladPropagator {
public:
    LindbladPropagator(const ModelParams& params, const DimerOperators& ops,
                       const IntegratorConfig& config = {});

    int steps_per_period() const { return steps_per_period_; }
    double dt() const { return dt_; }

    /// out = L(rho) at time t, valid for Hermitian rho only (uses
    /// rho B' = (B rho)' to drop one banded product).
    void rhs(const Matrix& rho, double t, Matrix& out) const;
    /// out = L(x) for arbitrary x (Floquet map columns are not Hermitian).
    void rhs_general(const Matrix& x, double t, Matrix& out) const;

    /// One RK4 step from time t, with re-symmetrization.
    void step(Matrix& rho, double t);
    /// Same, with an explicit step size (used for a fractional final step).
    void step_with(Matrix& rho, double t, double h);
    /// RK4 step without the Hermitian shortcut or re-symmetrization.
    void step_general(Matrix& x, double t);

    /// Advances exactly n_steps, starting at time t0. NaN/blow-up aborts.
    void advance(Matrix& rho, double t0, long n_steps);

private:
    ModelParams params_;
    const DimerOperators& ops_;
    int steps_per_period_ = 0;
    double dt_ = 0.0;
    BandedMatrix core_;       // -J hop + (2U/N) interaction - (i/2)(gamma/N) V'V
    BandedMatrix core_adj_;
    BandedMatrix jump_adj_;
    std::vector<double> drive_diag_;  // imbalance diagonal
    double rate_ = 0.0;               // gamma / N
    mutable Matrix t1_, t2_, t3_;     // product workspaces
    Matrix k1_, k2_, k3_, k4_, stage_;
    long steps_done_ = 0;
};

/// Integrates rho0 to t_final (>= rho0.time) with fixed-step RK4.
/// Throws NumericalError on NaN or trace drift beyond 1e-6.
DensityMatrix evolve(const ModelParams& params, const DimerOperators& ops, const DensityMatrix& rho0,
                     const IntegratorConfig& config, double t_final);

/// Stroboscopic snapshots rho(mT), m = 1..n_periods, after discarding
/// config.transient_periods periods.
std::vector<DensityMatrix> stroboscopic_run(const ModelParams& params, const DimerOperators& ops,
                                            const DensityMatrix& rho0, const IntegratorConfig& config,
                                            int n_periods);

/// Steps per period actually used for the given system.
int effective_steps_per_period(const ModelParams& params, const DimerOperators& ops,
                               const IntegratorConfig& config);

/// Largest stable step count bound: spectral range of H over the drive cycle
/// plus a dissipative margin, against the RK4 stability radius.
int stability_steps_per_period(const ModelParams& params, const DimerOperators& ops);

/// |n><n| with all bosons on site 1 (the default initial condition for
/// asymptotic studies), or any other pure Fock state.
DensityMatrix fock_density(int dim, int n_site1);

double trace_distance(const Matrix& a, const Matrix& b);

}  // namespace qdimer
