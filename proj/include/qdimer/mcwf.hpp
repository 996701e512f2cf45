#pragma once

#include <cstdint>
#include <vector>

#include "qdimer/lindblad.hpp"
#include "qdimer/model.hpp"
#include "qdimer/rng.hpp"

namespace qdimer {

/// One stochastic wave function with its jump threshold and random stream.
/// The norm decays under the effective non-Hermitian Hamiltonian; when it
/// drops to the threshold a jump psi -> V psi / |V psi| is applied and the
/// threshold is redrawn uniformly on (0, 1].
struct TrajectoryState {
    Vector psi;
    double time = 0.0;
    double norm_sq = 1.0;
    double threshold = 1.0;
    RngStream rng;
    long jump_count = 0;
};

/// Stroboscopic observables of a normalized wave function.
struct ObservableRecord {
    long period_index = 0;
    double site1_population = 0.0;  // <n1>, in [0, N]
    double energy = 0.0;            // <H(t)> at the section time
};

/// H_eff(t) = H(t) - (i/2)(gamma/N) V'V as a dense matrix. The gamma/N rate
/// is kept on V'V so that ensemble averages solve the master equation with
/// the dissipator normalization of the model.
Matrix effective_hamiltonian(const ModelParams& params, const DimerOperators& ops, double t);

/// Wave-function propagator under H_eff with threshold-triggered jumps.
/// Internally the state is kept in the drive interaction picture (gauge
/// exp(i alpha(t) (n2-n1)) with alpha the integral of the drive), which
/// removes the A*N energy swing that otherwise wrecks fixed-step accuracy at
/// large N. The gauge is the identity at every period boundary, norms and
/// jump statistics are unaffected, and lab_frame() undresses exactly.
class McwfPropagator {
public:
    McwfPropagator(const ModelParams& params, const DimerOperators& ops,
                   const IntegratorConfig& config = {});

    int steps_per_period() const { return steps_per_period_; }
    double dt() const { return dt_; }

    /// Fresh trajectory in the given pure state (times must be multiples of T
    /// between make/observe for frame-free interpretation; the propagator
    /// starts at t = 0 where the gauge is the identity).
    TrajectoryState make_trajectory(const Vector& psi0, std::uint64_t master_seed,
                                    std::uint64_t trajectory_index) const;

    /// One RK4 step; applies a jump if the norm reached the threshold.
    void step(TrajectoryState& state);
    /// Advances n_steps.
    void advance(TrajectoryState& state, long n_steps);

    /// Observables of the current (normalized) wave function, lab frame.
    ObservableRecord observe(const TrajectoryState& state, long period_index) const;

    /// State undressed to the lab frame at its current time.
    Vector lab_frame(const TrajectoryState& state) const;

private:
    void apply_h_eff(const Vector& psi, double t, Vector& out) const;
    double drive_gauge_angle(double t) const;

    ModelParams params_;
    const DimerOperators& ops_;
    int steps_per_period_ = 0;
    double dt_ = 0.0;
    double rate_ = 0.0;
    double energy_shift_ = 0.0;  // real spectral centering; gauge, norm-neutral
    BandedMatrix core_;          // -J hop + (2U/N) inter - shift - (i/2) rate V'V
    BandedMatrix hermitian_h0_;  // -J hop + (2U/N) inter (for energies)
    std::vector<double> drive_diag_;
    Vector k1_, k2_, k3_, k4_, stage_, work_;
};

/// MCWF stability floor can differ from the density-matrix one (the spectrum
/// is centered by a real shift), so expose it separately.
int mcwf_steps_per_period(const ModelParams& params, const DimerOperators& ops,
                          const IntegratorConfig& config);

struct EnsembleConfig {
    int n_trajectories = 100;
    double t_relax = 0.0;       // multiple of T
    double t_measure = 0.0;     // multiple of T; one record per period boundary
    std::uint64_t seed = 1;
    int workers = 1;
    IntegratorConfig integrator{};
    int rho_pool_periods = 1;   // stroboscopic snapshots pooled into the density estimate
    bool keep_trajectory_rho = false;  // retain per-trajectory pooled projectors
};

struct EnsembleResult {
    std::vector<std::vector<ObservableRecord>> trajectories;  // index = trajectory
    Matrix averaged_rho;     // (1/M) sum |psi><psi| pooled over the last rho_pool_periods
    std::vector<Matrix> trajectory_rho;  // filled when keep_trajectory_rho is set
    double final_time = 0.0;
    long total_jumps = 0;
};

/// Runs n_trajectories independent quantum-jump trajectories from psi0:
/// t_relax of relaxation, then one ObservableRecord per period of t_measure.
/// Deterministic for a fixed seed regardless of worker count.
EnsembleResult run_ensemble(const ModelParams& params, const DimerOperators& ops, const Vector& psi0,
                            const EnsembleConfig& config);

}  // namespace qdimer
