#include "qdimer/mcwf.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "qdimer/parallel.hpp"

namespace qdimer {

namespace {

// The wave function carries absolute eigenphases E*dt and jumps keep
// re-exciting the full spectral window, so the step floor targets accuracy,
// |E - shift| dt <= 0.9, not mere stability. The propagation happens in the
// drive interaction picture (see McwfPropagator), which removes the dominant
// A*N energy swing; without that gauge, RK4 at the default step loses most of
// the norm per period for N >= 100 even though it is formally stable.
constexpr double kRk4AccuracyRadius = 0.9;

struct SpectralBox {
    double center = 0.0;  // midpoint of the rotating-frame Hamiltonian spectrum
    double radius = 0.0;  // half-range plus dissipative decay margin
};

SpectralBox hamiltonian_box(const ModelParams& params, const DimerOperators& ops) {
    // drive-free Hamiltonian: the drive diagonal is gauged away
    BandedMatrix h(ops.dim, 1, 1);
    h.add_scaled(ops.hop, Complex(-params.tunneling, 0.0));
    h.add_scaled(ops.interaction, Complex(2.0 * params.interaction / params.n_bosons, 0.0));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.dense(), Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues()(0);
    const double hi = solver.eigenvalues()(ops.dim - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> wsolver(ops.jump_sq.dense(), Eigen::EigenvaluesOnly);
    const double decay = 0.5 * (params.gamma / params.n_bosons) * wsolver.eigenvalues().maxCoeff();
    return {0.5 * (lo + hi), 0.5 * (hi - lo) + decay};
}

}  // namespace

Matrix effective_hamiltonian(const ModelParams& params, const DimerOperators& ops, double t) {
    check_dimensions(params, ops);
    Matrix h = hamiltonian_at(params, ops, t);
    h += Complex(0.0, -0.5 * params.gamma / params.n_bosons) * ops.jump_sq.dense();
    return h;
}

int mcwf_steps_per_period(const ModelParams& params, const DimerOperators& ops,
                          const IntegratorConfig& config) {
    int steps = config.requested_steps_per_period();
    if (config.stabilize) {
        const SpectralBox box = hamiltonian_box(params, ops);
        steps = std::max(steps,
                         static_cast<int>(std::ceil(params.period * box.radius / kRk4AccuracyRadius)));
    }
    return steps;
}

McwfPropagator::McwfPropagator(const ModelParams& params, const DimerOperators& ops,
                               const IntegratorConfig& config)
    : params_(params), ops_(ops) {
    check_dimensions(params, ops);
    const SpectralBox box = hamiltonian_box(params, ops);
    energy_shift_ = box.center;
    int steps = config.requested_steps_per_period();
    if (config.stabilize)
        steps = std::max(steps,
                         static_cast<int>(std::ceil(params.period * box.radius / kRk4AccuracyRadius)));
    steps_per_period_ = steps;
    dt_ = params.period / steps_per_period_;
    rate_ = params.gamma / params.n_bosons;

    hermitian_h0_ = BandedMatrix(ops.dim, 1, 1);
    hermitian_h0_.add_scaled(ops.hop, Complex(-params.tunneling, 0.0));
    hermitian_h0_.add_scaled(ops.interaction, Complex(2.0 * params.interaction / params.n_bosons, 0.0));

    // rotating-frame core: H0 - shift - (i/2) rate V'V, without the drive
    // diagonal; the gauge attaches a phase e^{2 i alpha(t) off} per band offset
    const int band = std::min(2, ops.dim - 1);
    core_ = BandedMatrix(ops.dim, band, band);
    core_.add_scaled(hermitian_h0_, Complex(1.0, 0.0));
    core_.add_scaled(ops.jump_sq, Complex(0.0, -0.5 * rate_));
    std::vector<double> shift(static_cast<size_t>(ops.dim), -energy_shift_);
    core_.add_scaled(BandedMatrix::from_diagonal(shift), Complex(1.0, 0.0));

    drive_diag_.resize(static_cast<size_t>(ops.dim));
    for (int i = 0; i < ops.dim; ++i) drive_diag_[static_cast<size_t>(i)] = ops.imbalance(i, i).real();

    k1_.resize(ops.dim);
    k2_.resize(ops.dim);
    k3_.resize(ops.dim);
    k4_.resize(ops.dim);
    stage_.resize(ops.dim);
    work_.resize(ops.dim);
}

double McwfPropagator::drive_gauge_angle(double t) const {
    // alpha(t) = integral of eps; vanishes at every period boundary
    const double omega = params_.omega();
    return params_.drive_amplitude / omega * (1.0 - std::cos(omega * t));
}

TrajectoryState McwfPropagator::make_trajectory(const Vector& psi0, std::uint64_t master_seed,
                                                std::uint64_t trajectory_index) const {
    if (psi0.size() != ops_.dim) throw std::invalid_argument("make_trajectory: psi0 dimension mismatch");
    TrajectoryState state;
    state.psi = psi0 / psi0.norm();
    state.time = 0.0;
    state.norm_sq = 1.0;
    state.rng = RngStream(master_seed, trajectory_index);
    state.threshold = state.rng.next_open_closed();
    return state;
}

void McwfPropagator::apply_h_eff(const Vector& psi, double t, Vector& out) const {
    // out = -i H'(t) psi in the drive interaction picture: every band offset
    // of the core picks up the gauge phase e^{2 i alpha(t) off}; the real
    // spectral shift folded into the core only rotates the global phase.
    const double alpha = drive_gauge_angle(t);
    const Complex unit_phase = std::polar(1.0, 2.0 * alpha);
    const int dim = ops_.dim;
    const Complex* x = psi.data();
    Complex* y = out.data();
    for (int i = 0; i < dim; ++i) y[i] = Complex(0.0, 0.0);
    Complex phase = std::polar(1.0, -2.0 * alpha * core_.lower());
    for (int off = -core_.lower(); off <= core_.upper(); ++off) {
        const Complex* d = core_.diagonal(off);
        const int len = core_.diagonal_length(off);
        const int row0 = off >= 0 ? 0 : -off;
        const Complex* xs = x + row0 + off;
        Complex* ys = y + row0;
        for (int u = 0; u < len; ++u) ys[u] += phase * d[u] * xs[u];
        phase *= unit_phase;
    }
    const Complex minus_i(0.0, -1.0);
    for (int i = 0; i < dim; ++i) y[i] *= minus_i;
}

void McwfPropagator::step(TrajectoryState& state) {
    const double h = dt_;
    const double t = state.time;
    apply_h_eff(state.psi, t, k1_);
    stage_ = state.psi + (h / 2) * k1_;
    apply_h_eff(stage_, t + h / 2, k2_);
    stage_ = state.psi + (h / 2) * k2_;
    apply_h_eff(stage_, t + h / 2, k3_);
    stage_ = state.psi + h * k3_;
    apply_h_eff(stage_, t + h, k4_);
    state.psi += (h / 6) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    state.time = t + h;
    state.norm_sq = state.psi.squaredNorm();
    if (!std::isfinite(state.norm_sq))
        throw NumericalError("MCWF trajectory diverged at t = " + std::to_string(state.time));

    if (rate_ > 0.0 && state.norm_sq <= state.threshold) {
        // apply the gauge-dressed jump operator V' = e^{i a D} V e^{-i a D}
        const double alpha = drive_gauge_angle(state.time);
        const Complex unit_phase = std::polar(1.0, 2.0 * alpha);
        const int dim = ops_.dim;
        const Complex* x = state.psi.data();
        Complex* y = work_.data();
        for (int i = 0; i < dim; ++i) y[i] = Complex(0.0, 0.0);
        Complex phase = std::polar(1.0, -2.0 * alpha * ops_.jump.lower());
        for (int off = -ops_.jump.lower(); off <= ops_.jump.upper(); ++off) {
            const Complex* d = ops_.jump.diagonal(off);
            const int len = ops_.jump.diagonal_length(off);
            const int row0 = off >= 0 ? 0 : -off;
            const Complex* xs = x + row0 + off;
            Complex* ys = y + row0;
            for (int u = 0; u < len; ++u) ys[u] += phase * d[u] * xs[u];
            phase *= unit_phase;
        }
        const double jumped_norm = work_.norm();
        if (!(jumped_norm > 0.0))
            throw NumericalError("MCWF jump hit a dark state exactly at the threshold (|V psi| = 0)");
        state.psi = work_ / jumped_norm;
        state.norm_sq = 1.0;
        state.threshold = state.rng.next_open_closed();
        ++state.jump_count;
    }
}

void McwfPropagator::advance(TrajectoryState& state, long n_steps) {
    for (long s = 0; s < n_steps; ++s) step(state);
}

ObservableRecord McwfPropagator::observe(const TrajectoryState& state, long period_index) const {
    const Vector psi = lab_frame(state);
    ObservableRecord rec;
    rec.period_index = period_index;
    const double norm_sq = psi.squaredNorm();
    rec.site1_population = ops_.site1_count.expectation(psi).real() / norm_sq;
    double energy = hermitian_h0_.expectation(psi).real();
    const double eps = params_.drive(state.time);
    if (eps != 0.0) energy += eps * ops_.imbalance.expectation(psi).real();
    rec.energy = energy / norm_sq;
    return rec;
}

Vector McwfPropagator::lab_frame(const TrajectoryState& state) const {
    const double alpha = drive_gauge_angle(state.time);
    Vector psi = state.psi;
    if (std::abs(alpha) > 1e-15) {
        for (int i = 0; i < ops_.dim; ++i)
            psi[i] *= std::polar(1.0, -alpha * drive_diag_[static_cast<size_t>(i)]);
    }
    return psi;
}

EnsembleResult run_ensemble(const ModelParams& params, const DimerOperators& ops, const Vector& psi0,
                            const EnsembleConfig& config) {
    if (config.n_trajectories < 1)
        throw std::invalid_argument("run_ensemble: need at least one trajectory");
    const double period = params.period;
    const auto to_periods = [&](double t, const char* what) {
        const double k = t / period;
        const long n = std::lround(k);
        if (std::abs(k - static_cast<double>(n)) > 1e-9 || n < 0)
            throw std::invalid_argument(std::string("run_ensemble: ") + what +
                                        " must be a non-negative multiple of T");
        return n;
    };
    const long relax_periods = to_periods(config.t_relax, "t_relax");
    const long measure_periods = to_periods(config.t_measure, "t_measure");

    const int m = config.n_trajectories;
    std::vector<std::vector<ObservableRecord>> records(static_cast<size_t>(m));
    std::vector<Matrix> pooled(static_cast<size_t>(m));
    std::vector<long> jumps(static_cast<size_t>(m), 0);
    const long pool_last = std::max<long>(1, std::min<long>(config.rho_pool_periods, measure_periods + 1));

    parallel_for(m, config.workers, [&](int j) {
        McwfPropagator prop(params, ops, config.integrator);
        const long steps = prop.steps_per_period();
        TrajectoryState state =
            prop.make_trajectory(psi0, config.seed, static_cast<std::uint64_t>(j));
        Matrix rho_sum = Matrix::Zero(ops.dim, ops.dim);
        long pooled_count = 0;

        prop.advance(state, relax_periods * steps);
        auto maybe_pool = [&](long periods_left) {
            if (periods_left < pool_last) {
                const Vector unit = state.psi / state.psi.norm();
                rho_sum.noalias() += unit * unit.adjoint();
                ++pooled_count;
            }
        };
        std::vector<ObservableRecord>& recs = records[static_cast<size_t>(j)];
        recs.reserve(static_cast<size_t>(measure_periods));
        maybe_pool(measure_periods);
        for (long p = 1; p <= measure_periods; ++p) {
            prop.advance(state, steps);
            recs.push_back(prop.observe(state, p));
            maybe_pool(measure_periods - p);
        }
        rho_sum /= static_cast<double>(pooled_count);
        pooled[static_cast<size_t>(j)] = std::move(rho_sum);
        jumps[static_cast<size_t>(j)] = state.jump_count;
    });

    EnsembleResult result;
    result.trajectories = std::move(records);
    result.averaged_rho = Matrix::Zero(ops.dim, ops.dim);
    for (int j = 0; j < m; ++j) {  // fixed reduction order
        result.averaged_rho += pooled[static_cast<size_t>(j)];
        result.total_jumps += jumps[static_cast<size_t>(j)];
    }
    result.averaged_rho /= static_cast<double>(m);
    result.final_time = static_cast<double>(relax_periods + measure_periods) * period;
    if (config.keep_trajectory_rho) result.trajectory_rho = std::move(pooled);
    return result;
}

}  // namespace qdimer
