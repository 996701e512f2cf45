#include "qdimer/lindblad.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qdimer {

namespace {

constexpr double kRk4StabilityRadius = 2.5;  // conservative; exact imaginary-axis limit is 2*sqrt(2)

double hermitian_spectral_range(const BandedMatrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.dense(), Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return ev(ev.size() - 1) - ev(0);
}

}  // namespace

int IntegratorConfig::requested_steps_per_period() const {
    if (!(dt_factor > 0.0)) throw std::invalid_argument("IntegratorConfig: dt must be positive");
    const int steps = static_cast<int>(std::llround(1.0 / dt_factor));
    return std::max(1, steps);
}

int stability_steps_per_period(const ModelParams& params, const DimerOperators& ops) {
    // The commutator spectrum spans the spectral range of H(t); the widest
    // range over the drive cycle is attained at the drive extremes.
    double range = 0.0;
    for (double eps : {-params.drive_amplitude, 0.0, params.drive_amplitude}) {
        ModelParams frozen = params;
        frozen.drive_amplitude = 0.0;
        BandedMatrix h = hamiltonian_banded(frozen, ops, 0.0);
        std::vector<double> imb(static_cast<size_t>(ops.dim));
        for (int i = 0; i < ops.dim; ++i) imb[static_cast<size_t>(i)] = eps * ops.imbalance(i, i).real();
        h.add_scaled(BandedMatrix::from_diagonal(imb), Complex(1.0, 0.0));
        range = std::max(range, hermitian_spectral_range(h));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> wsolver(ops.jump_sq.dense(), Eigen::EigenvaluesOnly);
    const double dissipative = 2.0 * (params.gamma / params.n_bosons) * wsolver.eigenvalues().maxCoeff();
    const double bound = range + dissipative;
    return static_cast<int>(std::ceil(params.period * bound / kRk4StabilityRadius));
}

int effective_steps_per_period(const ModelParams& params, const DimerOperators& ops,
                               const IntegratorConfig& config) {
    int steps = config.requested_steps_per_period();
    if (config.stabilize) steps = std::max(steps, stability_steps_per_period(params, ops));
    return steps;
}

LindbladPropagator::LindbladPropagator(const ModelParams& params, const DimerOperators& ops,
                                       const IntegratorConfig& config)
    : params_(params), ops_(ops) {
    check_dimensions(params, ops);
    steps_per_period_ = effective_steps_per_period(params, ops, config);
    dt_ = params.period / steps_per_period_;
    rate_ = params.gamma / params.n_bosons;

    const int band = std::min(2, ops.dim - 1);
    core_ = BandedMatrix(ops.dim, band, band);
    core_.add_scaled(ops.hop, Complex(-params.tunneling, 0.0));
    core_.add_scaled(ops.interaction, Complex(2.0 * params.interaction / params.n_bosons, 0.0));
    core_.add_scaled(ops.jump_sq, Complex(0.0, -0.5 * rate_));
    core_adj_ = core_.adjoint();
    jump_adj_ = ops.jump.adjoint();
    drive_diag_.resize(static_cast<size_t>(ops.dim));
    for (int i = 0; i < ops.dim; ++i) drive_diag_[static_cast<size_t>(i)] = ops.imbalance(i, i).real();

    const int dim = ops.dim;
    t1_.resize(dim, dim);
    t2_.resize(dim, dim);
    t3_.resize(dim, dim);
    k1_.resize(dim, dim);
    k2_.resize(dim, dim);
    k3_.resize(dim, dim);
    k4_.resize(dim, dim);
    stage_.resize(dim, dim);
}

void LindbladPropagator::rhs(const Matrix& rho, double t, Matrix& out) const {
    // L(rho) = -i (B rho - rho B') + rate V rho V',  B = H(t) - (i/2) rate V'V.
    // rho is Hermitian along the RK4 stages, so rho B' = (B rho)'; that saves
    // one banded product per evaluation.
    const double eps = params_.drive(t);
    const int dim = ops_.dim;

    core_.left_multiply(rho, t1_);  // B0 rho
    t2_.noalias() = t1_.adjoint();  // rho B0'
    out.resize(dim, dim);
    const Complex minus_i(0.0, -1.0);
    for (int c = 0; c < dim; ++c) {
        const double dc = drive_diag_[static_cast<size_t>(c)];
        const Complex* r = rho.col(c).data();
        const Complex* a = t1_.col(c).data();
        const Complex* b = t2_.col(c).data();
        Complex* o = out.col(c).data();
        for (int rI = 0; rI < dim; ++rI) {
            const double dr = drive_diag_[static_cast<size_t>(rI)];
            o[rI] = minus_i * (a[rI] - b[rI] + eps * (dr - dc) * r[rI]);
        }
    }
    ops_.jump.left_multiply(rho, t1_);   // V rho
    jump_adj_.right_multiply(t1_, t3_);  // V rho V'
    out += rate_ * t3_;
}

void LindbladPropagator::rhs_general(const Matrix& x, double t, Matrix& out) const {
    const double eps = params_.drive(t);
    const int dim = ops_.dim;

    core_.left_multiply(x, t1_);
    core_adj_.right_multiply(x, t2_);
    out.resize(dim, dim);
    const Complex minus_i(0.0, -1.0);
    for (int c = 0; c < dim; ++c) {
        const double dc = drive_diag_[static_cast<size_t>(c)];
        const Complex* r = x.col(c).data();
        const Complex* a = t1_.col(c).data();
        const Complex* b = t2_.col(c).data();
        Complex* o = out.col(c).data();
        for (int rI = 0; rI < dim; ++rI) {
            const double dr = drive_diag_[static_cast<size_t>(rI)];
            o[rI] = minus_i * (a[rI] - b[rI] + eps * (dr - dc) * r[rI]);
        }
    }
    ops_.jump.left_multiply(x, t1_);
    jump_adj_.right_multiply(t1_, t3_);
    out += rate_ * t3_;
}

void LindbladPropagator::step_general(Matrix& x, double t) {
    const double h = dt_;
    rhs_general(x, t, k1_);
    stage_ = x + (h / 2) * k1_;
    rhs_general(stage_, t + h / 2, k2_);
    stage_ = x + (h / 2) * k2_;
    rhs_general(stage_, t + h / 2, k3_);
    stage_ = x + h * k3_;
    rhs_general(stage_, t + h, k4_);
    x += (h / 6) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

void LindbladPropagator::step(Matrix& rho, double t) { step_with(rho, t, dt_); }

void LindbladPropagator::step_with(Matrix& rho, double t, double h) {
    rhs(rho, t, k1_);
    stage_ = rho + (h / 2) * k1_;
    rhs(stage_, t + h / 2, k2_);
    stage_ = rho + (h / 2) * k2_;
    rhs(stage_, t + h / 2, k3_);
    stage_ = rho + h * k3_;
    rhs(stage_, t + h, k4_);
    rho += (h / 6) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    // re-symmetrize to suppress Hermiticity drift
    stage_ = rho.adjoint();
    rho = 0.5 * (rho + stage_);
}

void LindbladPropagator::advance(Matrix& rho, double t0, long n_steps) {
    if (n_steps < 0) throw std::invalid_argument("LindbladPropagator::advance: negative step count");
    for (long s = 0; s < n_steps; ++s) {
        step(rho, t0 + static_cast<double>(s) * dt_);
        if (++steps_done_ % steps_per_period_ == 0) {
            const double norm2 = rho.squaredNorm();
            if (!std::isfinite(norm2) || norm2 > 16.0)
                throw NumericalError("Lindblad propagation diverged (NaN or norm blow-up) at t=" +
                                     std::to_string(t0 + static_cast<double>(s + 1) * dt_));
        }
    }
}

Matrix lindblad_rhs(const ModelParams& params, const DimerOperators& ops, const Matrix& rho, double t) {
    if (rho.rows() != ops.dim || rho.cols() != ops.dim)
        throw std::invalid_argument("lindblad_rhs: rho dimension mismatch");
    LindbladPropagator prop(params, ops);
    Matrix out;
    prop.rhs(rho, t, out);
    return out;
}

DensityMatrix evolve(const ModelParams& params, const DimerOperators& ops, const DensityMatrix& rho0,
                     const IntegratorConfig& config, double t_final) {
    if (t_final < rho0.time) throw std::invalid_argument("evolve: t_final precedes the state time");
    LindbladPropagator prop(params, ops, config);
    const double span = t_final - rho0.time;
    const double steps_exact = span / prop.dt();
    if (steps_exact > 9.0e15) throw NumericalError("evolve: step count overflow");
    long n_steps = std::llround(steps_exact);
    if (std::abs(steps_exact - static_cast<double>(n_steps)) > 1e-9 * (1.0 + steps_exact))
        n_steps = static_cast<long>(std::floor(steps_exact));

    DensityMatrix state = rho0;
    const double trace0 = state.data.trace().real();
    prop.advance(state.data, state.time, n_steps);
    state.time = rho0.time + static_cast<double>(n_steps) * prop.dt();
    if (t_final > state.time + 1e-12 * (1.0 + std::abs(t_final))) {
        prop.step_with(state.data, state.time, t_final - state.time);  // fractional remainder
        state.time = t_final;
    }
    const double drift = std::abs(state.data.trace().real() - trace0);
    if (!(drift < 1e-6))
        throw NumericalError("evolve: trace drift " + std::to_string(drift) + " exceeds 1e-6");
    return state;
}

std::vector<DensityMatrix> stroboscopic_run(const ModelParams& params, const DimerOperators& ops,
                                            const DensityMatrix& rho0, const IntegratorConfig& config,
                                            int n_periods) {
    if (n_periods < 1) throw std::invalid_argument("stroboscopic_run: n_periods must be >= 1");
    LindbladPropagator prop(params, ops, config);
    const long steps = prop.steps_per_period();

    DensityMatrix state = rho0;
    const double trace0 = state.data.trace().real();
    for (int m = 0; m < config.transient_periods; ++m) {
        prop.advance(state.data, state.time, steps);
        state.time += params.period;
    }
    std::vector<DensityMatrix> snapshots;
    snapshots.reserve(static_cast<size_t>(n_periods));
    for (int m = 0; m < n_periods; ++m) {
        prop.advance(state.data, state.time, steps);
        state.time += params.period;
        snapshots.push_back(state);
    }
    if (!(std::abs(state.data.trace().real() - trace0) < 1e-6))
        throw NumericalError("stroboscopic_run: trace drift exceeds 1e-6");
    return snapshots;
}

DensityMatrix fock_density(int dim, int n_site1) {
    if (n_site1 < 0 || n_site1 >= dim) throw std::invalid_argument("fock_density: index out of range");
    DensityMatrix rho;
    rho.data = Matrix::Zero(dim, dim);
    rho.data(n_site1, n_site1) = Complex(1.0, 0.0);
    return rho;
}

double trace_distance(const Matrix& a, const Matrix& b) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a - b, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace qdimer
