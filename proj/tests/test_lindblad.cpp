#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "qdimer/lindblad.hpp"

using namespace qdimer;

namespace {

ModelParams undriven_two_level() {
    ModelParams p;
    p.interaction = 0.0;
    p.gamma = 0.0;
    p.drive_amplitude = 0.0;
    p.n_bosons = 1;
    return p;
}

}  // namespace

TEST_CASE("rhs of the bare two-level hop Hamiltonian") {
    const ModelParams params = undriven_two_level();
    const auto ops = build_operators(1);
    const Matrix rho = fock_density(2, 0).data;
    const Matrix rhs = lindblad_rhs(params, ops, rho, 0.0);
    CHECK(std::abs(rhs(0, 1) - Complex(0.0, -1.0)) < 1e-14);
    CHECK(std::abs(rhs(1, 0) - Complex(0.0, 1.0)) < 1e-14);
    CHECK(std::abs(rhs(0, 0)) < 1e-14);
    CHECK(std::abs(rhs(1, 1)) < 1e-14);
}

TEST_CASE("rhs is traceless and matches the dense formula") {
    ModelParams params;
    params.interaction = 0.21;
    params.gamma = 0.13;
    params.n_bosons = 11;
    const auto ops = build_operators(params.n_bosons);
    for (unsigned seed : {5u, 6u, 7u}) {
        const Matrix rho = oracle::random_density(ops.dim, seed);
        const double t = 0.37 * seed;
        const Matrix fast = lindblad_rhs(params, ops, rho, t);
        CHECK(std::abs(fast.trace()) < 1e-12);
        const Matrix dense = oracle::dense_lindblad_rhs(params, rho, t);
        CHECK((fast - dense).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("banded rhs equals dense rhs up to N = 32") {
    for (int n : {2, 9, 32}) {
        ModelParams params;
        params.interaction = 0.1125;
        params.n_bosons = n;
        const auto ops = build_operators(n);
        const Matrix rho = oracle::random_density(n + 1, 100u + static_cast<unsigned>(n));
        const Matrix fast = lindblad_rhs(params, ops, rho, 1.234);
        const Matrix dense = oracle::dense_lindblad_rhs(params, rho, 1.234);
        CHECK((fast - dense).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("rhs nearly vanishes on the steady state of the time-averaged generator") {
    ModelParams params;
    params.interaction = 0.08;
    params.gamma = 0.1;
    params.drive_amplitude = 0.0;  // freeze the drive
    params.n_bosons = 6;
    const Matrix gen = oracle::dense_generator(params, 0.0);
    Eigen::ComplexEigenSolver<Matrix> solver(gen, true);
    int best = 0;
    for (int i = 1; i < solver.eigenvalues().size(); ++i)
        if (std::abs(solver.eigenvalues()(i)) < std::abs(solver.eigenvalues()(best))) best = i;
    REQUIRE(std::abs(solver.eigenvalues()(best)) < 1e-10);
    const int dim = params.n_bosons + 1;
    Matrix steady(dim, dim);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r) steady(r, c) = solver.eigenvectors()(r + c * dim, best);
    steady = 0.5 * (steady + steady.adjoint().eval());
    steady /= steady.trace();

    const auto ops = build_operators(params.n_bosons);
    const Matrix rhs = lindblad_rhs(params, ops, steady, 0.0);
    CHECK(rhs.cwiseAbs().maxCoeff() < 1e-9);  // smoke check only
}

TEST_CASE("half Rabi cycle moves all population across the dimer") {
    const ModelParams params = undriven_two_level();
    const auto ops = build_operators(1);
    const auto rho0 = fock_density(2, 0);
    const auto rho = evolve(params, ops, rho0, IntegratorConfig{}, std::numbers::pi / 2.0);
    CHECK(std::abs(rho.data(1, 1).real() - 1.0) < 1e-6);
    CHECK(std::abs(rho.data(0, 0).real()) < 1e-6);
}

TEST_CASE("undriven dissipative dimer relaxes to the dark state") {
    ModelParams params;
    params.interaction = 0.0;
    params.gamma = 0.1;
    params.drive_amplitude = 0.0;
    params.n_bosons = 6;
    const auto ops = build_operators(params.n_bosons);
    const auto rho0 = fock_density(ops.dim, ops.dim - 1);
    const auto rho = evolve(params, ops, rho0, IntegratorConfig{}, 500.0);

    Vector sym(ops.dim);
    std::vector<double> lf(static_cast<size_t>(params.n_bosons) + 1, 0.0);
    for (int k = 1; k <= params.n_bosons; ++k)
        lf[static_cast<size_t>(k)] = lf[static_cast<size_t>(k - 1)] + std::log(k);
    for (int k = 0; k <= params.n_bosons; ++k)
        sym[k] = std::exp(0.5 * (lf[static_cast<size_t>(params.n_bosons)] - lf[static_cast<size_t>(k)] -
                                 lf[static_cast<size_t>(params.n_bosons - k)]) -
                          0.5 * params.n_bosons * std::log(2.0));
    const Matrix dark = sym * sym.adjoint();
    CHECK(trace_distance(rho.data, dark) < 1e-4);
}

TEST_CASE("fixed-step evolution composes exactly") {
    ModelParams params;
    params.interaction = 0.1125;
    params.gamma = 0.1;
    params.n_bosons = 8;
    const auto ops = build_operators(params.n_bosons);
    const auto rho0 = fock_density(ops.dim, ops.dim - 1);

    const auto once = evolve(params, ops, rho0, IntegratorConfig{}, params.period);
    const auto twice_split = evolve(params, ops, once, IntegratorConfig{}, 2.0 * params.period);
    const auto twice_direct = evolve(params, ops, rho0, IntegratorConfig{}, 2.0 * params.period);
    CHECK((twice_split.data - twice_direct.data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trace, Hermiticity and positivity hold along a driven dissipative run") {
    ModelParams params;
    params.interaction = 0.1125;
    params.n_bosons = 16;
    const auto ops = build_operators(params.n_bosons);
    IntegratorConfig config;
    config.transient_periods = 0;
    const auto snapshots = stroboscopic_run(params, ops, fock_density(ops.dim, ops.dim - 1), config, 30);
    for (const auto& snap : snapshots) {
        CHECK(std::abs(snap.data.trace().real() - 1.0) < 1e-6);
        CHECK((snap.data - snap.data.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(snap.data, Eigen::EigenvaluesOnly);
        CHECK(solver.eigenvalues().minCoeff() > -1e-6);
    }
}

TEST_CASE("stroboscopic snapshots converge to a fixed point below the bifurcation") {
    ModelParams params;
    params.interaction = 0.05;
    params.n_bosons = 20;
    const auto ops = build_operators(params.n_bosons);
    IntegratorConfig config;
    config.transient_periods = 250;
    const auto snapshots = stroboscopic_run(params, ops, fock_density(ops.dim, ops.dim - 1), config, 2);
    CHECK(trace_distance(snapshots[0].data, snapshots[1].data) < 1e-6);
}

TEST_CASE("RK4 order: step halving shrinks the error ~16x") {
    ModelParams params;
    params.interaction = 0.2;
    params.gamma = 0.1;
    params.drive_amplitude = 0.0;  // keep the coarse steps inside the stability region
    params.n_bosons = 8;
    const auto ops = build_operators(params.n_bosons);
    const auto rho0 = fock_density(ops.dim, ops.dim - 1);

    auto at_step = [&](double factor) {
        IntegratorConfig config;
        config.dt_factor = factor;
        config.stabilize = false;
        return evolve(params, ops, rho0, config, params.period).data;
    };
    const Matrix coarse = at_step(1.0 / 100.0);
    const Matrix medium = at_step(1.0 / 200.0);
    const Matrix fine = at_step(1.0 / 400.0);
    const double ratio =
        (coarse - medium).cwiseAbs().maxCoeff() / (medium - fine).cwiseAbs().maxCoeff();
    CHECK(ratio > 4.0);
    CHECK(ratio < 64.0);
}

TEST_CASE("evolve validates its inputs") {
    ModelParams params;
    params.n_bosons = 3;
    const auto ops = build_operators(3);
    auto rho = fock_density(4, 0);
    rho.time = 10.0;
    CHECK_THROWS_AS(evolve(params, ops, rho, IntegratorConfig{}, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(stroboscopic_run(params, ops, rho, IntegratorConfig{}, 0), std::invalid_argument);
}

TEST_CASE("steps per period stay at the requested default for small systems") {
    ModelParams params;
    params.interaction = 0.1125;
    params.n_bosons = 50;
    const auto ops = build_operators(params.n_bosons);
    CHECK(effective_steps_per_period(params, ops, IntegratorConfig{}) == 2000);
    params.n_bosons = 250;
    const auto big = build_operators(250);
    CHECK(effective_steps_per_period(params, big, IntegratorConfig{}) > 2000);
}
