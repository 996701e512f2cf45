#include <doctest.h>

#include "oracles.hpp"
#include "qdimer/analysis.hpp"
#include "qdimer/lindblad.hpp"
#include "qdimer/mcwf.hpp"

using namespace qdimer;

TEST_CASE("effective Hamiltonian reduces to H at gamma = 0 and decays otherwise") {
    ModelParams params;
    params.interaction = 0.15;
    params.n_bosons = 7;
    const auto ops = build_operators(params.n_bosons);

    params.gamma = 0.0;
    CHECK((effective_hamiltonian(params, ops, 0.7) - hamiltonian_at(params, ops, 0.7))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    params.gamma = 0.1;
    const Matrix heff = effective_hamiltonian(params, ops, 0.7);
    // imaginary parts of the spectrum must be non-positive: (H - H')/2i <= 0
    const Matrix anti = (heff - Matrix(heff.adjoint())) / Complex(0.0, 2.0);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(anti, Eigen::EigenvaluesOnly);
    CHECK(solver.eigenvalues().maxCoeff() <= 1e-12);  // decay only

    // matches the hand-assembled 3x3 from the sector operators at N=2
    ModelParams small = params;
    small.n_bosons = 2;
    const auto ops2 = build_operators(2);
    const auto ref = oracle::sector_operators(2);
    const Matrix expected =
        -small.tunneling * ref.hop + (2.0 * small.interaction / 2.0) * ref.interaction +
        Complex(0.0, -0.5 * small.gamma / 2.0) * (ref.jump.adjoint() * ref.jump);
    CHECK((effective_hamiltonian(small, ops2, 0.0) - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("gamma = 0 trajectories are norm-preserving, jump-free and unitary") {
    ModelParams params;
    params.interaction = 0.3;
    params.gamma = 0.0;
    params.n_bosons = 12;
    const auto ops = build_operators(params.n_bosons);
    McwfPropagator prop(params, ops);

    Vector psi0 = Vector::Zero(ops.dim);
    psi0[3] = Complex(0.6, 0.0);
    psi0[9] = Complex(0.0, 0.8);
    auto traj = prop.make_trajectory(psi0, 99, 0);
    prop.advance(traj, prop.steps_per_period());
    CHECK(traj.jump_count == 0);
    // only RK4's O((E dt)^6) contraction of the fastest modes remains
    CHECK(traj.norm_sq <= 1.0 + 1e-12);
    CHECK(traj.norm_sq > 1.0 - 1e-4);

    // overlap with a dense-exponential reference on a 16x finer midpoint grid
    Vector ref = psi0 / psi0.norm();
    const int refine = 16;
    const long steps = static_cast<long>(prop.steps_per_period()) * refine;
    const double dt = prop.dt() / refine;
    for (long s = 0; s < steps; ++s) {
        const Matrix h = hamiltonian_at(params, ops, (s + 0.5) * dt);
        ref = oracle::unitary_evolve(h, ref, dt);
    }
    const double overlap = std::abs(ref.dot(traj.psi)) / traj.psi.norm();
    CHECK(overlap > 1.0 - 1e-8);
}

TEST_CASE("gamma = 0 norm conservation is tight for a small undriven system") {
    ModelParams params;
    params.interaction = 0.3;
    params.gamma = 0.0;
    params.drive_amplitude = 0.0;
    params.n_bosons = 4;
    const auto ops = build_operators(params.n_bosons);
    McwfPropagator prop(params, ops);
    Vector psi0 = Vector::Ones(ops.dim).cast<Complex>();
    auto traj = prop.make_trajectory(psi0, 1, 0);
    prop.advance(traj, prop.steps_per_period());
    CHECK(traj.jump_count == 0);
    CHECK(std::abs(traj.norm_sq - 1.0) < 1e-10);
}

TEST_CASE("the dark state never jumps") {
    ModelParams params;
    params.interaction = 0.0;
    params.gamma = 0.25;
    params.drive_amplitude = 0.0;
    params.n_bosons = 10;
    const auto ops = build_operators(params.n_bosons);
    McwfPropagator prop(params, ops);
    const Vector sym = coherent_state(params.n_bosons, std::numbers::pi / 2.0, 0.0);
    auto traj = prop.make_trajectory(sym, 7, 3);
    prop.advance(traj, 5L * prop.steps_per_period());
    CHECK(traj.jump_count == 0);
    // no dissipative decay; at gamma = 0.25 a bright state would have lost
    // most of its norm within a period
    CHECK(std::abs(traj.norm_sq - 1.0) < 1e-6);
}

TEST_CASE("norm is non-increasing between jumps") {
    ModelParams params;
    params.interaction = 0.1125;
    params.n_bosons = 9;
    const auto ops = build_operators(params.n_bosons);
    McwfPropagator prop(params, ops);
    Vector psi0 = Vector::Zero(ops.dim);
    psi0[ops.dim - 1] = 1.0;
    auto traj = prop.make_trajectory(psi0, 1234, 0);
    double last = traj.norm_sq;
    long jumps = traj.jump_count;
    for (int s = 0; s < 20000; ++s) {
        prop.step(traj);
        if (traj.jump_count != jumps) {
            jumps = traj.jump_count;  // norm reset by the jump
        } else {
            CHECK(traj.norm_sq <= last + 1e-12);
        }
        last = traj.norm_sq;
    }
    CHECK(jumps > 0);
}

TEST_CASE("identical seeds reproduce identical observable streams") {
    ModelParams params;
    params.interaction = 0.1;
    params.n_bosons = 6;
    const auto ops = build_operators(params.n_bosons);
    Vector psi0 = Vector::Zero(ops.dim);
    psi0[ops.dim - 1] = 1.0;

    EnsembleConfig config;
    config.n_trajectories = 4;
    config.t_relax = 2.0 * params.period;
    config.t_measure = 5.0 * params.period;
    config.seed = 2024;

    config.workers = 1;
    const auto a = run_ensemble(params, ops, psi0, config);
    config.workers = 2;
    const auto b = run_ensemble(params, ops, psi0, config);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (size_t j = 0; j < a.trajectories.size(); ++j) {
        REQUIRE(a.trajectories[j].size() == b.trajectories[j].size());
        for (size_t m = 0; m < a.trajectories[j].size(); ++m) {
            CHECK(a.trajectories[j][m].site1_population == b.trajectories[j][m].site1_population);
            CHECK(a.trajectories[j][m].energy == b.trajectories[j][m].energy);
        }
    }
    CHECK((a.averaged_rho - b.averaged_rho).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalized site population stays within [0, N]") {
    ModelParams params;
    params.interaction = 0.1125;
    params.n_bosons = 8;
    const auto ops = build_operators(params.n_bosons);
    Vector psi0 = Vector::Zero(ops.dim);
    psi0[ops.dim - 1] = 1.0;
    EnsembleConfig config;
    config.n_trajectories = 6;
    config.t_relax = 0.0;
    config.t_measure = 30.0 * params.period;
    config.seed = 5;
    const auto result = run_ensemble(params, ops, psi0, config);
    for (const auto& t : result.trajectories)
        for (const auto& rec : t) {
            CHECK(rec.site1_population >= -1e-12);
            CHECK(rec.site1_population <= params.n_bosons + 1e-12);
        }
}

TEST_CASE("ensemble average approaches the Lindblad solution") {
    ModelParams params;
    params.interaction = 0.1;
    params.n_bosons = 8;
    const auto ops = build_operators(params.n_bosons);
    const double t_final = 20.0 * params.period;

    const auto reference =
        evolve(params, ops, fock_density(ops.dim, ops.dim - 1), IntegratorConfig{}, t_final);

    Vector psi0 = Vector::Zero(ops.dim);
    psi0[ops.dim - 1] = 1.0;
    EnsembleConfig config;
    config.n_trajectories = 240;
    config.t_relax = 0.0;
    config.t_measure = t_final;
    config.seed = 31;
    config.workers = 2;
    config.keep_trajectory_rho = true;
    const auto ensemble = run_ensemble(params, ops, psi0, config);

    auto prefix_distance = [&](int m) {
        Matrix acc = Matrix::Zero(ops.dim, ops.dim);
        for (int j = 0; j < m; ++j) acc += ensemble.trajectory_rho[static_cast<size_t>(j)];
        acc /= static_cast<double>(m);
        return trace_distance(acc, reference.data);
    };
    const double d60 = prefix_distance(60);
    const double d240 = prefix_distance(240);
    CHECK(d240 < 0.1);
    CHECK(d240 < d60);  // quadrupling the ensemble helps
}
