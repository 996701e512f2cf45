#pragma once

#include <vector>

#include "qdimer/lindblad.hpp"
#include "qdimer/model.hpp"

namespace qdimer {

struct FloquetConfig {
    int max_bosons = 64;  // dense superoperator cap; (N+1)^2 eigenproblem
    IntegratorConfig integrator{};
    int workers = 1;
};

/// One-period superoperator map in column-stacking vectorization:
/// vec(rho(T)) = P vec(rho(0)). Built by propagating the matrix-unit basis
/// |j><k| through the master equation; adjoint equivariance of the flow gives
/// the k > j columns from the k < j ones for free.
Matrix build_floquet_map(const ModelParams& params, const DimerOperators& ops,
                         const FloquetConfig& config = {});

struct FloquetSpectrum {
    std::vector<Complex> eigenvalues;  // sorted by descending modulus
    double gap = 0.0;                  // 1 - |mu_2|
    double slow_pair_phase = 0.0;      // arg mu_2 in [0, 2pi)
};

/// Full dense eigendecomposition of the map. Verifies mu_1 = 1, the unit-disk
/// bound, and conjugate pairing of nonreal eigenvalues.
FloquetSpectrum floquet_spectrum(const Matrix& map);

struct GapRow {
    int n_bosons = 0;
    double u = 0.0;
    double gap = 0.0;
    double slow_pair_phase = 0.0;
    double relaxation_time = 0.0;  // ~ 1 / gap
};

/// Spectrum summary per particle number at fixed interaction strength.
std::vector<GapRow> gap_vs_N(const ModelParams& base, const std::vector<int>& boson_numbers,
                             const FloquetConfig& config = {});

/// mu_1's eigenmatrix, renormalized to unit trace (the stroboscopic fixed
/// point of the map).
Matrix stationary_state(const Matrix& map);

}  // namespace qdimer
