#pragma once

// Independent reference constructions used by the tests. Everything here is
// built from first principles (full two-mode Fock space, dense linear
// algebra) and must stay decoupled from the banded implementation paths.

#include <vector>

#include "qdimer/model.hpp"
#include "qdimer/types.hpp"

namespace qdimer::oracle {

/// Operators assembled on the full two-mode Fock space truncated at N quanta
/// per mode, then projected onto the total-number-N sector (basis ordered by
/// bosons on site 1).
struct SectorOperators {
    Matrix hop;
    Matrix imbalance;
    Matrix interaction;
    Matrix site1_count;
    Matrix jump;
};

SectorOperators sector_operators(int n_bosons);

/// Dense Lindblad right-hand side straight from the defining formula.
Matrix dense_lindblad_rhs(const ModelParams& params, const Matrix& rho, double t);

/// Dense column-stacked generator matrix of the time-frozen Lindbladian.
Matrix dense_generator(const ModelParams& params, double t);

/// exp(-i H t) psi via dense eigendecomposition of Hermitian H.
Vector unitary_evolve(const Matrix& hamiltonian, const Vector& psi, double t);

/// exp(-i H T) rho exp(+i H T) for time-independent H.
Matrix unitary_conjugation(const Matrix& hamiltonian, const Matrix& rho, double t);

/// Random Hermitian trace-one matrix with a fixed seed.
Matrix random_density(int dim, unsigned seed);

/// Random Hermitian matrix (not normalized).
Matrix random_hermitian(int dim, unsigned seed);

}  // namespace qdimer::oracle
