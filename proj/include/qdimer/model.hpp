#pragma once

#include <numbers>

#include "qdimer/banded.hpp"
#include "qdimer/types.hpp"

namespace qdimer {

/// Parameters of the periodically rocked open bosonic dimer.
/// Energies are in units of the tunneling amplitude; time in units where
/// the default drive period is 2*pi.
struct ModelParams {
    double tunneling = 1.0;        // J
    double interaction = 0.0;      // U
    double gamma = 0.1;            // dissipative coupling
    double drive_amplitude = 3.4;  // A
    double period = 2.0 * std::numbers::pi;  // T
    int n_bosons = 1;              // N

    double omega() const { return 2.0 * std::numbers::pi / period; }
    /// On-site energy offset eps(t) = A sin(Omega t).
    double drive(double t) const { return drive_amplitude * std::sin(omega() * t); }

    /// Throws std::invalid_argument on N < 1, T <= 0 or gamma < 0.
    void validate() const;
};

/// Fock-sector operators for N bosons on two sites, in the basis |n> labeled
/// by the number of bosons on site 1. Everything is tridiagonal.
struct DimerOperators {
    int dim = 0;              // N + 1
    BandedMatrix hop;         // b1'b2 + b2'b1
    BandedMatrix imbalance;   // n2 - n1 (diagonal)
    BandedMatrix interaction; // sum_g n_g(n_g - 1) (diagonal)
    BandedMatrix site1_count; // n1 (diagonal)
    BandedMatrix jump;        // V = (b1' + b2')(b1 - b2)
    BandedMatrix jump_sq;     // V'V, pentadiagonal, cached for the propagators

    int n_bosons() const { return dim - 1; }
};

/// Builds all sector operators for N >= 1.
DimerOperators build_operators(int n_bosons);

/// H(t) = -J hop + (2U/N) interaction + eps(t) imbalance, as a dense matrix.
/// Throws on params/ops dimension mismatch.
Matrix hamiltonian_at(const ModelParams& params, const DimerOperators& ops, double t);

/// Same Hamiltonian kept in banded form (tridiagonal).
BandedMatrix hamiltonian_banded(const ModelParams& params, const DimerOperators& ops, double t);

/// D(rho) = (gamma/N) (V rho V' - {V'V, rho}/2). Hermitian and traceless.
Matrix dissipator_apply(const ModelParams& params, const DimerOperators& ops, const Matrix& rho);

void check_dimensions(const ModelParams& params, const DimerOperators& ops);

}  // namespace qdimer
