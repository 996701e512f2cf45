#include "qdimer/model.hpp"

#include <cmath>

namespace qdimer {

void ModelParams::validate() const {
    if (n_bosons < 1) throw std::invalid_argument("ModelParams: N must be a positive integer");
    if (!(period > 0.0)) throw std::invalid_argument("ModelParams: T must be positive");
    if (gamma < 0.0) throw std::invalid_argument("ModelParams: gamma must be non-negative");
}

DimerOperators build_operators(int n_bosons) {
    if (n_bosons < 1) throw std::invalid_argument("build_operators: N must be a positive integer");
    const int n = n_bosons;
    const int dim = n + 1;

    DimerOperators ops;
    ops.dim = dim;
    ops.hop = BandedMatrix(dim, 1, 1);
    ops.imbalance = BandedMatrix(dim, 0, 0);
    ops.interaction = BandedMatrix(dim, 0, 0);
    ops.site1_count = BandedMatrix(dim, 0, 0);
    ops.jump = BandedMatrix(dim, 1, 1);

    // |k> holds k bosons on site 1 and n-k on site 2.
    //   b1'b2 |k> = sqrt((k+1)(n-k)) |k+1>
    //   b2'b1 |k> = sqrt(k(n-k+1))   |k-1>
    for (int k = 0; k < dim; ++k) {
        ops.imbalance.entry(k, 0) = Complex(static_cast<double>(n - 2 * k), 0.0);
        ops.site1_count.entry(k, 0) = Complex(static_cast<double>(k), 0.0);
        ops.interaction.entry(k, 0) =
            Complex(static_cast<double>(k) * (k - 1) + static_cast<double>(n - k) * (n - k - 1), 0.0);
        // V = n1 - n2 + b2'b1 - b1'b2
        ops.jump.entry(k, 0) = Complex(static_cast<double>(2 * k - n), 0.0);
        if (k + 1 < dim) {
            const double raise = std::sqrt(static_cast<double>(k + 1) * (n - k));
            ops.hop.entry(k + 1, -1) = Complex(raise, 0.0);  // <k+1| b1'b2 |k>
            ops.hop.entry(k, +1) = Complex(raise, 0.0);      // <k| b2'b1 |k+1>
            ops.jump.entry(k + 1, -1) = Complex(-raise, 0.0);
            ops.jump.entry(k, +1) = Complex(raise, 0.0);
        }
    }
    ops.jump_sq = BandedMatrix::product(ops.jump.adjoint(), ops.jump);
    return ops;
}

void check_dimensions(const ModelParams& params, const DimerOperators& ops) {
    params.validate();
    if (ops.dim != params.n_bosons + 1)
        throw std::invalid_argument("operator dimension does not match params.N + 1");
}

BandedMatrix hamiltonian_banded(const ModelParams& params, const DimerOperators& ops, double t) {
    check_dimensions(params, ops);
    BandedMatrix h(ops.dim, 1, 1);
    h.add_scaled(ops.hop, Complex(-params.tunneling, 0.0));
    h.add_scaled(ops.interaction, Complex(2.0 * params.interaction / params.n_bosons, 0.0));
    h.add_scaled(ops.imbalance, Complex(params.drive(t), 0.0));
    return h;
}

Matrix hamiltonian_at(const ModelParams& params, const DimerOperators& ops, double t) {
    return hamiltonian_banded(params, ops, t).dense();
}

Matrix dissipator_apply(const ModelParams& params, const DimerOperators& ops, const Matrix& rho) {
    check_dimensions(params, ops);
    if (rho.rows() != ops.dim || rho.cols() != ops.dim)
        throw std::invalid_argument("dissipator_apply: rho dimension mismatch");
    const double rate = params.gamma / params.n_bosons;
    Matrix tmp, sandwich, anti;
    ops.jump.left_multiply(rho, tmp);                 // V rho
    ops.jump.adjoint().right_multiply(tmp, sandwich); // V rho V'
    ops.jump_sq.left_multiply(rho, tmp);              // V'V rho
    ops.jump_sq.right_multiply(rho, anti);            // rho V'V
    return rate * (sandwich - 0.5 * (tmp + anti));
}

}  // namespace qdimer
