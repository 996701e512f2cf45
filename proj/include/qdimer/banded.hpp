#pragma once

#include <vector>

#include "qdimer/types.hpp"

namespace qdimer {

/// Square complex matrix stored by diagonals, for operators with a small
/// bandwidth (the dimer operators are tridiagonal, V'V is pentadiagonal).
/// Matrix-vector and matrix-matrix products cost O(bandwidth * dim * width)
/// instead of O(dim^2 * width).
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int dim, int lower, int upper);

    int dim() const { return dim_; }
    int lower() const { return lower_; }
    int upper() const { return upper_; }

    /// Element (i, j); zero outside the band. Bounds are the caller's problem.
    Complex operator()(int i, int j) const;
    /// Mutable access to the stored diagonal entry (i, i+offset).
    Complex& entry(int i, int offset);

    /// Pointer to the diagonal with the given offset; entry t corresponds to
    /// row (offset >= 0 ? t : t - offset), column row + offset.
    const Complex* diagonal(int offset) const { return diags_[offset + lower_].data(); }
    int diagonal_length(int offset) const { return dim_ - std::abs(offset); }

    void apply(const Complex* x, Complex* y) const;         // y  = A x
    void apply_add(const Complex* x, Complex* y) const;     // y += A x
    void apply(const Vector& x, Vector& y) const;

    void left_multiply(const Matrix& x, Matrix& out) const;   // out = A x
    void right_multiply(const Matrix& x, Matrix& out) const;  // out = x A

    BandedMatrix adjoint() const;
    Matrix dense() const;

    /// <x|A|x>, without normalization.
    Complex expectation(const Vector& x) const;

    BandedMatrix& operator*=(Complex factor);
    /// this += factor * other; the band is widened as needed.
    void add_scaled(const BandedMatrix& other, Complex factor);

    /// A * B as a banded matrix (bandwidths add).
    static BandedMatrix product(const BandedMatrix& a, const BandedMatrix& b);
    static BandedMatrix from_diagonal(const std::vector<double>& d);

private:
    int dim_ = 0;
    int lower_ = 0;
    int upper_ = 0;
    std::vector<std::vector<Complex>> diags_;  // index offset + lower_
};

}  // namespace qdimer
