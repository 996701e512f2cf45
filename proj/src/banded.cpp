#include "qdimer/banded.hpp"

#include <cmath>

namespace qdimer {

BandedMatrix::BandedMatrix(int dim, int lower, int upper)
    : dim_(dim), lower_(lower), upper_(upper), diags_(lower + upper + 1) {
    if (dim < 1 || lower < 0 || upper < 0 || lower >= dim || upper >= dim)
        throw std::invalid_argument("BandedMatrix: bad shape");
    for (int off = -lower_; off <= upper_; ++off)
        diags_[off + lower_].assign(static_cast<size_t>(dim_ - std::abs(off)), Complex(0.0, 0.0));
}

Complex BandedMatrix::operator()(int i, int j) const {
    int off = j - i;
    if (off < -lower_ || off > upper_) return {0.0, 0.0};
    int t = off >= 0 ? i : j;
    return diags_[off + lower_][static_cast<size_t>(t)];
}

Complex& BandedMatrix::entry(int i, int offset) {
    int t = offset >= 0 ? i : i + offset;
    return diags_[offset + lower_][static_cast<size_t>(t)];
}

void BandedMatrix::apply(const Complex* x, Complex* y) const {
    for (int i = 0; i < dim_; ++i) y[i] = Complex(0.0, 0.0);
    apply_add(x, y);
}

void BandedMatrix::apply_add(const Complex* x, Complex* y) const {
    for (int off = -lower_; off <= upper_; ++off) {
        const Complex* d = diags_[off + lower_].data();
        const int len = dim_ - std::abs(off);
        const int row0 = off >= 0 ? 0 : -off;
        const Complex* xs = x + row0 + off;
        Complex* ys = y + row0;
        for (int t = 0; t < len; ++t) ys[t] += d[t] * xs[t];
    }
}

void BandedMatrix::apply(const Vector& x, Vector& y) const {
    y.resize(dim_);
    apply(x.data(), y.data());
}

void BandedMatrix::left_multiply(const Matrix& x, Matrix& out) const {
    const int cols = static_cast<int>(x.cols());
    out.resize(dim_, cols);
    for (int c = 0; c < cols; ++c) apply(x.col(c).data(), out.col(c).data());
}

void BandedMatrix::right_multiply(const Matrix& x, Matrix& out) const {
    // (x A).col(j) = sum_off A(j-off, j) x.col(j-off)
    const int rows = static_cast<int>(x.rows());
    out.setZero(rows, dim_);
    for (int off = -lower_; off <= upper_; ++off) {
        const Complex* d = diags_[off + lower_].data();
        const int len = dim_ - std::abs(off);
        const int t0 = 0;
        for (int t = t0; t < len; ++t) {
            const int row = off >= 0 ? t : t - off;
            const int col = row + off;
            const Complex a = d[t];
            const Complex* xs = x.col(row).data();
            Complex* os = out.col(col).data();
            for (int r = 0; r < rows; ++r) os[r] += xs[r] * a;
        }
    }
}

BandedMatrix BandedMatrix::adjoint() const {
    BandedMatrix out(dim_, upper_, lower_);
    for (int off = -lower_; off <= upper_; ++off) {
        const int len = dim_ - std::abs(off);
        for (int t = 0; t < len; ++t) {
            const int row = off >= 0 ? t : t - off;
            out.entry(row + off, -off) = std::conj(diags_[off + lower_][static_cast<size_t>(t)]);
        }
    }
    return out;
}

Matrix BandedMatrix::dense() const {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (int off = -lower_; off <= upper_; ++off) {
        const int len = dim_ - std::abs(off);
        for (int t = 0; t < len; ++t) {
            const int row = off >= 0 ? t : t - off;
            out(row, row + off) = diags_[off + lower_][static_cast<size_t>(t)];
        }
    }
    return out;
}

Complex BandedMatrix::expectation(const Vector& x) const {
    Complex acc(0.0, 0.0);
    for (int off = -lower_; off <= upper_; ++off) {
        const Complex* d = diags_[off + lower_].data();
        const int len = dim_ - std::abs(off);
        for (int t = 0; t < len; ++t) {
            const int row = off >= 0 ? t : t - off;
            acc += std::conj(x[row]) * d[t] * x[row + off];
        }
    }
    return acc;
}

BandedMatrix& BandedMatrix::operator*=(Complex factor) {
    for (auto& d : diags_)
        for (auto& v : d) v *= factor;
    return *this;
}

void BandedMatrix::add_scaled(const BandedMatrix& other, Complex factor) {
    if (other.dim_ != dim_) throw std::invalid_argument("BandedMatrix::add_scaled: dimension mismatch");
    if (other.lower_ > lower_ || other.upper_ > upper_) {
        BandedMatrix widened(dim_, std::max(lower_, other.lower_), std::max(upper_, other.upper_));
        for (int off = -lower_; off <= upper_; ++off) {
            const int len = dim_ - std::abs(off);
            for (int t = 0; t < len; ++t)
                widened.diags_[off + widened.lower_][static_cast<size_t>(t)] =
                    diags_[off + lower_][static_cast<size_t>(t)];
        }
        *this = std::move(widened);
    }
    for (int off = -other.lower_; off <= other.upper_; ++off) {
        const int len = dim_ - std::abs(off);
        for (int t = 0; t < len; ++t)
            diags_[off + lower_][static_cast<size_t>(t)] +=
                factor * other.diags_[off + other.lower_][static_cast<size_t>(t)];
    }
}

BandedMatrix BandedMatrix::product(const BandedMatrix& a, const BandedMatrix& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("BandedMatrix::product: dimension mismatch");
    const int dim = a.dim_;
    BandedMatrix out(dim, std::min(dim - 1, a.lower_ + b.lower_), std::min(dim - 1, a.upper_ + b.upper_));
    for (int i = 0; i < dim; ++i) {
        for (int off = -out.lower_; off <= out.upper_; ++off) {
            const int j = i + off;
            if (j < 0 || j >= dim) continue;
            Complex acc(0.0, 0.0);
            const int k0 = std::max({0, i - a.lower_, j - b.upper_});
            const int k1 = std::min({dim - 1, i + a.upper_, j + b.lower_});
            for (int k = k0; k <= k1; ++k) acc += a(i, k) * b(k, j);
            if (acc != Complex(0.0, 0.0)) out.entry(i, off) = acc;
        }
    }
    return out;
}

BandedMatrix BandedMatrix::from_diagonal(const std::vector<double>& d) {
    BandedMatrix out(static_cast<int>(d.size()), 0, 0);
    for (int i = 0; i < out.dim_; ++i) out.entry(i, 0) = Complex(d[static_cast<size_t>(i)], 0.0);
    return out;
}

}  // namespace qdimer
