#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qdimer {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Numerical breakdown (NaN, trace blow-up, eigensolver failure, ...).
/// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bloch-sphere coordinate singularity: |sin(theta)| fell below the pole guard.
class PoleError : public NumericalError {
public:
    explicit PoleError(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace qdimer
