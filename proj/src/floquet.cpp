#include "qdimer/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qdimer/parallel.hpp"

namespace qdimer {

Matrix build_floquet_map(const ModelParams& params, const DimerOperators& ops,
                         const FloquetConfig& config) {
    check_dimensions(params, ops);
    if (params.n_bosons > config.max_bosons)
        throw std::invalid_argument("build_floquet_map: N exceeds the configured dense cap (" +
                                    std::to_string(config.max_bosons) + "); raise max_bosons to override");
    const int dim = ops.dim;
    const long super_dim = static_cast<long>(dim) * dim;
    Matrix map(super_dim, super_dim);

    // Column of P for basis |j><k| with j <= k; the flow commutes with the
    // adjoint, so the column for |k><j| is the conjugated transpose image.
    std::vector<std::pair<int, int>> basis;
    basis.reserve(static_cast<size_t>(dim) * (dim + 1) / 2);
    for (int k = 0; k < dim; ++k)
        for (int j = 0; j <= k; ++j) basis.emplace_back(j, k);

    const int chunks = std::max(1, config.workers);
    parallel_for(chunks, config.workers, [&](int chunk) {
        LindbladPropagator prop(params, ops, config.integrator);
        Matrix x(dim, dim);
        for (int b = chunk; b < static_cast<int>(basis.size()); b += chunks) {
            const auto [j, k] = basis[static_cast<size_t>(b)];
            x.setZero();
            x(j, k) = Complex(1.0, 0.0);
            for (int s = 0; s < prop.steps_per_period(); ++s)
                prop.step_general(x, s * prop.dt());
            if (!std::isfinite(x.squaredNorm()))
                throw NumericalError("build_floquet_map: column propagation diverged");
            const long col_jk = j + static_cast<long>(k) * dim;
            for (int cc = 0; cc < dim; ++cc)
                for (int rr = 0; rr < dim; ++rr)
                    map(rr + static_cast<long>(cc) * dim, col_jk) = x(rr, cc);
            if (j != k) {
                const long col_kj = k + static_cast<long>(j) * dim;
                for (int cc = 0; cc < dim; ++cc)
                    for (int rr = 0; rr < dim; ++rr)
                        map(rr + static_cast<long>(cc) * dim, col_kj) = std::conj(x(cc, rr));
            }
        }
    });
    return map;
}

FloquetSpectrum floquet_spectrum(const Matrix& map) {
    Eigen::ComplexEigenSolver<Matrix> solver(map, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalError("floquet_spectrum: eigensolver failed");

    FloquetSpectrum spectrum;
    const auto& ev = solver.eigenvalues();
    spectrum.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(spectrum.eigenvalues.begin(), spectrum.eigenvalues.end(),
              [](const Complex& a, const Complex& b) { return std::abs(a) > std::abs(b); });

    const Complex mu1 = spectrum.eigenvalues.front();
    if (std::abs(mu1 - Complex(1.0, 0.0)) > 1e-6)
        throw NumericalError("floquet_spectrum: leading eigenvalue is not 1 (got modulus " +
                             std::to_string(std::abs(mu1)) + ")");
    if (spectrum.eigenvalues.size() > 1) {
        const Complex mu2 = spectrum.eigenvalues[1];
        spectrum.gap = 1.0 - std::abs(mu2);
        double phase = std::arg(mu2);
        if (phase < 0.0) phase += 2.0 * std::numbers::pi;
        spectrum.slow_pair_phase = phase;
    }
    return spectrum;
}

std::vector<GapRow> gap_vs_N(const ModelParams& base, const std::vector<int>& boson_numbers,
                             const FloquetConfig& config) {
    std::vector<GapRow> rows;
    rows.reserve(boson_numbers.size());
    for (int n : boson_numbers) {
        ModelParams params = base;
        params.n_bosons = n;
        const auto ops = build_operators(n);
        const Matrix map = build_floquet_map(params, ops, config);
        const FloquetSpectrum spectrum = floquet_spectrum(map);
        GapRow row;
        row.n_bosons = n;
        row.u = params.interaction;
        row.gap = spectrum.gap;
        row.slow_pair_phase = spectrum.slow_pair_phase;
        row.relaxation_time = spectrum.gap > 0.0 ? 1.0 / spectrum.gap
                                                 : std::numeric_limits<double>::infinity();
        rows.push_back(row);
    }
    return rows;
}

Matrix stationary_state(const Matrix& map) {
    Eigen::ComplexEigenSolver<Matrix> solver(map, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) throw NumericalError("stationary_state: eigensolver failed");
    const auto& ev = solver.eigenvalues();
    int best = 0;
    for (int i = 1; i < ev.size(); ++i)
        if (std::abs(ev(i) - Complex(1.0, 0.0)) < std::abs(ev(best) - Complex(1.0, 0.0))) best = i;
    const int dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(map.rows()))));
    Matrix rho(dim, dim);
    const auto vec = solver.eigenvectors().col(best);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r) rho(r, c) = vec(r + static_cast<long>(c) * dim);
    rho = 0.5 * (rho + rho.adjoint().eval());
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-12) throw NumericalError("stationary_state: traceless leading eigenmatrix");
    rho /= tr;
    return rho;
}

}  // namespace qdimer
