#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qdimer/analysis.hpp"

using namespace qdimer;

TEST_CASE("coherent state endpoints and normalization") {
    SUBCASE("theta = 0 is the all-on-site-1 Fock state") {
        const Vector c = coherent_state(7, 0.0, 1.1);
        for (int j = 0; j < 7; ++j) CHECK(std::abs(c[j]) == 0.0);
        CHECK(std::abs(c[7] - Complex(1.0, 0.0)) < 1e-15);
    }
    SUBCASE("N = 1 two-level coherent state") {
        const double theta = 1.234, phi = 0.77;
        const Vector c = coherent_state(1, theta, phi);
        CHECK(std::abs(c[0] - std::polar(std::sin(theta / 2), phi)) < 1e-14);
        CHECK(std::abs(c[1] - Complex(std::cos(theta / 2), 0.0)) < 1e-14);
    }
    SUBCASE("unit norm up to N = 500") {
        std::mt19937 gen(3);
        std::uniform_real_distribution<double> theta_dist(0.0, std::numbers::pi);
        std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * std::numbers::pi);
        for (int n : {2, 17, 128, 500})
            for (int k = 0; k < 5; ++k)
                CHECK(std::abs(coherent_state(n, theta_dist(gen), phi_dist(gen)).norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("coherent-state resolution of identity (grid quadrature)") {
    const int grid = 400;
    for (int n : {1, 4, 8}) {
        Matrix acc = Matrix::Zero(n + 1, n + 1);
        const double dtheta = std::numbers::pi / grid;
        const double dphi = 2.0 * std::numbers::pi / grid;
        for (int i = 0; i < grid; ++i) {
            const double theta = (i + 0.5) * dtheta;
            Matrix phi_acc = Matrix::Zero(n + 1, n + 1);
            for (int j = 0; j < grid; ++j) {
                const Vector c = coherent_state(n, theta, j * dphi);
                phi_acc.noalias() += c * c.adjoint();
            }
            acc += std::sin(theta) * phi_acc;
        }
        acc *= (n + 1) / (4.0 * std::numbers::pi) * dtheta * dphi;
        CHECK((acc - Matrix::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff() < 1e-3);
    }
}

TEST_CASE("husimi of a Fock state is the analytic cone") {
    const int n = 20;
    Matrix rho = Matrix::Zero(n + 1, n + 1);
    rho(n, n) = 1.0;  // |N><N|
    const auto grid = husimi(rho, HusimiGridSpec{64, 16});
    for (size_t i = 0; i < grid.theta_grid.size(); ++i) {
        const double expected = std::pow(std::cos(0.5 * grid.theta_grid[i]), 2 * n);
        for (size_t j = 0; j < grid.phi_grid.size(); ++j)
            CHECK(grid.values(static_cast<int>(i), static_cast<int>(j)) ==
                  doctest::Approx(expected / std::pow(std::cos(0.5 * grid.theta_grid[0]), 2 * n))
                      .epsilon(1e-9));
    }
}

TEST_CASE("husimi is max-normalized, non-negative, and matches direct projection") {
    const int dim = 9;
    const Matrix rho = oracle::random_density(dim, 21);
    const auto grid = husimi(rho, HusimiGridSpec{32, 32});
    CHECK(grid.values.maxCoeff() == doctest::Approx(1.0));
    CHECK(grid.values.minCoeff() >= 0.0);

    // spot-check the separable evaluation against <c|rho|c>
    double raw_peak = 0.0;
    RealMatrix direct(32, 32);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            const Vector c = coherent_state(dim - 1, grid.theta_grid[static_cast<size_t>(i)],
                                            grid.phi_grid[static_cast<size_t>(j)]);
            direct(i, j) = std::max(0.0, (c.adjoint() * rho * c)(0, 0).real());
            raw_peak = std::max(raw_peak, direct(i, j));
        }
    direct /= raw_peak;
    CHECK((grid.values - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("bagel diameter of a synthetic two-Gaussian slice") {
    const int n = 256;
    std::vector<double> theta(static_cast<size_t>(n)), slice(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        theta[static_cast<size_t>(i)] = (i + 0.5) * std::numbers::pi / n;
        const double a = theta[static_cast<size_t>(i)] - 1.0;
        const double b = theta[static_cast<size_t>(i)] - 1.6;
        slice[static_cast<size_t>(i)] =
            std::exp(-a * a / (2 * 0.01)) + 0.8 * std::exp(-b * b / (2 * 0.01));
    }
    const auto measure = slice_diameter(slice, theta);
    CHECK(!measure.is_unimodal);
    CHECK(measure.diameter == doctest::Approx(0.6).epsilon(0.03));

    SUBCASE("invariant under positive scaling") {
        std::vector<double> scaled = slice;
        for (auto& v : scaled) v *= 37.5;
        const auto again = slice_diameter(scaled, theta);
        CHECK(again.diameter == measure.diameter);
    }
    SUBCASE("single peak gives D = 0") {
        std::vector<double> single(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double a = theta[static_cast<size_t>(i)] - 1.2;
            single[static_cast<size_t>(i)] = std::exp(-a * a / 0.05);
        }
        const auto uni = slice_diameter(single, theta);
        CHECK(uni.is_unimodal);
        CHECK(uni.diameter == 0.0);
    }
    SUBCASE("grid-noise double peaks below prominence are ignored") {
        std::vector<double> noisy(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double a = theta[static_cast<size_t>(i)] - 1.2;
            noisy[static_cast<size_t>(i)] = std::exp(-a * a / 0.05) * (1.0 + 0.01 * (i % 2));
        }
        CHECK(slice_diameter(noisy, theta).is_unimodal);
    }
}

namespace {

std::vector<std::vector<ObservableRecord>> synthetic_circle(double advance_fraction, int count,
                                                            int n_bosons) {
    std::vector<std::vector<ObservableRecord>> out(1);
    for (int m = 0; m < count; ++m) {
        const double angle = 2.0 * std::numbers::pi * advance_fraction * m;
        ObservableRecord rec;
        rec.period_index = m;
        rec.site1_population = n_bosons * (0.5 + 0.25 * std::cos(angle));
        rec.energy = n_bosons * (-0.3 + 0.4 * std::sin(angle));
        out[0].push_back(rec);
    }
    return out;
}

}  // namespace

TEST_CASE("rotation number of a synthetic uniform rotation") {
    SUBCASE("four-fold symmetric orbit: pointwise exact") {
        // the sampled extremes pin the normalization box symmetrically, so the
        // remapped cloud is an exact circle and every step advances by 1/4
        const auto records = synthetic_circle(0.25, 100, 50);
        const auto analysis = rotation_numbers(records, 50);
        REQUIRE(analysis.has_value());
        for (const auto& r : analysis->per_trajectory[0])
            if (r.period_index > 0) CHECK(std::abs(r.omega - 0.25) < 1e-12);
        CHECK(std::abs(analysis->mean_omega - 0.25) < 1e-12);
    }
    SUBCASE("decagon orbit advancing by 0.3") {
        // range normalization turns the decagon into a slight ellipse; the
        // winding per step wobbles but its circular mean telescopes to 3/10
        const auto records = synthetic_circle(0.3, 200, 50);
        const auto analysis = rotation_numbers(records, 50);
        REQUIRE(analysis.has_value());
        for (const auto& r : analysis->per_trajectory[0])
            if (r.period_index > 0) CHECK(std::abs(r.omega - 0.3) < 0.01);
        // circular mean of the wobbling increments sits within O(spread^2) of 3/10
        CHECK(std::abs(analysis->mean_omega - 0.3) < 1e-3);
        CHECK(std::abs(analysis->mode_omega - 0.3) < 0.01);
    }
}

TEST_CASE("rotation numbers are invariant under pre-applied affine rescaling") {
    auto records = synthetic_circle(0.37, 150, 50);
    const auto base = rotation_numbers(records, 50);
    auto rescaled = records;
    for (auto& rec : rescaled[0]) {
        rec.site1_population = 4.0 * rec.site1_population + 11.0;
        rec.energy = 0.5 * rec.energy - 3.0;
    }
    const auto again = rotation_numbers(rescaled, 50);
    REQUIRE(base.has_value());
    REQUIRE(again.has_value());
    for (size_t m = 0; m < base->per_trajectory[0].size(); ++m)
        CHECK(std::abs(base->per_trajectory[0][m].omega - again->per_trajectory[0][m].omega) < 1e-12);
}

TEST_CASE("degenerate cloud reports the fixed-point regime") {
    std::vector<std::vector<ObservableRecord>> flat(1);
    for (int m = 0; m < 50; ++m) flat[0].push_back({m, 25.0, -0.7});
    CHECK(!rotation_numbers(flat, 50).has_value());
}

TEST_CASE("angular lobe count sees the k-fold structure") {
    // five tight clusters visited in the 3/5 pattern
    std::vector<std::vector<ObservableRecord>> recs(1);
    std::mt19937 gen(5);
    std::normal_distribution<double> noise(0.0, 0.004);
    for (int m = 0; m < 500; ++m) {
        const double angle = 2.0 * std::numbers::pi * (0.6 * m);
        ObservableRecord rec;
        rec.period_index = m;
        rec.site1_population = 50 * (0.5 + 0.2 * std::cos(angle) + noise(gen));
        rec.energy = 50 * (0.1 + 0.3 * std::sin(angle) + noise(gen));
        recs[0].push_back(rec);
    }
    CHECK(angular_lobe_count(recs, 50) == 5);
}

TEST_CASE("quantum bifurcation columns: narrow below the bifurcation") {
    ModelParams base;
    base.interaction = 0.0;
    base.n_bosons = 16;
    QuantumBifurcationConfig config;
    config.record_periods = 40;
    config.integrator.transient_periods = 150;
    config.workers = 2;
    const auto columns = quantum_bifurcation_diagram(base, {0.04}, config);
    REQUIRE(columns.size() == 1);
    REQUIRE(!columns[0].failed);
    CHECK(*std::max_element(columns[0].weights.begin(), columns[0].weights.end()) == 1.0);
    // narrow unimodal column: exactly one local maximum above 5% of the peak
    int peaks = 0;
    const auto& w = columns[0].weights;
    for (size_t k = 1; k + 1 < w.size(); ++k)
        if (w[k] > w[k - 1] && w[k] > w[k + 1] && w[k] > 0.05) ++peaks;
    CHECK(peaks == 1);
}
