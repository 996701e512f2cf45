#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qdimer/lindblad.hpp"
#include "qdimer/mcwf.hpp"
#include "qdimer/types.hpp"

namespace qdimer {

/// Generalized SU(2) coherent state in the |j> = (j bosons on site 1) basis:
///   c_j = sqrt(C(N,j)) cos(theta/2)^j (e^{i phi} sin(theta/2))^{N-j}.
/// Binomials are handled in log space, so N up to several thousand is fine.
Vector coherent_state(int n_bosons, double theta, double phi);

struct HusimiGridSpec {
    int n_theta = 256;  // cell centers on (0, pi)
    int n_phi = 256;    // [0, 2pi), multiple of 4 puts a gridline on pi/2
};

/// p(theta, phi) = <theta,phi| rho |theta,phi>, clipped at 0 and
/// max-normalized to 1.
struct HusimiGrid {
    std::vector<double> theta_grid;
    std::vector<double> phi_grid;
    RealMatrix values;  // (n_theta, n_phi)
};

HusimiGrid husimi(const Matrix& rho, const HusimiGridSpec& spec = {}, int workers = 1);

/// Bagel diameter: distance in theta between the two most prominent maxima
/// of the phi = pi/2 slice; 0 for a unimodal slice.
struct BagelMeasure {
    double diameter = 0.0;
    bool is_unimodal = true;
};

BagelMeasure bagel_diameter(const HusimiGrid& grid, double prominence_fraction = 0.05);
/// Same peak logic on a bare slice (exposed for synthetic-slice tests).
BagelMeasure slice_diameter(std::span<const double> slice, std::span<const double> theta,
                            double prominence_fraction = 0.05);

/// Instantaneous rotation number record: theta_m is the polar angle of the
/// centered, range-normalized (n, e) point; omega_m = (theta_m - theta_{m-1})
/// / 2pi mod 1.
struct RotationRecord {
    long period_index = 0;
    double angle = 0.0;
    double omega = 0.0;
};

struct RotationAnalysis {
    std::vector<std::vector<RotationRecord>> per_trajectory;
    double mean_omega = 0.0;  // circular mean over all pooled omega_m
    double mode_omega = 0.0;  // histogram mode
    std::vector<double> histogram;  // counts over [0,1)
};

/// Pooled rotation analysis: the affine [-1,1]^2 normalization and the center
/// of mass come from the pooled cloud, records are kept per trajectory.
/// Returns nullopt when the cloud is degenerate (fixed-point regime).
std::optional<RotationAnalysis> rotation_numbers(
    const std::vector<std::vector<ObservableRecord>>& trajectories, int n_bosons,
    int histogram_bins = 200);

/// Single-sequence convenience overload.
std::optional<RotationAnalysis> rotation_numbers(std::span<const ObservableRecord> records,
                                                 int n_bosons, int histogram_bins = 200);

/// Pooled 2D histogram of scaled stroboscopic observables (n/N, e/N).
struct Histogram2D {
    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
    RealMatrix counts;
};

Histogram2D observable_histogram(const std::vector<std::vector<ObservableRecord>>& trajectories,
                                 int n_bosons, int n_bins_x = 200, int n_bins_y = 200);

/// Number of angular lobes of the stroboscopic cloud around its center of
/// mass: peaks of the circular angle histogram filtered by topographic
/// prominence (a lobe must rise above its key saddle by the given fraction
/// of the histogram maximum).
int angular_lobe_count(const std::vector<std::vector<ObservableRecord>>& trajectories, int n_bosons,
                       int bins = 60, double prominence_fraction = 0.25);

/// Histogram column of the density-matrix diagonal rho_nn(mT), accumulated
/// over recorded periods at natural (N+1)-value resolution and
/// max-normalized per column.
struct QuantumBifurcationColumn {
    double u = 0.0;
    std::vector<double> weights;  // N+1 entries, bin center k/N
    bool failed = false;
    std::string error;
};

struct QuantumBifurcationConfig {
    int record_periods = 100;
    IntegratorConfig integrator{};
    int workers = 1;
};

std::vector<QuantumBifurcationColumn> quantum_bifurcation_diagram(const ModelParams& base,
                                                                  const std::vector<double>& u_values,
                                                                  const QuantumBifurcationConfig& config);

}  // namespace qdimer
