#pragma once

#include <array>
#include <optional>
#include <vector>

#include "qdimer/model.hpp"
#include "qdimer/types.hpp"

namespace qdimer {

/// Point on the Bloch sphere in polar coordinates; theta in (0, pi).
struct MeanFieldState {
    double theta = 0.0;
    double phi = 0.0;
    double time = 0.0;
};

/// Spin expectation values on the sphere of radius 1/2.
struct SpinState {
    double sx = 0.0, sy = 0.0, sz = 0.0;

    double norm_sq() const { return sx * sx + sy * sy + sz * sz; }
    static SpinState from_angles(double theta, double phi);
    MeanFieldState to_angles(double time = 0.0) const;
};

struct MeanFieldConfig {
    double dt_factor = 5e-4;     // dt = dt_factor * T
    int transient_periods = 100;
    double pole_guard = 1e-6;    // abort when |sin(theta)| falls below this

    int steps_per_period() const;
};

/// Classical spin equations of motion (the mean-field limit written in the
/// dissipative normalization used for the reference bifurcation diagrams):
///   dSx/dt =  2 eps(t) Sy - 8 U Sz Sy + 8 g (Sy^2 + Sz^2)
///   dSy/dt = -2 eps(t) Sx + 8 U Sx Sz + 2 J Sz - 8 g Sx Sy
///   dSz/dt = -2 J Sy - 8 g Sx Sz
/// S^2 is an exact constant of motion.
SpinState spin_rhs(const ModelParams& params, const SpinState& s, double t);

/// The same flow restricted to the sphere:
///   theta' = 2 J sin(phi) + 4 g cos(phi) cos(theta)
///   phi'   = 2 J cos(phi) cos(theta)/sin(theta) - 2 eps(t) + 4 U cos(theta)
///            - 4 g sin(phi)/sin(theta)
/// Throws PoleError when |sin(theta)| < pole_guard.
std::array<double, 2> bloch_rhs(const ModelParams& params, const MeanFieldState& x, double t,
                                double pole_guard = 1e-6);

/// Fixed-step RK4 over the angles; advances through n_periods drive periods.
MeanFieldState integrate_bloch(const ModelParams& params, MeanFieldState x,
                               const MeanFieldConfig& config, int n_periods);

/// Fixed-step RK4 for the Cartesian spin equations (no pole issues).
SpinState integrate_spin(const ModelParams& params, SpinState s, double t0,
                         const MeanFieldConfig& config, int n_periods);

/// Iterates of the period-T stroboscopic map after discarding transients.
std::vector<MeanFieldState> stroboscopic_map(const ModelParams& params, const MeanFieldState& x0,
                                             const MeanFieldConfig& config, int n_iterates);

/// Newton refinement of a fixed point of the stroboscopic map.
/// Converges to residual < 1e-10 or throws NumericalError.
MeanFieldState find_fixed_point(const ModelParams& params, const MeanFieldConfig& config,
                                const MeanFieldState& guess);

/// Eigenvalues of the finite-difference Jacobian of the period map at x_star,
/// ordered by descending modulus.
std::array<Complex, 2> ns_multipliers(const ModelParams& params, const MeanFieldConfig& config,
                                      const MeanFieldState& x_star);

/// Histogram column of n(mT)/N = (1 + cos theta(mT))/2, max-normalized to 1.
struct BifurcationColumn {
    double u = 0.0;
    std::vector<double> counts;   // histogram_bins entries over [0, 1]
    bool failed = false;          // pole abort at this U
    std::string error;
};

struct BifurcationGrid {
    std::vector<double> u_values;
    int record_periods = 1000;
    int histogram_bins = 400;
};

/// One column per U; pole aborts are reported in the column, not thrown.
std::vector<BifurcationColumn> classical_bifurcation_diagram(const ModelParams& base,
                                                             const BifurcationGrid& grid,
                                                             const MeanFieldConfig& config,
                                                             int workers = 1);

/// Minimal period of the recorded orbit under the stroboscopic map
/// (sup-distance tolerance, phi compared modulo 2*pi); 0 when no period
/// up to max_period fits.
int orbit_period(const std::vector<MeanFieldState>& iterates, double tolerance = 1e-4,
                 int max_period = 24);

/// n(mT)/N from the polar angle.
inline double site1_fraction(double theta) { return 0.5 * (1.0 + std::cos(theta)); }

}  // namespace qdimer
