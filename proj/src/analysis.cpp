#include "qdimer/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qdimer/parallel.hpp"

namespace qdimer {

namespace {

std::vector<double> log_factorials(int n) {
    std::vector<double> lf(static_cast<size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k) lf[static_cast<size_t>(k)] = lf[static_cast<size_t>(k - 1)] + std::log(k);
    return lf;
}

}  // namespace

Vector coherent_state(int n_bosons, double theta, double phi) {
    if (n_bosons < 1) throw std::invalid_argument("coherent_state: N must be positive");
    const int n = n_bosons;
    const auto lf = log_factorials(n);
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    Vector out(n + 1);
    for (int j = 0; j <= n; ++j) {
        double magnitude = 0.0;
        if ((c > 0.0 || j == 0) && (s > 0.0 || j == n)) {
            const double log_binom =
                0.5 * (lf[static_cast<size_t>(n)] - lf[static_cast<size_t>(j)] - lf[static_cast<size_t>(n - j)]);
            const double log_c = j == 0 ? 0.0 : j * std::log(c);
            const double log_s = j == n ? 0.0 : (n - j) * std::log(s);
            magnitude = std::exp(log_binom + log_c + log_s);
        }
        const double arg = phi * (n - j);
        out[j] = Complex(magnitude * std::cos(arg), magnitude * std::sin(arg));
    }
    return out;
}

HusimiGrid husimi(const Matrix& rho, const HusimiGridSpec& spec, int workers) {
    const int dim = static_cast<int>(rho.rows());
    if (rho.cols() != dim || dim < 2) throw std::invalid_argument("husimi: rho must be square, dim >= 2");
    const int n = dim - 1;
    if (spec.n_theta < 2 || spec.n_phi < 2) throw std::invalid_argument("husimi: grid too small");

    HusimiGrid grid;
    grid.theta_grid.resize(static_cast<size_t>(spec.n_theta));
    grid.phi_grid.resize(static_cast<size_t>(spec.n_phi));
    for (int i = 0; i < spec.n_theta; ++i)
        grid.theta_grid[static_cast<size_t>(i)] = (i + 0.5) * std::numbers::pi / spec.n_theta;
    for (int j = 0; j < spec.n_phi; ++j)
        grid.phi_grid[static_cast<size_t>(j)] = j * (2.0 * std::numbers::pi / spec.n_phi);
    grid.values.resize(spec.n_theta, spec.n_phi);

    const auto lf = log_factorials(n);
    // p(theta, phi) = g_0 + 2 Re sum_{k>=1} e^{i k phi} g_k,
    // g_k(theta) = sum_l a_{l+k} a_l rho_{l+k, l}, with the coherent-state
    // amplitudes a_j(theta) real. One O(dim^2) pass per theta row.
    parallel_for(spec.n_theta, workers, [&](int i) {
        const double theta = grid.theta_grid[static_cast<size_t>(i)];
        const double lc = std::log(std::cos(0.5 * theta));
        const double ls = std::log(std::sin(0.5 * theta));
        std::vector<double> amp(static_cast<size_t>(dim));
        for (int j = 0; j <= n; ++j) {
            const double log_binom =
                0.5 * (lf[static_cast<size_t>(n)] - lf[static_cast<size_t>(j)] - lf[static_cast<size_t>(n - j)]);
            amp[static_cast<size_t>(j)] = std::exp(log_binom + j * lc + (n - j) * ls);
        }
        std::vector<Complex> g(static_cast<size_t>(dim));
        for (int k = 0; k <= n; ++k) {
            Complex acc(0.0, 0.0);
            for (int l = 0; l + k <= n; ++l)
                acc += amp[static_cast<size_t>(l + k)] * amp[static_cast<size_t>(l)] * rho(l + k, l);
            g[static_cast<size_t>(k)] = acc;
        }
        for (int j = 0; j < spec.n_phi; ++j) {
            const double phi = grid.phi_grid[static_cast<size_t>(j)];
            const Complex rot(std::cos(phi), std::sin(phi));
            Complex pw = rot;
            double value = g[0].real();
            for (int k = 1; k <= n; ++k) {
                value += 2.0 * (pw * g[static_cast<size_t>(k)]).real();
                pw *= rot;
            }
            grid.values(i, j) = std::max(0.0, value);
        }
    });

    const double peak = grid.values.maxCoeff();
    if (peak > 0.0) grid.values /= peak;
    return grid;
}

BagelMeasure slice_diameter(std::span<const double> slice, std::span<const double> theta,
                            double prominence_fraction) {
    const int n = static_cast<int>(slice.size());
    if (n < 3 || theta.size() != slice.size())
        throw std::invalid_argument("slice_diameter: slice too short or grid mismatch");
    const double top = *std::max_element(slice.begin(), slice.end());
    if (!(top > 0.0)) return {};
    const double threshold = prominence_fraction * top;

    std::vector<int> maxima;
    for (int i = 1; i + 1 < n; ++i)
        if (slice[static_cast<size_t>(i)] > slice[static_cast<size_t>(i - 1)] &&
            slice[static_cast<size_t>(i)] > slice[static_cast<size_t>(i + 1)])
            maxima.push_back(i);
    std::sort(maxima.begin(), maxima.end(),
              [&](int a, int b) { return slice[static_cast<size_t>(a)] > slice[static_cast<size_t>(b)]; });

    // keep a peak only if it rises above the intervening minimum toward an
    // already-kept (higher) peak by the prominence threshold
    std::vector<int> kept;
    for (int candidate : maxima) {
        bool accept = true;
        for (int peak : kept) {
            const int lo = std::min(candidate, peak), hi = std::max(candidate, peak);
            double valley = slice[static_cast<size_t>(lo)];
            for (int i = lo; i <= hi; ++i) valley = std::min(valley, slice[static_cast<size_t>(i)]);
            if (slice[static_cast<size_t>(candidate)] - valley < threshold) {
                accept = false;
                break;
            }
        }
        if (accept) kept.push_back(candidate);
        if (kept.size() == 2) break;
    }

    BagelMeasure out;
    if (kept.size() >= 2) {
        out.diameter = std::abs(theta[static_cast<size_t>(kept[0])] - theta[static_cast<size_t>(kept[1])]);
        out.is_unimodal = false;
    }
    return out;
}

BagelMeasure bagel_diameter(const HusimiGrid& grid, double prominence_fraction) {
    const double target = 0.5 * std::numbers::pi;
    int column = -1;
    for (int j = 0; j < static_cast<int>(grid.phi_grid.size()); ++j)
        if (std::abs(grid.phi_grid[static_cast<size_t>(j)] - target) < 1e-9) {
            column = j;
            break;
        }
    if (column < 0) throw std::invalid_argument("bagel_diameter: no phi gridline at pi/2");
    std::vector<double> slice(static_cast<size_t>(grid.values.rows()));
    for (int i = 0; i < grid.values.rows(); ++i) slice[static_cast<size_t>(i)] = grid.values(i, column);
    return slice_diameter(slice, grid.theta_grid, prominence_fraction);
}

namespace {

struct AffineBox {
    double n_lo = 0.0, n_hi = 0.0, e_lo = 0.0, e_hi = 0.0;
};

std::optional<AffineBox> pooled_box(const std::vector<std::vector<ObservableRecord>>& trajectories,
                                    int n_bosons) {
    AffineBox box;
    bool first = true;
    for (const auto& t : trajectories)
        for (const auto& r : t) {
            const double x = r.site1_population / n_bosons;
            const double y = r.energy / n_bosons;
            if (first) {
                box = {x, x, y, y};
                first = false;
            } else {
                box.n_lo = std::min(box.n_lo, x);
                box.n_hi = std::max(box.n_hi, x);
                box.e_lo = std::min(box.e_lo, y);
                box.e_hi = std::max(box.e_hi, y);
            }
        }
    if (first) return std::nullopt;
    if (box.n_hi - box.n_lo < 1e-12 || box.e_hi - box.e_lo < 1e-12) return std::nullopt;
    return box;
}

}  // namespace

std::optional<RotationAnalysis> rotation_numbers(
    const std::vector<std::vector<ObservableRecord>>& trajectories, int n_bosons,
    int histogram_bins) {
    const auto box = pooled_box(trajectories, n_bosons);
    if (!box) return std::nullopt;
    const auto remap_x = [&](double n) {
        return -1.0 + 2.0 * (n / n_bosons - box->n_lo) / (box->n_hi - box->n_lo);
    };
    const auto remap_y = [&](double e) {
        return -1.0 + 2.0 * (e / n_bosons - box->e_lo) / (box->e_hi - box->e_lo);
    };

    double cx = 0.0, cy = 0.0;
    long count = 0;
    for (const auto& t : trajectories)
        for (const auto& r : t) {
            cx += remap_x(r.site1_population);
            cy += remap_y(r.energy);
            ++count;
        }
    cx /= static_cast<double>(count);
    cy /= static_cast<double>(count);

    RotationAnalysis out;
    out.histogram.assign(static_cast<size_t>(histogram_bins), 0.0);
    Complex resultant(0.0, 0.0);
    long omega_count = 0;
    out.per_trajectory.resize(trajectories.size());
    for (size_t t = 0; t < trajectories.size(); ++t) {
        const auto& recs = trajectories[t];
        auto& rot = out.per_trajectory[t];
        rot.reserve(recs.size());
        double prev_angle = 0.0;
        for (size_t m = 0; m < recs.size(); ++m) {
            const double angle =
                std::atan2(remap_y(recs[m].energy) - cy, remap_x(recs[m].site1_population) - cx);
            if (m > 0) {
                double omega = (angle - prev_angle) / (2.0 * std::numbers::pi);
                omega -= std::floor(omega);  // mod 1
                rot.push_back({recs[m].period_index, angle, omega});
                int bin = static_cast<int>(omega * histogram_bins);
                bin = std::clamp(bin, 0, histogram_bins - 1);
                out.histogram[static_cast<size_t>(bin)] += 1.0;
                resultant += Complex(std::cos(2.0 * std::numbers::pi * omega),
                                     std::sin(2.0 * std::numbers::pi * omega));
                ++omega_count;
            } else {
                rot.push_back({recs[m].period_index, angle, 0.0});
            }
            prev_angle = angle;
        }
    }
    if (omega_count == 0) return std::nullopt;

    double mean = std::atan2(resultant.imag(), resultant.real()) / (2.0 * std::numbers::pi);
    if (mean < 0.0) mean += 1.0;
    out.mean_omega = mean;
    const auto mode_it = std::max_element(out.histogram.begin(), out.histogram.end());
    out.mode_omega =
        (static_cast<double>(mode_it - out.histogram.begin()) + 0.5) / histogram_bins;
    return out;
}

std::optional<RotationAnalysis> rotation_numbers(std::span<const ObservableRecord> records,
                                                 int n_bosons, int histogram_bins) {
    if (records.size() < 2) throw std::invalid_argument("rotation_numbers: need at least 2 records");
    std::vector<std::vector<ObservableRecord>> wrapped(1);
    wrapped[0].assign(records.begin(), records.end());
    return rotation_numbers(wrapped, n_bosons, histogram_bins);
}

Histogram2D observable_histogram(const std::vector<std::vector<ObservableRecord>>& trajectories,
                                 int n_bosons, int n_bins_x, int n_bins_y) {
    Histogram2D h;
    const auto box = pooled_box(trajectories, n_bosons);
    if (!box) throw std::invalid_argument("observable_histogram: degenerate or empty cloud");
    h.x_min = box->n_lo;
    h.x_max = box->n_hi;
    h.y_min = box->e_lo;
    h.y_max = box->e_hi;
    h.counts = RealMatrix::Zero(n_bins_x, n_bins_y);
    for (const auto& t : trajectories)
        for (const auto& r : t) {
            const double x = r.site1_population / n_bosons;
            const double y = r.energy / n_bosons;
            int bx = static_cast<int>((x - h.x_min) / (h.x_max - h.x_min) * n_bins_x);
            int by = static_cast<int>((y - h.y_min) / (h.y_max - h.y_min) * n_bins_y);
            bx = std::clamp(bx, 0, n_bins_x - 1);
            by = std::clamp(by, 0, n_bins_y - 1);
            h.counts(bx, by) += 1.0;
        }
    return h;
}

int angular_lobe_count(const std::vector<std::vector<ObservableRecord>>& trajectories, int n_bosons,
                       int bins, double prominence_fraction) {
    const auto analysis = rotation_numbers(trajectories, n_bosons);
    if (!analysis) return 0;
    std::vector<double> circular(static_cast<size_t>(bins), 0.0);
    for (const auto& t : analysis->per_trajectory)
        for (const auto& r : t) {
            double frac = r.angle / (2.0 * std::numbers::pi);
            frac -= std::floor(frac);
            int b = std::clamp(static_cast<int>(frac * bins), 0, bins - 1);
            circular[static_cast<size_t>(b)] += 1.0;
        }
    const double top = *std::max_element(circular.begin(), circular.end());
    if (!(top > 0.0)) return 0;
    const double threshold = prominence_fraction * top;

    std::vector<int> maxima;
    for (int i = 0; i < bins; ++i) {
        const double left = circular[static_cast<size_t>((i + bins - 1) % bins)];
        const double right = circular[static_cast<size_t>((i + 1) % bins)];
        const double v = circular[static_cast<size_t>(i)];
        if (v > left && v >= right) maxima.push_back(i);
    }
    if (maxima.empty()) return 0;
    std::sort(maxima.begin(), maxima.end(), [&](int a, int b) {
        return circular[static_cast<size_t>(a)] > circular[static_cast<size_t>(b)];
    });

    // circular topographic prominence: a lobe must rise above the higher of
    // its two key saddles (minima toward the nearest higher kept peak in each
    // direction); shoulder bumps of a bigger lobe get rejected
    std::vector<int> kept{maxima.front()};
    for (size_t m = 1; m < maxima.size(); ++m) {
        const int candidate = maxima[m];
        auto saddle = [&](int direction) {
            double valley = circular[static_cast<size_t>(candidate)];
            for (int s = 1; s < bins; ++s) {
                const int i = ((candidate + direction * s) % bins + bins) % bins;
                if (std::find(kept.begin(), kept.end(), i) != kept.end()) break;
                valley = std::min(valley, circular[static_cast<size_t>(i)]);
            }
            return valley;
        };
        const double key_saddle = std::max(saddle(+1), saddle(-1));
        if (circular[static_cast<size_t>(candidate)] - key_saddle >= threshold)
            kept.push_back(candidate);
    }
    return static_cast<int>(kept.size());
}

std::vector<QuantumBifurcationColumn> quantum_bifurcation_diagram(
    const ModelParams& base, const std::vector<double>& u_values,
    const QuantumBifurcationConfig& config) {
    if (u_values.empty()) throw std::invalid_argument("quantum_bifurcation_diagram: empty U grid");
    std::vector<QuantumBifurcationColumn> columns(u_values.size());
    parallel_for(static_cast<int>(u_values.size()), config.workers, [&](int i) {
        QuantumBifurcationColumn col;
        col.u = u_values[static_cast<size_t>(i)];
        ModelParams params = base;
        params.interaction = col.u;
        try {
            const auto ops = build_operators(params.n_bosons);
            col.weights.assign(static_cast<size_t>(ops.dim), 0.0);
            LindbladPropagator prop(params, ops, config.integrator);
            auto rho = fock_density(ops.dim, ops.dim - 1);
            double t = 0.0;
            for (int m = 0; m < config.integrator.transient_periods; ++m) {
                prop.advance(rho.data, t, prop.steps_per_period());
                t += params.period;
            }
            for (int m = 0; m < config.record_periods; ++m) {
                prop.advance(rho.data, t, prop.steps_per_period());
                t += params.period;
                for (int k = 0; k < ops.dim; ++k)
                    col.weights[static_cast<size_t>(k)] += std::max(0.0, rho.data(k, k).real());
            }
            const double peak = *std::max_element(col.weights.begin(), col.weights.end());
            if (peak > 0.0)
                for (auto& w : col.weights) w /= peak;
        } catch (const NumericalError& err) {
            col.failed = true;
            col.error = err.what();
        }
        columns[static_cast<size_t>(i)] = std::move(col);
    });
    return columns;
}

}  // namespace qdimer
