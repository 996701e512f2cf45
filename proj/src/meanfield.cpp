#include "qdimer/meanfield.hpp"

#include <algorithm>
#include <cmath>

#include "qdimer/parallel.hpp"

namespace qdimer {

SpinState SpinState::from_angles(double theta, double phi) {
    return {0.5 * std::cos(phi) * std::sin(theta), 0.5 * std::sin(phi) * std::sin(theta),
            0.5 * std::cos(theta)};
}

MeanFieldState SpinState::to_angles(double time) const {
    const double r = std::sqrt(norm_sq());
    MeanFieldState x;
    x.theta = std::acos(std::clamp(sz / r, -1.0, 1.0));
    x.phi = std::atan2(sy, sx);
    if (x.phi < 0) x.phi += 2.0 * std::numbers::pi;
    x.time = time;
    return x;
}

int MeanFieldConfig::steps_per_period() const {
    if (!(dt_factor > 0.0)) throw std::invalid_argument("MeanFieldConfig: dt must be positive");
    return std::max(1, static_cast<int>(std::llround(1.0 / dt_factor)));
}

SpinState spin_rhs(const ModelParams& params, const SpinState& s, double t) {
    const double eps = params.drive(t);
    const double j = params.tunneling, u = params.interaction, g = params.gamma;
    SpinState d;
    d.sx = 2.0 * eps * s.sy - 8.0 * u * s.sz * s.sy + 8.0 * g * (s.sy * s.sy + s.sz * s.sz);
    d.sy = -2.0 * eps * s.sx + 8.0 * u * s.sx * s.sz + 2.0 * j * s.sz - 8.0 * g * s.sx * s.sy;
    d.sz = -2.0 * j * s.sy - 8.0 * g * s.sx * s.sz;
    return d;
}

std::array<double, 2> bloch_rhs(const ModelParams& params, const MeanFieldState& x, double t,
                                double pole_guard) {
    const double sin_t = std::sin(x.theta);
    if (std::abs(sin_t) < pole_guard)
        throw PoleError("bloch_rhs: |sin(theta)| = " + std::to_string(std::abs(sin_t)) +
                        " below pole guard at t = " + std::to_string(t));
    const double cos_t = std::cos(x.theta);
    const double sin_p = std::sin(x.phi), cos_p = std::cos(x.phi);
    const double eps = params.drive(t);
    const double j = params.tunneling, u = params.interaction, g = params.gamma;
    const double dtheta = 2.0 * j * sin_p + 4.0 * g * cos_p * cos_t;
    const double dphi =
        2.0 * j * cos_p * cos_t / sin_t - 2.0 * eps + 4.0 * u * cos_t - 4.0 * g * sin_p / sin_t;
    return {dtheta, dphi};
}

namespace {

void rk4_bloch_step(const ModelParams& params, MeanFieldState& x, double dt, double guard) {
    const auto k1 = bloch_rhs(params, x, x.time, guard);
    MeanFieldState w{x.theta + 0.5 * dt * k1[0], x.phi + 0.5 * dt * k1[1], x.time};
    const auto k2 = bloch_rhs(params, w, x.time + 0.5 * dt, guard);
    w = {x.theta + 0.5 * dt * k2[0], x.phi + 0.5 * dt * k2[1], x.time};
    const auto k3 = bloch_rhs(params, w, x.time + 0.5 * dt, guard);
    w = {x.theta + dt * k3[0], x.phi + dt * k3[1], x.time};
    const auto k4 = bloch_rhs(params, w, x.time + dt, guard);
    x.theta += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    x.phi += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    x.time += dt;
    if (!std::isfinite(x.theta) || !std::isfinite(x.phi))
        throw NumericalError("bloch integration produced NaN");
}

}  // namespace

MeanFieldState integrate_bloch(const ModelParams& params, MeanFieldState x,
                               const MeanFieldConfig& config, int n_periods) {
    params.validate();
    const int steps = config.steps_per_period();
    const double dt = params.period / steps;
    for (long s = 0; s < static_cast<long>(steps) * n_periods; ++s)
        rk4_bloch_step(params, x, dt, config.pole_guard);
    return x;
}

SpinState integrate_spin(const ModelParams& params, SpinState s, double t0,
                         const MeanFieldConfig& config, int n_periods) {
    const int steps = config.steps_per_period();
    const double dt = params.period / steps;
    double t = t0;
    auto add = [](const SpinState& a, const SpinState& b, double f) {
        return SpinState{a.sx + f * b.sx, a.sy + f * b.sy, a.sz + f * b.sz};
    };
    for (long i = 0; i < static_cast<long>(steps) * n_periods; ++i) {
        const SpinState k1 = spin_rhs(params, s, t);
        const SpinState k2 = spin_rhs(params, add(s, k1, dt / 2), t + dt / 2);
        const SpinState k3 = spin_rhs(params, add(s, k2, dt / 2), t + dt / 2);
        const SpinState k4 = spin_rhs(params, add(s, k3, dt), t + dt);
        s.sx += dt / 6 * (k1.sx + 2 * k2.sx + 2 * k3.sx + k4.sx);
        s.sy += dt / 6 * (k1.sy + 2 * k2.sy + 2 * k3.sy + k4.sy);
        s.sz += dt / 6 * (k1.sz + 2 * k2.sz + 2 * k3.sz + k4.sz);
        t += dt;
    }
    return s;
}

std::vector<MeanFieldState> stroboscopic_map(const ModelParams& params, const MeanFieldState& x0,
                                             const MeanFieldConfig& config, int n_iterates) {
    if (n_iterates < 1) throw std::invalid_argument("stroboscopic_map: n_iterates must be >= 1");
    MeanFieldState x = x0;
    x = integrate_bloch(params, x, config, config.transient_periods);
    std::vector<MeanFieldState> out;
    out.reserve(static_cast<size_t>(n_iterates));
    for (int m = 0; m < n_iterates; ++m) {
        x = integrate_bloch(params, x, config, 1);
        out.push_back(x);
    }
    return out;
}

namespace {

/// One application of the period map F starting from drive phase 0.
MeanFieldState period_map(const ModelParams& params, const MeanFieldConfig& config,
                          const MeanFieldState& x) {
    MeanFieldState w = x;
    w.time = 0.0;
    return integrate_bloch(params, w, config, 1);
}

std::array<std::array<double, 2>, 2> map_jacobian(const ModelParams& params,
                                                  const MeanFieldConfig& config,
                                                  const MeanFieldState& x, double h) {
    std::array<std::array<double, 2>, 2> jac{};
    for (int k = 0; k < 2; ++k) {
        MeanFieldState plus = x, minus = x;
        (k == 0 ? plus.theta : plus.phi) += h;
        (k == 0 ? minus.theta : minus.phi) -= h;
        const MeanFieldState fp = period_map(params, config, plus);
        const MeanFieldState fm = period_map(params, config, minus);
        jac[0][k] = (fp.theta - fm.theta) / (2.0 * h);
        jac[1][k] = std::remainder(fp.phi - fm.phi, 2.0 * std::numbers::pi) / (2.0 * h);
    }
    return jac;
}

}  // namespace

MeanFieldState find_fixed_point(const ModelParams& params, const MeanFieldConfig& config,
                                const MeanFieldState& guess) {
    MeanFieldState x = guess;
    const int max_iterations = 60;
    for (int it = 0; it < max_iterations; ++it) {
        const MeanFieldState fx = period_map(params, config, x);
        const double rt = fx.theta - x.theta;
        const double rp = std::remainder(fx.phi - x.phi, 2.0 * std::numbers::pi);
        if (std::hypot(rt, rp) < 1e-12) {
            x.time = 0.0;
            return x;
        }
        auto jac = map_jacobian(params, config, x, 1e-6);
        jac[0][0] -= 1.0;
        jac[1][1] -= 1.0;
        const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if (std::abs(det) < 1e-14) throw NumericalError("find_fixed_point: singular Jacobian");
        x.theta -= (rt * jac[1][1] - rp * jac[0][1]) / det;
        x.phi -= (jac[0][0] * rp - jac[1][0] * rt) / det;
    }
    // accept if the residual still meets the contract
    const MeanFieldState fx = period_map(params, config, x);
    const double res = std::hypot(fx.theta - x.theta,
                                  std::remainder(fx.phi - x.phi, 2.0 * std::numbers::pi));
    if (res < 1e-10) {
        x.time = 0.0;
        return x;
    }
    throw NumericalError("find_fixed_point: no convergence, residual " + std::to_string(res));
}

std::array<Complex, 2> ns_multipliers(const ModelParams& params, const MeanFieldConfig& config,
                                      const MeanFieldState& x_star) {
    const auto jac = map_jacobian(params, config, x_star, 1e-6);
    const double tr = jac[0][0] + jac[1][1];
    const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    const Complex disc = std::sqrt(Complex(tr * tr - 4.0 * det, 0.0));
    Complex l1 = 0.5 * (tr + disc);
    Complex l2 = 0.5 * (tr - disc);
    if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
    return {l1, l2};
}

std::vector<BifurcationColumn> classical_bifurcation_diagram(const ModelParams& base,
                                                             const BifurcationGrid& grid,
                                                             const MeanFieldConfig& config,
                                                             int workers) {
    if (grid.u_values.empty())
        throw std::invalid_argument("classical_bifurcation_diagram: empty U grid");
    std::vector<BifurcationColumn> columns(grid.u_values.size());
    parallel_for(static_cast<int>(grid.u_values.size()), workers, [&](int i) {
        BifurcationColumn col;
        col.u = grid.u_values[static_cast<size_t>(i)];
        col.counts.assign(static_cast<size_t>(grid.histogram_bins), 0.0);
        ModelParams params = base;
        params.interaction = col.u;
        try {
            MeanFieldState x{2.0, 0.0, 0.0};  // default initial state, recorded in run metadata
            x = integrate_bloch(params, x, config, config.transient_periods);
            for (int m = 0; m < grid.record_periods; ++m) {
                x = integrate_bloch(params, x, config, 1);
                const double f = site1_fraction(x.theta);
                int bin = static_cast<int>(f * grid.histogram_bins);
                bin = std::clamp(bin, 0, grid.histogram_bins - 1);
                col.counts[static_cast<size_t>(bin)] += 1.0;
            }
            const double peak = *std::max_element(col.counts.begin(), col.counts.end());
            if (peak > 0.0)
                for (auto& c : col.counts) c /= peak;
        } catch (const NumericalError& err) {
            col.failed = true;
            col.error = err.what();
        }
        columns[static_cast<size_t>(i)] = std::move(col);
    });
    return columns;
}

int orbit_period(const std::vector<MeanFieldState>& iterates, double tolerance, int max_period) {
    const int n = static_cast<int>(iterates.size());
    for (int q = 1; q <= max_period && q < n; ++q) {
        bool matches = true;
        for (int m = 0; m + q < n; ++m) {
            const double dt = iterates[static_cast<size_t>(m + q)].theta - iterates[static_cast<size_t>(m)].theta;
            const double dp = std::remainder(
                iterates[static_cast<size_t>(m + q)].phi - iterates[static_cast<size_t>(m)].phi,
                2.0 * std::numbers::pi);
            if (std::hypot(dt, dp) > tolerance) {
                matches = false;
                break;
            }
        }
        if (matches) return q;
    }
    return 0;
}

}  // namespace qdimer
