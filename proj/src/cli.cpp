#include "qdimer/cli.hpp"

#include <cmath>
#include <cstdio>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdimer/analysis.hpp"
#include "qdimer/floquet.hpp"
#include "qdimer/io.hpp"
#include "qdimer/lindblad.hpp"
#include "qdimer/mcwf.hpp"
#include "qdimer/meanfield.hpp"
#include "qdimer/parallel.hpp"

namespace qdimer {

namespace {

using nlohmann::json;

json to_json(const RunConfig& c) {
    return json{{"schema_version", c.schema_version},
                {"model",
                 {{"tunneling", c.tunneling},
                  {"interaction", c.interaction},
                  {"gamma", c.gamma},
                  {"drive_amplitude", c.drive_amplitude},
                  {"period", c.period},
                  {"n_bosons", c.n_bosons}}},
                {"integrator", {{"dt_factor", c.dt_factor}, {"transient_periods", c.transient_periods}}},
                {"sweep",
                 {{"u_min", c.u_min}, {"u_max", c.u_max}, {"u_step", c.u_step}, {"n_list", c.n_list}}},
                {"ensemble",
                 {{"n_trajectories", c.n_trajectories},
                  {"relax_periods", c.relax_periods},
                  {"measure_periods", c.measure_periods}}},
                {"analysis",
                 {{"husimi_theta", c.husimi_theta},
                  {"husimi_phi", c.husimi_phi},
                  {"record_periods", c.record_periods},
                  {"rho_pool_periods", c.rho_pool_periods},
                  {"histogram_bins", c.histogram_bins},
                  {"poincare_points", c.poincare_points},
                  {"mcwf_threshold_bosons", c.mcwf_threshold_bosons},
                  {"dump_rho", c.dump_rho}}},
                {"execution",
                 {{"seed", c.seed}, {"workers", c.workers}, {"out_dir", c.out_dir}, {"large", c.large}}}};
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != 1)
        throw std::invalid_argument("unsupported config schema_version " +
                                    std::to_string(c.schema_version));
    const auto& m = j.at("model");
    c.tunneling = m.at("tunneling").get<double>();
    c.interaction = m.at("interaction").get<double>();
    c.gamma = m.at("gamma").get<double>();
    c.drive_amplitude = m.at("drive_amplitude").get<double>();
    c.period = m.at("period").get<double>();
    c.n_bosons = m.at("n_bosons").get<int>();
    const auto& i = j.at("integrator");
    c.dt_factor = i.at("dt_factor").get<double>();
    c.transient_periods = i.at("transient_periods").get<int>();
    const auto& s = j.at("sweep");
    c.u_min = s.at("u_min").get<double>();
    c.u_max = s.at("u_max").get<double>();
    c.u_step = s.at("u_step").get<double>();
    c.n_list = s.at("n_list").get<std::vector<int>>();
    const auto& e = j.at("ensemble");
    c.n_trajectories = e.at("n_trajectories").get<int>();
    c.relax_periods = e.at("relax_periods").get<int>();
    c.measure_periods = e.at("measure_periods").get<int>();
    const auto& a = j.at("analysis");
    c.husimi_theta = a.at("husimi_theta").get<int>();
    c.husimi_phi = a.at("husimi_phi").get<int>();
    c.record_periods = a.at("record_periods").get<int>();
    c.rho_pool_periods = a.at("rho_pool_periods").get<int>();
    c.histogram_bins = a.at("histogram_bins").get<int>();
    c.poincare_points = a.at("poincare_points").get<int>();
    c.mcwf_threshold_bosons = a.at("mcwf_threshold_bosons").get<int>();
    c.dump_rho = a.at("dump_rho").get<bool>();
    const auto& x = j.at("execution");
    c.seed = x.at("seed").get<std::uint64_t>();
    c.workers = x.at("workers").get<int>();
    c.out_dir = x.at("out_dir").get<std::string>();
    c.large = x.at("large").get<bool>();
    return c;
}

int resolved_workers(const RunConfig& c) {
    return c.workers > 0 ? c.workers : default_workers();
}

/// Very rough wall-clock estimate (seconds) for a Lindblad run, used to gate
/// expensive requests behind --large.
double lindblad_cost_seconds(const ModelParams& p, const DimerOperators& ops,
                             const IntegratorConfig& icfg, long periods) {
    const double steps = effective_steps_per_period(p, ops, icfg);
    const double flops = 16.0 * 6.0 * static_cast<double>(ops.dim) * ops.dim * 4.0 * steps *
                         static_cast<double>(periods);
    return flops / 4.5e9;
}

double mcwf_cost_seconds(const ModelParams& p, const DimerOperators& ops, const IntegratorConfig& icfg,
                         long periods, int trajectories, int workers) {
    const double steps = mcwf_steps_per_period(p, ops, icfg);
    const double flops = 10.0 * 6.0 * static_cast<double>(ops.dim) * 4.0 * steps *
                         static_cast<double>(periods) * trajectories;
    return flops / 3.0e9 / std::max(1, workers);
}

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require_large(double seconds, bool large_flag, RunWriter& writer) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "estimated run time ~%.0f s", seconds);
    if (seconds > 900.0 && !large_flag)
        throw UsageError(std::string(msg) + "; pass --large to acknowledge");
    if (seconds > 900.0) writer.warn(std::string(msg) + " (--large acknowledged)");
}

// ---------------------------------------------------------------- commands

void cmd_meanfield_sweep(const RunConfig& cfg, RunWriter& writer) {
    MeanFieldConfig mf;
    mf.dt_factor = cfg.dt_factor;
    mf.transient_periods = cfg.transient_periods;
    BifurcationGrid grid;
    grid.u_values = cfg.u_grid();
    grid.record_periods = cfg.record_periods;
    grid.histogram_bins = cfg.histogram_bins;
    const auto columns =
        classical_bifurcation_diagram(cfg.model_params(), grid, mf, resolved_workers(cfg));

    CsvFile csv(writer.register_file("meanfield_bifurcation.csv"),
                {"U", "bin_center", "normalized_count"});
    for (const auto& col : columns) {
        if (col.failed) {
            writer.warn("U=" + std::to_string(col.u) + " aborted: " + col.error);
            continue;
        }
        for (size_t b = 0; b < col.counts.size(); ++b)
            if (col.counts[b] > 0.0)
                csv.row(col.u, (static_cast<double>(b) + 0.5) / grid.histogram_bins, col.counts[b]);
    }
    csv.close();

    if (cfg.poincare_points > 0) {
        CsvFile section(writer.register_file("meanfield_poincare.csv"), {"U", "m", "theta", "phi"});
        for (double u : grid.u_values) {
            ModelParams p = cfg.model_params();
            p.interaction = u;
            try {
                const auto iterates =
                    stroboscopic_map(p, MeanFieldState{2.0, 0.0, 0.0}, mf, cfg.poincare_points);
                for (size_t m = 0; m < iterates.size(); ++m)
                    section.row(u, static_cast<long>(m + 1), iterates[m].theta,
                                std::fmod(iterates[m].phi + 4.0 * std::numbers::pi,
                                          2.0 * std::numbers::pi));
            } catch (const NumericalError& err) {
                writer.warn("poincare U=" + std::to_string(u) + " aborted: " + err.what());
            }
        }
    }
}

void cmd_quantum_bifurcation(const RunConfig& cfg, RunWriter& writer) {
    QuantumBifurcationConfig qcfg;
    qcfg.record_periods = cfg.record_periods;
    qcfg.integrator.dt_factor = cfg.dt_factor;
    qcfg.integrator.transient_periods = cfg.transient_periods;
    qcfg.workers = resolved_workers(cfg);
    const auto u_values = cfg.u_grid();

    ModelParams probe = cfg.model_params();
    const auto ops = build_operators(probe.n_bosons);
    const double estimate =
        lindblad_cost_seconds(probe, ops, qcfg.integrator,
                              static_cast<long>(cfg.transient_periods + cfg.record_periods) *
                                  static_cast<long>(u_values.size())) /
        std::max(1, qcfg.workers);
    require_large(estimate, cfg.large, writer);

    const auto columns = quantum_bifurcation_diagram(cfg.model_params(), u_values, qcfg);
    CsvFile csv(writer.register_file("quantum_bifurcation.csv"),
                {"U", "bin_center", "normalized_count"});
    for (const auto& col : columns) {
        if (col.failed) {
            writer.warn("U=" + std::to_string(col.u) + " aborted: " + col.error);
            continue;
        }
        for (size_t k = 0; k < col.weights.size(); ++k)
            if (col.weights[k] > 0.0)
                csv.row(col.u, static_cast<double>(k) / cfg.n_bosons, col.weights[k]);
    }
    csv.close();

    // single-point runs also stream the raw stroboscopic diagonals
    if (u_values.size() == 1) {
        ModelParams params = cfg.model_params();
        params.interaction = u_values.front();
        const auto ops = build_operators(params.n_bosons);
        IntegratorConfig icfg = qcfg.integrator;
        const auto snapshots = stroboscopic_run(params, ops, fock_density(ops.dim, ops.dim - 1),
                                                icfg, cfg.record_periods);
        CsvFile diag(writer.register_file("strobo_diagonals.csv"), {"m", "n", "value"});
        for (size_t m = 0; m < snapshots.size(); ++m)
            for (int k = 0; k < ops.dim; ++k)
                diag.row(static_cast<long>(m + 1), static_cast<long>(k),
                         snapshots[m].data(k, k).real());
    }
}

/// Asymptotic stroboscopic density matrix: direct integration for small N,
/// quantum-jump sampling (pooled over late periods) for large N.
Matrix asymptotic_density(const RunConfig& cfg, const ModelParams& params, const DimerOperators& ops,
                          RunWriter& writer) {
    IntegratorConfig icfg;
    icfg.dt_factor = cfg.dt_factor;
    icfg.transient_periods = cfg.transient_periods;
    if (params.n_bosons <= cfg.mcwf_threshold_bosons) {
        const double est = lindblad_cost_seconds(params, ops, icfg, cfg.transient_periods + 1);
        require_large(est, cfg.large, writer);
        auto rho = fock_density(ops.dim, ops.dim - 1);
        rho = evolve(params, ops, rho, icfg, cfg.transient_periods * params.period);
        return rho.data;
    }
    EnsembleConfig ecfg;
    ecfg.n_trajectories = cfg.n_trajectories;
    ecfg.t_relax = cfg.relax_periods * params.period;
    ecfg.t_measure = cfg.measure_periods * params.period;
    ecfg.seed = cfg.seed;
    ecfg.workers = resolved_workers(cfg);
    ecfg.integrator = icfg;
    ecfg.rho_pool_periods = cfg.rho_pool_periods;
    const double est = mcwf_cost_seconds(params, ops, icfg, cfg.relax_periods + cfg.measure_periods,
                                         ecfg.n_trajectories, ecfg.workers);
    require_large(est, cfg.large, writer);
    writer.warn("density matrix sampled from " + std::to_string(ecfg.n_trajectories) +
                " quantum trajectories, pooled over " + std::to_string(cfg.rho_pool_periods) +
                " stroboscopic periods");
    Vector psi0 = Vector::Zero(ops.dim);
    psi0[ops.dim - 1] = Complex(1.0, 0.0);
    return run_ensemble(params, ops, psi0, ecfg).averaged_rho;
}

void write_husimi_outputs(const RunConfig& cfg, const HusimiGrid& grid, const BagelMeasure& bagel,
                          RunWriter& writer) {
    CsvFile csv(writer.register_file("husimi.csv"), {"theta", "phi", "value"});
    for (size_t i = 0; i < grid.theta_grid.size(); ++i)
        for (size_t j = 0; j < grid.phi_grid.size(); ++j)
            csv.row(grid.theta_grid[i], grid.phi_grid[j],
                    grid.values(static_cast<int>(i), static_cast<int>(j)));
    csv.close();

    json meta;
    meta["grid"] = {{"n_theta", cfg.husimi_theta}, {"n_phi", cfg.husimi_phi}};
    meta["normalization"] = "max normalized to 1, clipped at 0";
    meta["initial_state"] = "all bosons on site 1";
    meta["bagel"] = {{"diameter", bagel.diameter},
                     {"is_unimodal", bagel.is_unimodal},
                     {"prominence_fraction", 0.05},
                     {"convention", "angular separation in theta at phi = pi/2"}};
    meta["model"] = to_json(RunConfig(cfg))["model"];
    auto path = writer.register_file("husimi_meta.json");
    std::ofstream out(path);
    out << meta.dump(2) << '\n';
}

void cmd_husimi(const RunConfig& cfg, RunWriter& writer) {
    ModelParams params = cfg.model_params();
    if (!(params.gamma > 0.0))
        throw UsageError("husimi: gamma must be positive (dissipation-free asymptotics undefined)");
    const auto ops = build_operators(params.n_bosons);
    const Matrix rho = asymptotic_density(cfg, params, ops, writer);
    if (cfg.dump_rho) write_density_binary(writer.register_file("rho.bin"), rho);
    const HusimiGrid grid =
        husimi(rho, HusimiGridSpec{cfg.husimi_theta, cfg.husimi_phi}, resolved_workers(cfg));
    const BagelMeasure bagel = bagel_diameter(grid);
    write_husimi_outputs(cfg, grid, bagel, writer);

    if (cfg.poincare_points > 0) {
        MeanFieldConfig mf;
        mf.dt_factor = cfg.dt_factor;
        mf.transient_periods = cfg.transient_periods;
        CsvFile overlay(writer.register_file("poincare_overlay.csv"), {"U", "m", "theta", "phi"});
        try {
            const auto iterates =
                stroboscopic_map(params, MeanFieldState{2.0, 0.0, 0.0}, mf, cfg.poincare_points);
            for (size_t m = 0; m < iterates.size(); ++m)
                overlay.row(params.interaction, static_cast<long>(m + 1), iterates[m].theta,
                            std::fmod(iterates[m].phi + 4.0 * std::numbers::pi, 2.0 * std::numbers::pi));
        } catch (const NumericalError& err) {
            writer.warn(std::string("mean-field overlay aborted: ") + err.what());
        }
    }
    std::printf("husimi: D = %.6f (%s)\n", bagel.diameter, bagel.is_unimodal ? "unimodal" : "bagel");
}

void cmd_trajectories(const RunConfig& cfg, RunWriter& writer) {
    ModelParams params = cfg.model_params();
    const auto ops = build_operators(params.n_bosons);
    EnsembleConfig ecfg;
    ecfg.n_trajectories = cfg.n_trajectories;
    ecfg.t_relax = cfg.relax_periods * params.period;
    ecfg.t_measure = cfg.measure_periods * params.period;
    ecfg.seed = cfg.seed;
    ecfg.workers = resolved_workers(cfg);
    ecfg.integrator.dt_factor = cfg.dt_factor;
    ecfg.rho_pool_periods = 1;
    const double est = mcwf_cost_seconds(params, ops, ecfg.integrator,
                                         cfg.relax_periods + cfg.measure_periods,
                                         ecfg.n_trajectories, ecfg.workers);
    require_large(est, cfg.large, writer);
    if (cfg.relax_periods < 2000)
        writer.warn("reduced relaxation preset (" + std::to_string(cfg.relax_periods) +
                    " periods); asymptotic-state sampling may retain transients");

    Vector psi0 = Vector::Zero(ops.dim);
    psi0[ops.dim - 1] = Complex(1.0, 0.0);
    const EnsembleResult result = run_ensemble(params, ops, psi0, ecfg);

    CsvFile obs(writer.register_file("observables.csv"), {"traj_id", "m", "n", "e"});
    for (size_t j = 0; j < result.trajectories.size(); ++j)
        for (const auto& rec : result.trajectories[j])
            obs.row(static_cast<long>(j), rec.period_index, rec.site1_population, rec.energy);
    obs.close();

    const auto hist = observable_histogram(result.trajectories, params.n_bosons);
    CsvFile hcsv(writer.register_file("histogram2d.csv"), {"bin_x", "bin_y", "count"});
    for (int bx = 0; bx < hist.counts.rows(); ++bx)
        for (int by = 0; by < hist.counts.cols(); ++by)
            if (hist.counts(bx, by) > 0.0) hcsv.row(static_cast<long>(bx), static_cast<long>(by), hist.counts(bx, by));
    hcsv.close();
    {
        json sidecar;
        sidecar["x"] = {{"min", hist.x_min}, {"max", hist.x_max}, {"bins", hist.counts.rows()},
                        {"quantity", "n/N"}};
        sidecar["y"] = {{"min", hist.y_min}, {"max", hist.y_max}, {"bins", hist.counts.cols()},
                        {"quantity", "e/N"}};
        std::ofstream out(writer.register_file("histogram2d_meta.json"));
        out << sidecar.dump(2) << '\n';
    }

    const auto rotation = rotation_numbers(result.trajectories, params.n_bosons);
    if (rotation) {
        CsvFile rot(writer.register_file("rotation.csv"), {"traj_id", "m", "theta_angle", "omega"});
        for (size_t j = 0; j < rotation->per_trajectory.size(); ++j)
            for (size_t m = 1; m < rotation->per_trajectory[j].size(); ++m) {
                const auto& r = rotation->per_trajectory[j][m];
                rot.row(static_cast<long>(j), r.period_index, r.angle, r.omega);
            }
        rot.close();
        json meta;
        meta["mean_omega"] = rotation->mean_omega;
        meta["mode_omega"] = rotation->mode_omega;
        meta["histogram"] = rotation->histogram;
        meta["lobes"] = angular_lobe_count(result.trajectories, params.n_bosons);
        std::ofstream out(writer.register_file("rotation_meta.json"));
        out << meta.dump(2) << '\n';
        std::printf("trajectories: mean omega = %.4f, mode = %.4f\n", rotation->mean_omega,
                    rotation->mode_omega);
    } else {
        writer.warn("rotation number undefined: degenerate stroboscopic cloud (fixed-point regime)");
    }
}

void cmd_floquet(const RunConfig& cfg, RunWriter& writer) {
    ModelParams params = cfg.model_params();
    FloquetConfig fcfg;
    fcfg.integrator.dt_factor = cfg.dt_factor;
    fcfg.workers = resolved_workers(cfg);
    if (cfg.large) fcfg.max_bosons = 100;  // (N+1)^4 memory: ~1.7 GB dense map at N = 100

    const auto ops = build_operators(params.n_bosons);
    const Matrix map = build_floquet_map(params, ops, fcfg);
    const FloquetSpectrum spectrum = floquet_spectrum(map);

    CsvFile csv(writer.register_file("floquet_spectrum.csv"), {"k", "re_mu", "im_mu", "modulus"});
    for (size_t k = 0; k < spectrum.eigenvalues.size(); ++k)
        csv.row(static_cast<long>(k + 1), spectrum.eigenvalues[k].real(),
                spectrum.eigenvalues[k].imag(), std::abs(spectrum.eigenvalues[k]));
    csv.close();
    std::printf("floquet: gap = %.6e, slow pair phase = %.6f rad\n", spectrum.gap,
                spectrum.slow_pair_phase);

    if (!cfg.n_list.empty()) {
        const auto rows = gap_vs_N(params, cfg.n_list, fcfg);
        CsvFile gap(writer.register_file("floquet_gap.csv"),
                    {"N", "U", "gap", "phase", "t_relax_estimate"});
        for (const auto& row : rows)
            gap.row(row.n_bosons, row.u, row.gap, row.slow_pair_phase, row.relaxation_time);
    }
}

void cmd_bagel_diameter(const RunConfig& cfg, RunWriter& writer) {
    const auto u_values = cfg.u_grid();
    std::vector<int> n_values = cfg.n_list;
    if (n_values.empty()) n_values = {cfg.n_bosons};

    CsvFile csv(writer.register_file("bagel_diameter.csv"), {"U", "N", "D", "is_unimodal"});
    for (int n : n_values) {
        for (double u : u_values) {
            RunConfig point = cfg;
            point.interaction = u;
            point.n_bosons = n;
            ModelParams params = point.model_params();
            const auto ops = build_operators(n);
            try {
                const Matrix rho = asymptotic_density(point, params, ops, writer);
                const auto grid = husimi(rho, HusimiGridSpec{cfg.husimi_theta, cfg.husimi_phi},
                                         resolved_workers(cfg));
                const auto bagel = bagel_diameter(grid);
                csv.row(u, static_cast<long>(n), bagel.diameter,
                        static_cast<long>(bagel.is_unimodal ? 1 : 0));
            } catch (const NumericalError& err) {
                writer.warn("U=" + std::to_string(u) + " N=" + std::to_string(n) +
                            " failed: " + err.what());
            }
        }
    }
}

}  // namespace

ModelParams RunConfig::model_params() const {
    ModelParams p;
    p.tunneling = tunneling;
    p.interaction = interaction;
    p.gamma = gamma;
    p.drive_amplitude = drive_amplitude;
    p.period = period;
    p.n_bosons = n_bosons;
    p.validate();
    return p;
}

std::vector<double> RunConfig::u_grid() const {
    if (u_step <= 0.0) return {interaction};
    if (u_max < u_min) throw std::invalid_argument("u_max < u_min");
    std::vector<double> grid;
    const long count = static_cast<long>(std::floor((u_max - u_min) / u_step + 1e-9)) + 1;
    if (count > 100000) throw std::invalid_argument("U grid too large");
    grid.reserve(static_cast<size_t>(count));
    for (long i = 0; i < count; ++i) grid.push_back(u_min + static_cast<double>(i) * u_step);
    return grid;
}

std::string RunConfig::canonical_json() const { return to_json(*this).dump(); }

RunConfig RunConfig::from_json_text(const std::string& text) {
    return config_from_json(json::parse(text));
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Driven open bosonic dimer: master-equation, quantum-jump and mean-field toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override file values)");
    auto add_common = [&](CLI::App* cmd) {
        cmd->fallthrough();
        cmd->add_option("--config", config_path, "JSON config file (flags override file values)");
        cmd->add_option("--seed", cfg.seed, "master RNG seed");
        cmd->add_option("--workers", cfg.workers, "worker threads (0 = all cores)");
        cmd->add_option("--out", cfg.out_dir, "output directory");
        cmd->add_flag("--large", cfg.large, "acknowledge runs estimated beyond fifteen minutes");
        cmd->add_option("--n", cfg.n_bosons, "boson number N");
        cmd->add_option("--u", cfg.interaction, "interaction strength U");
        cmd->add_option("--gamma", cfg.gamma, "dissipative coupling");
        cmd->add_option("--drive", cfg.drive_amplitude, "drive amplitude A");
        cmd->add_option("--dt-factor", cfg.dt_factor, "integration step as a fraction of T");
        cmd->add_option("--transients", cfg.transient_periods, "transient periods to discard");
        cmd->add_option("--u-min", cfg.u_min, "sweep start");
        cmd->add_option("--u-max", cfg.u_max, "sweep end");
        cmd->add_option("--u-step", cfg.u_step, "sweep step (0 = single point at --u)");
        cmd->add_option("--n-list", cfg.n_list, "list of boson numbers");
        cmd->add_option("--traj", cfg.n_trajectories, "quantum trajectories");
        cmd->add_option("--t-relax", cfg.relax_periods, "relaxation time in periods");
        cmd->add_option("--t-measure", cfg.measure_periods, "measurement time in periods");
        cmd->add_option("--record-periods", cfg.record_periods, "recorded periods per sweep point");
        cmd->add_option("--rho-pool", cfg.rho_pool_periods, "stroboscopic snapshots pooled into rho");
        cmd->add_option("--poincare", cfg.poincare_points, "mean-field section points to export");
        cmd->add_option("--husimi-theta", cfg.husimi_theta, "Husimi theta grid size");
        cmd->add_option("--husimi-phi", cfg.husimi_phi, "Husimi phi grid size");
        cmd->add_flag("--dump-rho", cfg.dump_rho, "also write the density matrix binary");
    };

    auto* mf = app.add_subcommand("meanfield-sweep", "classical bifurcation diagram over U");
    auto* qb = app.add_subcommand("quantum-bifurcation", "stroboscopic rho_nn histogram over U");
    auto* hu = app.add_subcommand("husimi", "asymptotic Husimi distribution on the Bloch sphere");
    auto* tr = app.add_subcommand("trajectories", "quantum-jump ensemble observables");
    auto* fl = app.add_subcommand("floquet", "one-period superoperator spectrum");
    auto* bd = app.add_subcommand("bagel-diameter", "bagel diameter D over a (U, N) grid");
    for (auto* cmd : {mf, qb, hu, tr, fl, bd}) add_common(cmd);

    // Load the config file before flag values are applied so that flags win.
    app.preparse_callback([&](size_t) {
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string(argv[i]) == "--config") {
                std::ifstream in(argv[i + 1]);
                if (!in) throw CLI::ValidationError("--config", "cannot read config file");
                std::string text((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
                try {
                    cfg = RunConfig::from_json_text(text);
                } catch (const std::exception& err) {
                    throw CLI::ValidationError("--config", err.what());
                }
            }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (const char* env_out = std::getenv("QDIMER_OUT"); env_out && *env_out) cfg.out_dir = env_out;

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        RunWriter writer(cfg.out_dir, command, cfg.canonical_json());
        if (command == "meanfield-sweep")
            cmd_meanfield_sweep(cfg, writer);
        else if (command == "quantum-bifurcation")
            cmd_quantum_bifurcation(cfg, writer);
        else if (command == "husimi")
            cmd_husimi(cfg, writer);
        else if (command == "trajectories")
            cmd_trajectories(cfg, writer);
        else if (command == "floquet")
            cmd_floquet(cfg, writer);
        else if (command == "bagel-diameter")
            cmd_bagel_diameter(cfg, writer);
        writer.finalize();
    } catch (const UsageError& err) {
        std::fprintf(stderr, "usage error: %s\n", err.what());
        return 2;
    } catch (const std::invalid_argument& err) {
        std::fprintf(stderr, "usage error: %s\n", err.what());
        return 2;
    } catch (const NumericalError& err) {
        std::fprintf(stderr, "numerical failure: %s\n", err.what());
        return 3;
    }
    return 0;
}

}  // namespace qdimer
