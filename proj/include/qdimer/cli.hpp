#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdimer/model.hpp"

namespace qdimer {

/// Serializable run configuration shared by all subcommands; a persisted
/// config re-executes to identical outputs for the same seed and build.
struct RunConfig {
    int schema_version = 1;

    // model
    double tunneling = 1.0;
    double interaction = 0.1;
    double gamma = 0.1;
    double drive_amplitude = 3.4;
    double period = 2.0 * std::numbers::pi;
    int n_bosons = 50;

    // integration
    double dt_factor = 5e-4;
    int transient_periods = 100;

    // sweeps
    double u_min = 0.0;
    double u_max = 0.0;
    double u_step = 0.0;  // 0 => single point at `interaction`
    std::vector<int> n_list;

    // ensembles (times in periods of T)
    int n_trajectories = 100;
    int relax_periods = 200;
    int measure_periods = 200;

    // analysis
    int husimi_theta = 256;
    int husimi_phi = 256;
    int record_periods = 100;
    int rho_pool_periods = 100;
    int histogram_bins = 400;
    int poincare_points = 0;
    int mcwf_threshold_bosons = 150;  // above this, husimi-type runs sample via quantum jumps
    bool dump_rho = false;            // also write the density matrix binary

    // execution
    std::uint64_t seed = 1;
    int workers = 0;  // 0 => hardware concurrency
    std::string out_dir = "out";
    bool large = false;

    ModelParams model_params() const;
    std::vector<double> u_grid() const;
    std::string canonical_json() const;
    static RunConfig from_json_text(const std::string& text);
};

/// Entry point used by the binary and by in-process tests.
/// Exit codes: 0 success, 2 usage error, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace qdimer
