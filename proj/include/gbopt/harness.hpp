#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gbopt/config.hpp"
#include "gbopt/metrics.hpp"
#include "gbopt/optimizer.hpp"

namespace gbopt {

// One experiment = families x seeds x modes, all driven by a single config
// file with an [experiment] section and an optional [solver] section.
struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<std::string> families;
    std::vector<std::uint64_t> seeds;
    std::vector<RunConfig::Mode> modes;
    std::uint64_t T = 30;
    double delta = 0.05;
    double sigma = 0.0;
    double beta_scale = 1.0;
    bool lambda_is_horizon = true;
    double lambda_fixed = GpModel::kDefaultLambda;
    bool doubling = false;
    int workers = 0;  // 0 = hardware concurrency
    std::string out = "results";
    SolverBudget budget;

    void validate() const;
};

// "1, 3, 7" and "1..20" (inclusive) forms, freely mixed.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

const char* mode_name(RunConfig::Mode mode);
RunConfig::Mode mode_from_name(const std::string& name);

ExperimentConfig experiment_from_config(const Config& config);
ExperimentConfig experiment_from_file(const std::string& path);

struct JobResult {
    std::string family;
    RunConfig::Mode mode = RunConfig::Mode::Greybox;
    std::uint64_t seed = 0;
    std::string csv_name;
    RunTrace trace;
    std::optional<MetricSeries> metrics;  // absent without ground truth
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<JobResult> jobs;
};

RunConfig run_config_for(const ExperimentConfig& exp, std::uint64_t seed, RunConfig::Mode mode);
std::string run_csv_name(const std::string& family, RunConfig::Mode mode, std::uint64_t seed);

// Runs all jobs in a worker pool, then merges single-threaded: writes one
// run_<family>_<mode>_seed<seed>.csv per job plus aggregate.csv,
// manifest.csv, and plot.py under exp.out. Never touches any other path.
ExperimentResult run_experiment(const ExperimentConfig& exp);

// Tidy per-(family, mode, metric, t) medians and quartile bands.
std::string aggregate_csv(const ExperimentResult& result);
// One row per job: outcome, declaration step, final constrained regret.
std::string manifest_csv(const ExperimentResult& result);
// Static matplotlib script that renders aggregate.csv sitting next to it.
std::string plot_script();

// Recomputes metrics from run_*.csv files in a directory and pits modes
// against each other per family (median final CR, per-seed win counts).
std::string compare_directory(const std::string& dir);

}  // namespace gbopt
