#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gbopt/errors.hpp"
#include "gbopt/harness.hpp"

namespace {

int cmd_validate(const std::string& path) {
    const gbopt::Problem problem = gbopt::problem_from_file(path);
    problem.validate();
    int nodes = static_cast<int>(problem.objective.nodes.size());
    for (const auto& g : problem.constraints) nodes += static_cast<int>(g.nodes.size());
    std::cout << "ok: " << problem.name << " (family=" << problem.family
              << ", n=" << problem.objective.input_dim << ", K=" << problem.constraint_count()
              << ", nodes=" << nodes << ")\n";
    return 0;
}

int cmd_run(const std::string& path, const std::string& seeds, int T, const std::string& mode,
            const std::string& out) {
    gbopt::ExperimentConfig exp = gbopt::experiment_from_file(path);
    if (!seeds.empty()) exp.seeds = gbopt::parse_seed_list(seeds);
    if (T > 0) exp.T = static_cast<std::uint64_t>(T);
    if (!mode.empty()) exp.modes = {gbopt::mode_from_name(mode)};
    if (!out.empty()) exp.out = out;
    exp.validate();

    const gbopt::ExperimentResult result = gbopt::run_experiment(exp);
    int declared = 0;
    for (const auto& jr : result.jobs) {
        if (jr.trace.outcome == gbopt::RunTrace::Outcome::InfeasibilityDeclared) ++declared;
    }
    std::cout << "experiment " << exp.name << ": " << result.jobs.size() << " runs -> " << exp.out
              << "\n";
    if (declared > 0) std::cout << declared << " run(s) declared infeasibility\n";
    return 0;
}

int cmd_metrics(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gbopt::Error("cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const gbopt::TraceCsv csv = gbopt::parse_trace_csv(buffer.str(), path);
    const gbopt::MetricSeries m = gbopt::metrics_from_csv(csv);
    const std::size_t T = m.cumulative_regret.size();
    if (T == 0) throw gbopt::Error("trace has no steps");
    std::cout << "steps: " << T << "\n";
    std::cout << "cumulative regret R_T: " << gbopt::format_double(m.cumulative_regret.back())
              << "\n";
    std::cout << "cumulative positive regret: "
              << gbopt::format_double(m.cumulative_positive_regret.back()) << "\n";
    std::cout << "constrained regret CR_T: "
              << gbopt::format_double(m.constrained_regret.back()) << "\n";
    std::cout << "best simple regret: " << gbopt::format_double(m.best_simple_regret.back())
              << "\n";
    for (std::size_t k = 0; k < m.cumulative_violation.size(); ++k) {
        std::cout << "cumulative violation V_" << (k + 1) << ": "
                  << gbopt::format_double(m.cumulative_violation[k].back()) << "\n";
    }
    return 0;
}

int cmd_compare(const std::string& dir) {
    std::cout << gbopt::compare_directory(dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimism-driven Bayesian optimization of nested grey-box functions"};
    app.require_subcommand(1);

    std::string problem_path;
    CLI::App* validate = app.add_subcommand("validate", "Validate a problem file");
    validate->add_option("problem", problem_path, "problem file")->required();

    std::string config_path, seeds, mode, out;
    int T = 0;
    CLI::App* run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--seeds", seeds, "override seed list, e.g. 1..20 or 3,5,9");
    run->add_option("--T", T, "override horizon");
    run->add_option("--mode", mode, "override mode")->check(CLI::IsMember({"greybox", "blackbox"}));
    run->add_option("--out", out, "override output directory");

    std::string trace_path;
    CLI::App* metrics = app.add_subcommand("metrics", "Summarize metrics of one trace CSV");
    metrics->add_option("trace", trace_path, "trace csv file")->required();

    std::string compare_dir;
    CLI::App* compare = app.add_subcommand("compare", "Compare modes from a results directory");
    compare->add_option("dir", compare_dir, "results directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(problem_path);
        if (run->parsed()) return cmd_run(config_path, seeds, T, mode, out);
        if (metrics->parsed()) return cmd_metrics(trace_path);
        if (compare->parsed()) return cmd_compare(compare_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
