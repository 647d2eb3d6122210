#include "gbopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "gbopt/errors.hpp"

namespace gbopt {

namespace {

std::uint64_t parse_u64(const std::string& token) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw ConfigParseError("bad seed value '" + token + "'");
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

std::string format_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (families.empty()) throw ConfigParseError("experiment has no families");
    if (seeds.empty()) throw ConfigParseError("experiment has no seeds");
    if (modes.empty()) throw ConfigParseError("experiment has no modes");
    if (T < 1) throw ConfigParseError("experiment horizon T must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigParseError("delta must lie in (0, 1)");
    if (sigma < 0.0) throw ConfigParseError("sigma must be >= 0");
    if (beta_scale <= 0.0) throw ConfigParseError("beta_scale must be > 0");
    if (!lambda_is_horizon && lambda_fixed <= 0.0) throw ConfigParseError("lambda must be > 0");
    if (workers < 0) throw ConfigParseError("workers must be >= 0");
    if (out.empty()) throw ConfigParseError("output directory must be set");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    for (const std::string& token : split_tokens(text)) {
        const std::size_t dots = token.find("..");
        if (dots == std::string::npos) {
            seeds.push_back(parse_u64(token));
            continue;
        }
        const std::uint64_t a = parse_u64(token.substr(0, dots));
        const std::uint64_t b = parse_u64(token.substr(dots + 2));
        if (b < a) throw ConfigParseError("seed range '" + token + "' is descending");
        if (b - a >= 1000000) throw ConfigParseError("seed range '" + token + "' is too large");
        for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    }
    if (seeds.empty()) throw ConfigParseError("empty seed list");
    return seeds;
}

const char* mode_name(RunConfig::Mode mode) {
    return mode == RunConfig::Mode::Greybox ? "greybox" : "blackbox";
}

RunConfig::Mode mode_from_name(const std::string& name) {
    if (name == "greybox") return RunConfig::Mode::Greybox;
    if (name == "blackbox") return RunConfig::Mode::BlackboxBaseline;
    throw ConfigParseError("unknown mode '" + name + "' (expected greybox or blackbox)");
}

ExperimentConfig experiment_from_config(const Config& config) {
    const ConfigSection& sec = config.require("experiment");
    ExperimentConfig exp;
    exp.name = sec.get_or("name", "experiment");
    if (sec.has("families")) {
        exp.families = sec.get_strings("families");
    } else if (sec.has("family")) {
        exp.families = sec.get_strings("family");
    } else {
        throw ConfigParseError("[experiment] needs a 'families' entry");
    }
    exp.seeds = parse_seed_list(sec.get_or("seeds", "1"));
    const std::vector<std::string> mode_names =
        sec.has("modes") ? sec.get_strings("modes") : std::vector<std::string>{"greybox"};
    for (const std::string& m : mode_names) exp.modes.push_back(mode_from_name(m));
    exp.T = sec.get_uint64_or("T", exp.T);
    exp.delta = sec.get_double_or("delta", exp.delta);
    exp.sigma = sec.get_double_or("sigma", exp.sigma);
    exp.beta_scale = sec.get_double_or("beta_scale", exp.beta_scale);
    if (sec.has("lambda")) {
        if (sec.get("lambda") == "horizon") {
            exp.lambda_is_horizon = true;
        } else {
            exp.lambda_is_horizon = false;
            exp.lambda_fixed = sec.get_double("lambda");
        }
    }
    exp.doubling = sec.get_bool_or("doubling", false);
    exp.workers = sec.get_int_or("workers", 0);
    exp.out = sec.get_or("out", exp.name);
    if (const ConfigSection* solver = config.find("solver")) {
        exp.budget = solver_budget_from_config(*solver);
    }
    exp.validate();
    return exp;
}

ExperimentConfig experiment_from_file(const std::string& path) {
    return experiment_from_config(Config::parse_file(path));
}

RunConfig run_config_for(const ExperimentConfig& exp, std::uint64_t seed, RunConfig::Mode mode) {
    RunConfig rc;
    rc.T = exp.T;
    rc.delta = exp.delta;
    rc.sigma = exp.sigma;
    rc.beta_scale = exp.beta_scale;
    rc.lambda_is_horizon = exp.lambda_is_horizon;
    rc.lambda_fixed = exp.lambda_fixed;
    rc.doubling = exp.doubling;
    rc.budget = exp.budget;
    rc.seed = seed;
    rc.mode = mode;
    return rc;
}

std::string run_csv_name(const std::string& family, RunConfig::Mode mode, std::uint64_t seed) {
    return "run_" + family + "_" + mode_name(mode) + "_seed" + std::to_string(seed) + ".csv";
}

ExperimentResult run_experiment(const ExperimentConfig& exp) {
    exp.validate();
    const std::filesystem::path out_dir(exp.out);
    std::filesystem::create_directories(out_dir);

    // One instance per (family, seed), shared verbatim across modes.
    std::vector<Problem> instances;
    std::map<std::pair<std::string, std::uint64_t>, std::size_t> instance_index;
    for (const std::string& family : exp.families) {
        for (std::uint64_t seed : exp.seeds) {
            instance_index[{family, seed}] = instances.size();
            instances.push_back(generate_problem(family, seed));
        }
    }

    struct Job {
        std::string family;
        std::uint64_t seed = 0;
        RunConfig::Mode mode = RunConfig::Mode::Greybox;
        std::size_t instance = 0;
    };
    std::vector<Job> jobs;
    for (const std::string& family : exp.families) {
        for (std::uint64_t seed : exp.seeds) {
            for (RunConfig::Mode mode : exp.modes) {
                jobs.push_back({family, seed, mode, instance_index[{family, seed}]});
            }
        }
    }

    ExperimentResult result;
    result.config = exp;
    result.jobs.resize(jobs.size());
    std::vector<std::string> failures(jobs.size());

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const Job& job = jobs[j];
            try {
                // The baseline runs on the flattened problem; flattening here
                // as well keeps the trace and its CSV schema consistent.
                Problem instance = instances[job.instance];
                RunConfig rc = run_config_for(exp, job.seed, job.mode);
                if (job.mode == RunConfig::Mode::BlackboxBaseline) {
                    instance = derive_blackbox_problem(instance);
                    rc.mode = RunConfig::Mode::Greybox;
                }
                JobResult& jr = result.jobs[j];
                jr.family = job.family;
                jr.mode = job.mode;
                jr.seed = job.seed;
                jr.csv_name = run_csv_name(job.family, job.mode, job.seed);
                jr.trace = run(instance, rc);
                if (instance.ground_truth && instance.ground_truth->feasible_point_exists) {
                    jr.metrics = compute_metrics(jr.trace, instance.ground_truth);
                }
                write_text_file(out_dir / jr.csv_name, trace_to_csv(instance, jr.trace));
            } catch (const std::exception& e) {
                failures[j] = e.what();
            }
        }
    };

    int worker_count = exp.workers > 0 ? exp.workers
                                       : static_cast<int>(std::thread::hardware_concurrency());
    worker_count = std::max(1, std::min<int>(worker_count, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();

    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!failures[j].empty()) {
            throw Error("job " + run_csv_name(jobs[j].family, jobs[j].mode, jobs[j].seed) +
                        " failed: " + failures[j]);
        }
    }

    write_text_file(out_dir / "aggregate.csv", aggregate_csv(result));
    write_text_file(out_dir / "manifest.csv", manifest_csv(result));
    write_text_file(out_dir / "plot.py", plot_script());
    return result;
}

std::string aggregate_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "family,mode,metric,t,median,q1,q3\n";
    for (const std::string& family : result.config.families) {
        for (RunConfig::Mode mode : result.config.modes) {
            std::vector<const MetricSeries*> series;
            for (const JobResult& jr : result.jobs) {
                if (jr.family == family && jr.mode == mode && jr.metrics) {
                    series.push_back(&*jr.metrics);
                }
            }
            if (series.empty()) continue;

            std::size_t constraint_count = 0;
            for (const MetricSeries* m : series) {
                constraint_count = std::max(constraint_count, m->cumulative_violation.size());
            }
            std::vector<std::pair<std::string, std::vector<std::vector<double>>>> metrics;
            auto collect = [&](const char* name, auto selector) {
                std::vector<std::vector<double>> per_seed;
                for (const MetricSeries* m : series) per_seed.push_back(selector(*m));
                metrics.emplace_back(name, std::move(per_seed));
            };
            collect("cum_regret", [](const MetricSeries& m) { return m.cumulative_regret; });
            collect("cum_positive_regret",
                    [](const MetricSeries& m) { return m.cumulative_positive_regret; });
            collect("cr", [](const MetricSeries& m) { return m.constrained_regret; });
            collect("best_simple_regret",
                    [](const MetricSeries& m) { return m.best_simple_regret; });
            for (std::size_t k = 0; k < constraint_count; ++k) {
                std::vector<std::vector<double>> per_seed;
                for (const MetricSeries* m : series) {
                    per_seed.push_back(k < m->cumulative_violation.size()
                                           ? m->cumulative_violation[k]
                                           : std::vector<double>{});
                }
                metrics.emplace_back("violation" + std::to_string(k + 1), std::move(per_seed));
            }

            for (const auto& [name, per_seed] : metrics) {
                const AggregateSeries agg = aggregate_series(per_seed);
                for (std::size_t t = 0; t < agg.median.size(); ++t) {
                    out << family << ',' << mode_name(mode) << ',' << name << ',' << (t + 1) << ','
                        << format_double(agg.median[t]) << ',' << format_double(agg.q1[t]) << ','
                        << format_double(agg.q3[t]) << "\n";
                }
            }
        }
    }
    return out.str();
}

std::string manifest_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "family,mode,seed,steps,outcome,declared_at,final_cr\n";
    for (const JobResult& jr : result.jobs) {
        const bool declared = jr.trace.outcome == RunTrace::Outcome::InfeasibilityDeclared;
        const double final_cr = jr.metrics && !jr.metrics->constrained_regret.empty()
                                    ? jr.metrics->constrained_regret.back()
                                    : std::numeric_limits<double>::quiet_NaN();
        out << jr.family << ',' << mode_name(jr.mode) << ',' << jr.seed << ','
            << jr.trace.records.size() << ','
            << (declared ? "infeasibility_declared" : "completed") << ','
            << (declared ? std::to_string(jr.trace.declared_at) : std::string("0")) << ','
            << format_double(final_cr) << "\n";
    }
    return out.str();
}

std::string plot_script() {
    return R"PY(#!/usr/bin/env python3
"""Render median curves with interquartile bands from aggregate.csv.

Reads aggregate.csv next to this script and writes curves.png beside it.
"""
import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))

series = defaultdict(lambda: {"t": [], "median": [], "q1": [], "q3": []})
with open(os.path.join(HERE, "aggregate.csv"), newline="") as fh:
    for row in csv.DictReader(fh):
        key = (row["family"], row["mode"], row["metric"])
        series[key]["t"].append(int(row["t"]))
        series[key]["median"].append(float(row["median"]))
        series[key]["q1"].append(float(row["q1"]))
        series[key]["q3"].append(float(row["q3"]))

PANELS = [
    ("cr", "constrained regret CR_t"),
    ("cum_positive_regret", "cumulative positive regret"),
    ("violation1", "cumulative violation V_1"),
    ("violation2", "cumulative violation V_2"),
]

fig, axes = plt.subplots(2, 2, figsize=(11, 8))
for ax, (metric, title) in zip(axes.flat, PANELS):
    drawn = False
    for (family, mode, name), data in sorted(series.items()):
        if name != metric:
            continue
        ax.plot(data["t"], data["median"], label=f"{family} {mode}")
        ax.fill_between(data["t"], data["q1"], data["q3"], alpha=0.25)
        drawn = True
    ax.set_title(title)
    ax.set_xlabel("step t")
    if drawn:
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)

fig.tight_layout()
out = os.path.join(HERE, "curves.png")
fig.savefig(out, dpi=130)
print(f"wrote {out}")
)PY";
}

std::string compare_directory(const std::string& dir) {
    struct RunEntry {
        std::string family;
        std::string mode;
        std::uint64_t seed = 0;
        std::optional<double> final_cr;
    };

    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("run_", 0) == 0 && name.size() > 8 &&
            name.substr(name.size() - 4) == ".csv") {
            names.push_back(name);
        }
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) throw Error("no run_*.csv files in " + dir);

    std::vector<RunEntry> entries;
    int skipped = 0;
    for (const std::string& name : names) {
        const std::string stem = name.substr(4, name.size() - 8);  // strip run_ and .csv
        const std::size_t seed_pos = stem.rfind("_seed");
        if (seed_pos == std::string::npos) continue;
        const std::string head = stem.substr(0, seed_pos);
        const std::size_t mode_pos = head.rfind('_');
        if (mode_pos == std::string::npos) continue;

        RunEntry run;
        run.family = head.substr(0, mode_pos);
        run.mode = head.substr(mode_pos + 1);
        run.seed = parse_u64(stem.substr(seed_pos + 5));

        std::ifstream in(std::filesystem::path(dir) / name, std::ios::binary);
        std::stringstream buffer;
        buffer << in.rdbuf();
        try {
            const MetricSeries m = metrics_from_csv(parse_trace_csv(buffer.str(), name));
            if (!m.constrained_regret.empty()) run.final_cr = m.constrained_regret.back();
        } catch (const MissingGroundTruthError&) {
            ++skipped;
        }
        entries.push_back(std::move(run));
    }

    std::set<std::string> families;
    for (const RunEntry& run : entries) families.insert(run.family);

    std::ostringstream out;
    for (const std::string& family : families) {
        std::map<std::string, std::map<std::uint64_t, double>> by_mode;
        int run_count = 0;
        for (const RunEntry& run : entries) {
            if (run.family != family) continue;
            ++run_count;
            if (run.final_cr) by_mode[run.mode][run.seed] = *run.final_cr;
        }
        out << "family " << family << ": " << run_count << " runs\n";
        for (const auto& [mode, per_seed] : by_mode) {
            std::vector<double> finals;
            for (const auto& [seed, cr] : per_seed) finals.push_back(cr);
            out << "  mode " << mode << ": " << finals.size()
                << " runs, median final CR = " << format_short(quantile(finals, 0.5)) << "\n";
        }
        const auto grey = by_mode.find("greybox");
        const auto black = by_mode.find("blackbox");
        if (grey != by_mode.end() && black != by_mode.end()) {
            int wins = 0, ties = 0, losses = 0, shared = 0;
            for (const auto& [seed, cr] : grey->second) {
                const auto other = black->second.find(seed);
                if (other == black->second.end()) continue;
                ++shared;
                if (cr < other->second) {
                    ++wins;
                } else if (cr == other->second) {
                    ++ties;
                } else {
                    ++losses;
                }
            }
            if (shared > 0) {
                out << "  greybox vs blackbox on " << shared << " shared seeds: greybox wins "
                    << wins << " (" << format_short(100.0 * wins / shared) << "%), ties " << ties
                    << ", blackbox wins " << losses << "\n";
            }
        }
    }
    if (skipped > 0) {
        out << skipped << " run(s) without ground-truth regret were skipped\n";
    }
    return out.str();
}

}  // namespace gbopt
