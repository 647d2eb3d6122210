#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gbopt/benchmarks.hpp"
#include "gbopt/optimizer.hpp"

namespace gbopt {

struct MetricSeries {
    std::vector<double> cumulative_regret;           // R_t = Σ_{τ≤t} (f(x_τ) − f*)
    std::vector<double> cumulative_positive_regret;  // Σ_{τ≤t} [f(x_τ) − f*]^+
    std::vector<std::vector<double>> cumulative_violation;  // V_{k,t} per constraint
    std::vector<double> constrained_regret;          // CR_t, non-increasing
    std::vector<double> best_simple_regret;          // min_{τ≤t} (f(x_τ) − f*)
};

MetricSeries compute_metrics(const RunTrace& trace, const std::optional<GroundTruth>& ground_truth);

// ---- trace CSV (column layout documented in the README) ----
std::string trace_csv_header(int input_dim, int constraint_count,
                             const std::vector<std::pair<int, int>>& beta_columns);
std::string trace_to_csv(const Problem& problem, const RunTrace& trace);

struct TraceCsv {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;  // −1 when absent
    std::vector<int> columns_with_prefix(const std::string& prefix) const;
};

TraceCsv parse_trace_csv(const std::string& text, const std::string& origin = "<csv>");
MetricSeries metrics_from_csv(const TraceCsv& csv);

// ---- aggregation across seeds ----
double quantile(std::vector<double> values, double q);  // linear interpolation

struct AggregateSeries {
    std::vector<double> median, q1, q3;
};

// Per-step aggregation over seeds; shorter series simply stop contributing.
AggregateSeries aggregate_series(const std::vector<std::vector<double>>& per_seed);

}  // namespace gbopt
