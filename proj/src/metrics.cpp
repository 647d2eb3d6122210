#include "gbopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gbopt/config.hpp"
#include "gbopt/errors.hpp"

namespace gbopt {

MetricSeries compute_metrics(const RunTrace& trace, const std::optional<GroundTruth>& ground_truth) {
    if (!ground_truth || !ground_truth->feasible_point_exists) {
        throw MissingGroundTruthError("metrics need a ground-truth optimum");
    }
    const double f_star = ground_truth->f_star;

    MetricSeries m;
    const std::size_t T = trace.records.size();
    m.cumulative_regret.reserve(T);
    m.cumulative_positive_regret.reserve(T);
    m.constrained_regret.reserve(T);
    m.best_simple_regret.reserve(T);

    double cum = 0.0, cum_pos = 0.0;
    double best_cr = std::numeric_limits<double>::infinity();
    double best_simple = std::numeric_limits<double>::infinity();
    std::vector<double> cum_violation;

    for (std::size_t t = 0; t < T; ++t) {
        const StepRecord& rec = trace.records[t];
        const double gap = rec.f - f_star;
        cum += gap;
        cum_pos += std::max(gap, 0.0);
        best_simple = std::min(best_simple, gap);

        if (cum_violation.empty()) cum_violation.assign(static_cast<std::size_t>(rec.g.size()), 0.0);
        double violation_l1 = 0.0;
        for (Eigen::Index k = 0; k < rec.g.size(); ++k) {
            const double v = std::max(rec.g[k], 0.0);
            cum_violation[static_cast<std::size_t>(k)] += v;
            violation_l1 += v;
        }
        best_cr = std::min(best_cr, std::max(gap, 0.0) + violation_l1);

        m.cumulative_regret.push_back(cum);
        m.cumulative_positive_regret.push_back(cum_pos);
        m.constrained_regret.push_back(best_cr);
        m.best_simple_regret.push_back(best_simple);
        if (m.cumulative_violation.empty()) m.cumulative_violation.resize(cum_violation.size());
        for (std::size_t k = 0; k < cum_violation.size(); ++k) {
            m.cumulative_violation[k].push_back(cum_violation[k]);
        }
    }
    return m;
}

std::string trace_csv_header(int input_dim, int constraint_count,
                             const std::vector<std::pair<int, int>>& beta_columns) {
    std::ostringstream out;
    out << "t";
    for (int j = 1; j <= input_dim; ++j) out << ",x" << j;
    out << ",f";
    for (int k = 1; k <= constraint_count; ++k) out << ",g" << k;
    out << ",regret";
    for (int k = 1; k <= constraint_count; ++k) out << ",violation" << k;
    out << ",cr,discrepancy_bound";
    for (const auto& [fi, node] : beta_columns) out << ",beta_f" << fi << "_n" << node;
    return out.str();
}

std::string trace_to_csv(const Problem& problem, const RunTrace& trace) {
    const int n = problem.objective.input_dim;
    const int K = problem.constraint_count();

    std::vector<std::pair<int, int>> beta_columns;
    for (int fi = 0; fi <= K; ++fi) {
        const GreyBoxGraph& g = fi == 0 ? problem.objective
                                        : problem.constraints[static_cast<std::size_t>(fi - 1)];
        for (int id : g.black_set()) beta_columns.emplace_back(fi, id);
    }

    std::optional<MetricSeries> metrics;
    if (problem.ground_truth && problem.ground_truth->feasible_point_exists) {
        metrics = compute_metrics(trace, problem.ground_truth);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::ostringstream out;
    out << trace_csv_header(n, K, beta_columns) << "\n";
    for (std::size_t t = 0; t < trace.records.size(); ++t) {
        const StepRecord& rec = trace.records[t];
        out << rec.t;
        for (int j = 0; j < n; ++j) out << ',' << format_double(rec.x[j]);
        out << ',' << format_double(rec.f);
        for (int k = 0; k < K; ++k) out << ',' << format_double(rec.g[k]);
        out << ',' << format_double(metrics ? rec.f - problem.ground_truth->f_star : nan);
        for (int k = 0; k < K; ++k) out << ',' << format_double(rec.violation[k]);
        out << ',' << format_double(metrics ? metrics->constrained_regret[t] : nan);
        out << ',' << format_double(rec.discrepancy_bound);
        for (const auto& [fi, node] : beta_columns) {
            double beta = nan;
            for (const NodeObservation& obs : rec.observations) {
                if (obs.function_index == fi && obs.node_id == node) {
                    beta = obs.beta;
                    break;
                }
            }
            out << ',' << format_double(beta);
        }
        out << "\n";
    }
    return out.str();
}

int TraceCsv::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<int> TraceCsv::columns_with_prefix(const std::string& prefix) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].rfind(prefix, 0) == 0) out.push_back(static_cast<int>(i));
    }
    return out;
}

TraceCsv parse_trace_csv(const std::string& text, const std::string& origin) {
    TraceCsv csv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_tokens(line, ',');
        if (csv.columns.empty()) {
            csv.columns = cells;
            continue;
        }
        if (cells.size() != csv.columns.size()) {
            throw ConfigParseError(origin + ":" + std::to_string(lineno) + ": expected " +
                                   std::to_string(csv.columns.size()) + " cells, got " +
                                   std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            try {
                row[i] = std::stod(cells[i]);
            } catch (const std::exception&) {
                throw ConfigParseError(origin + ":" + std::to_string(lineno) + ": non-numeric cell '" +
                                       cells[i] + "'");
            }
        }
        csv.rows.push_back(std::move(row));
    }
    if (csv.columns.empty()) throw ConfigParseError(origin + ": empty trace csv");
    return csv;
}

MetricSeries metrics_from_csv(const TraceCsv& csv) {
    const int regret_col = csv.column("regret");
    if (regret_col < 0) throw ConfigParseError("trace csv has no regret column");
    const std::vector<int> violation_cols = csv.columns_with_prefix("violation");

    MetricSeries m;
    double cum = 0.0, cum_pos = 0.0;
    double best_cr = std::numeric_limits<double>::infinity();
    double best_simple = std::numeric_limits<double>::infinity();
    std::vector<double> cum_violation(violation_cols.size(), 0.0);

    for (const auto& row : csv.rows) {
        const double gap = row[static_cast<std::size_t>(regret_col)];
        if (std::isnan(gap)) throw MissingGroundTruthError("trace has no ground-truth regret values");
        cum += gap;
        cum_pos += std::max(gap, 0.0);
        best_simple = std::min(best_simple, gap);
        double violation_l1 = 0.0;
        for (std::size_t k = 0; k < violation_cols.size(); ++k) {
            const double v = row[static_cast<std::size_t>(violation_cols[k])];
            cum_violation[k] += v;
            violation_l1 += v;
        }
        best_cr = std::min(best_cr, std::max(gap, 0.0) + violation_l1);

        m.cumulative_regret.push_back(cum);
        m.cumulative_positive_regret.push_back(cum_pos);
        m.constrained_regret.push_back(best_cr);
        m.best_simple_regret.push_back(best_simple);
        if (m.cumulative_violation.empty()) m.cumulative_violation.resize(cum_violation.size());
        for (std::size_t k = 0; k < cum_violation.size(); ++k) {
            m.cumulative_violation[k].push_back(cum_violation[k]);
        }
    }
    return m;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = q * (static_cast<double>(values.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

AggregateSeries aggregate_series(const std::vector<std::vector<double>>& per_seed) {
    std::size_t longest = 0;
    for (const auto& s : per_seed) longest = std::max(longest, s.size());

    AggregateSeries out;
    for (std::size_t t = 0; t < longest; ++t) {
        std::vector<double> at;
        for (const auto& s : per_seed) {
            if (t < s.size()) at.push_back(s[t]);
        }
        out.median.push_back(quantile(at, 0.5));
        out.q1.push_back(quantile(at, 0.25));
        out.q3.push_back(quantile(at, 0.75));
    }
    return out;
}

}  // namespace gbopt
