#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gbopt/acquisition.hpp"
#include "gbopt/benchmarks.hpp"
#include "gbopt/gp.hpp"

namespace gbopt {

struct RunConfig {
    std::uint64_t T = 30;
    double delta = 0.05;
    double sigma = 0.0;
    bool lambda_is_horizon = true;  // λ = 1 + 2/T; otherwise lambda_fixed
    double lambda_fixed = GpModel::kDefaultLambda;
    double beta_scale = 1.0;
    SolverBudget budget;
    std::uint64_t seed = 0;
    enum class Mode { Greybox, BlackboxBaseline } mode = Mode::Greybox;
    bool doubling = false;

    void validate() const;
};

struct NodeObservation {
    int function_index = 0;  // 0 = objective, k >= 1 = constraint k
    int node_id = 0;
    std::string oracle_id;
    Eigen::VectorXd s;   // planned augmented query point
    double y = 0.0;      // noisy observation
    bool fed = true;     // false when an identical query was already made this step
    double beta = 0.0;   // β_{i,t} in force during this step's solve
    double sd = 0.0;     // posterior sd at s before this step's updates
};

struct StepRecord {
    int t = 0;
    Eigen::VectorXd x;
    std::vector<Eigen::VectorXd> z_true;  // per function
    std::vector<Eigen::VectorXd> z_bar;
    std::vector<NodeObservation> observations;
    double f = 0.0;
    Eigen::VectorXd g;          // true constraint values
    double objective_estimate = 0.0;  // optimistic auxiliary objective
    double regret = 0.0;        // f − f*; NaN without ground truth
    Eigen::VectorXd violation;  // [g]^+
    double discrepancy_bound = 0.0;   // Σ_{i∈I_B(f)} A_i β_i σ_i
    double discrepancy_actual = 0.0;  // |z_m − z̄_m| for the objective
};

struct RunTrace {
    enum class Outcome { Completed, InfeasibilityDeclared };
    Outcome outcome = Outcome::Completed;
    int declared_at = 0;  // step of declaration when infeasible
    std::vector<StepRecord> records;
};

RunTrace run_unconstrained(const Problem& problem, const RunConfig& config);
RunTrace run_constrained(const Problem& problem, const RunConfig& config);
// Opaque per-function single-GP baseline on a derived problem.
RunTrace run_blackbox_baseline(const Problem& problem, const RunConfig& config);
// Rounds of T = 1, 2, 4, …, data carried over, λ refreshed per round, total
// steps capped at config.T.
RunTrace run_with_doubling(const Problem& problem, const RunConfig& config);
// Dispatch on config.mode / doubling / constraint count.
RunTrace run(const Problem& problem, const RunConfig& config);

// The baseline's view of a problem: each function collapsed to one black-box
// node over x with B set from a dense-grid sweep of the composite.
Problem derive_blackbox_problem(const Problem& problem);

}  // namespace gbopt
