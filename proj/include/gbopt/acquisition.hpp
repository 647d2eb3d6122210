#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "gbopt/gp.hpp"
#include "gbopt/graph.hpp"

namespace gbopt {

// Confidence-bounded surrogate for one black-box node; the GP may be shared
// across functions that query the same oracle.
struct NodeModelView {
    const GpModel* gp = nullptr;
    ConfidenceModel conf;

    std::pair<double, double> bounds(const Eigen::VectorXd& s) const {
        return confidence_bounds(*gp, conf, s);
    }
};

// One function (objective or constraint) with its per-black-node models.
struct GraphModels {
    const GreyBoxGraph* graph = nullptr;
    std::map<int, NodeModelView> nodes;
};

struct SolverBudget {
    enum class Phase1 { Sobol, Grid };
    Phase1 phase1 = Phase1::Sobol;
    int phase1_points = 2048;     // Sobol candidate count
    int grid_points_x = 41;       // per x axis in Grid mode
    int grid_points_theta = 21;   // per theta axis in Grid mode
    int refine_starts = 5;
    int refine_iters = 200;
    double infeasibility_tolerance = 1e-6;
    double constraint_tolerance = 1e-9;  // admission threshold for optimistic constraints
};

struct AuxiliarySolution {
    Eigen::VectorXd x;
    std::vector<Eigen::VectorXd> z_bar;  // objective first, then constraints
    Eigen::VectorXd theta;               // flattened per-function fractions
    double objective = 0.0;
    bool feasible = true;
};

// Topological pass: white nodes evaluate exactly, black nodes take
// z = l + θ·(u − l) at the planned augmented state.  theta is ordered by
// ascending black node id and must have one entry per black node.
Eigen::VectorXd forward_plausible(const GraphModels& fm, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& theta);

// Minimum slack min(z−l, u−z) over black nodes of a planned trajectory;
// plausible plans have slack ≥ −1e−9.
double plausibility_slack(const GraphModels& fm, const Eigen::VectorXd& x, const Eigen::VectorXd& z);

AuxiliarySolution solve_unconstrained(const GraphModels& objective, const SolverBudget& budget);

// Minimizes the optimistic objective subject to optimistic constraint values
// ≤ 0.  Sets feasible = false when no candidate passes the admission
// threshold and a dedicated minimization of max_k (constraint value) stays
// above infeasibility_tolerance.
AuxiliarySolution solve_constrained(const GraphModels& objective,
                                    const std::vector<GraphModels>& constraints,
                                    const SolverBudget& budget);

SolverBudget solver_budget_from_config(const class ConfigSection& section);

}  // namespace gbopt
