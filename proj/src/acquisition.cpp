#include "gbopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gbopt/config.hpp"
#include "gbopt/errors.hpp"
#include "gbopt/nelder_mead.hpp"
#include "gbopt/sobol.hpp"

namespace gbopt {

Eigen::VectorXd forward_plausible(const GraphModels& fm, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& theta) {
    const GreyBoxGraph& graph = *fm.graph;
    const int m = graph.node_count();
    Eigen::VectorXd z(m);
    Eigen::Index next_theta = 0;
    for (int i = 0; i < m; ++i) {
        const NodeSpec& n = graph.nodes[i];
        const Eigen::VectorXd s = graph.node_input(i, x, z);
        if (n.is_black) {
            if (next_theta >= theta.size()) {
                throw DimensionMismatchError("forward_plausible: theta shorter than black node count");
            }
            const auto it = fm.nodes.find(i);
            if (it == fm.nodes.end()) {
                throw DimensionMismatchError("forward_plausible: missing model for black node " +
                                             std::to_string(i));
            }
            const auto [l, u] = it->second.bounds(s);
            z[i] = l + theta[next_theta++] * (u - l);
        } else {
            z[i] = n.expr(s);
        }
    }
    if (next_theta != theta.size()) {
        throw DimensionMismatchError("forward_plausible: theta longer than black node count");
    }
    return z;
}

double plausibility_slack(const GraphModels& fm, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
    const GreyBoxGraph& graph = *fm.graph;
    double slack = std::numeric_limits<double>::infinity();
    for (const NodeSpec& n : graph.nodes) {
        if (!n.is_black) continue;
        const Eigen::VectorXd s = graph.node_input(n.id, x, z);
        const auto [l, u] = fm.nodes.at(n.id).bounds(s);
        slack = std::min({slack, z[n.id] - l, u - z[n.id]});
    }
    return slack;
}

namespace {

struct Candidate {
    Eigen::VectorXd x;
    Eigen::VectorXd theta;
    std::vector<Eigen::VectorXd> z;  // per function
    double objective = std::numeric_limits<double>::infinity();
    double max_violation = 0.0;      // max_k constraint value (0 when K = 0)
    double total_violation = 0.0;    // Σ_k [value]^+
    bool evaluated = false;
};

int lex_compare(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i] < b[i]) return -1;
        if (a[i] > b[i]) return 1;
    }
    return 0;
}

// Deterministic total preference order used by both phases.
bool better(const Candidate& a, const Candidate& b, double ctol) {
    if (!a.evaluated) return false;
    if (!b.evaluated) return true;
    const bool fa = a.max_violation <= ctol;
    const bool fb = b.max_violation <= ctol;
    if (fa != fb) return fa;
    if (!fa) {
        if (a.max_violation != b.max_violation) return a.max_violation < b.max_violation;
    }
    if (a.objective != b.objective) return a.objective < b.objective;
    if (a.total_violation != b.total_violation) return a.total_violation < b.total_violation;
    const int cx = lex_compare(a.x, b.x);
    if (cx != 0) return cx < 0;
    return lex_compare(a.theta, b.theta) < 0;
}

class AuxiliarySearch {
public:
    AuxiliarySearch(const GraphModels& objective, const std::vector<GraphModels>& constraints,
                    const SolverBudget& budget)
        : objective_(objective), constraints_(constraints), budget_(budget) {
        const GreyBoxGraph& g = *objective.graph;
        n_ = g.input_dim;
        theta_offsets_.push_back(0);
        theta_total_ = static_cast<int>(g.black_set().size());
        for (const GraphModels& c : constraints_) {
            if (c.graph->input_dim != n_ || c.graph->domain_lower != g.domain_lower ||
                c.graph->domain_upper != g.domain_upper) {
                throw DimensionMismatchError("constraint graphs must share the objective's input domain");
            }
            theta_offsets_.push_back(theta_total_);
            theta_total_ += static_cast<int>(c.graph->black_set().size());
        }
        theta_offsets_.push_back(theta_total_);
        dim_ = n_ + theta_total_;
    }

    Candidate evaluate(const Eigen::VectorXd& u) const {
        Candidate c;
        c.x.resize(n_);
        const GreyBoxGraph& g = *objective_.graph;
        for (int j = 0; j < n_; ++j) {
            c.x[j] = g.domain_lower[j] + u[j] * (g.domain_upper[j] - g.domain_lower[j]);
        }
        c.theta = u.tail(theta_total_);
        c.z.reserve(1 + constraints_.size());

        const Eigen::VectorXd theta_obj = c.theta.segment(theta_offsets_[0],
                                                          theta_offsets_[1] - theta_offsets_[0]);
        c.z.push_back(forward_plausible(objective_, c.x, theta_obj));
        c.objective = c.z.back()[c.z.back().size() - 1];

        c.max_violation = constraints_.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < constraints_.size(); ++k) {
            const Eigen::VectorXd theta_k = c.theta.segment(theta_offsets_[k + 1],
                                                            theta_offsets_[k + 2] - theta_offsets_[k + 1]);
            c.z.push_back(forward_plausible(constraints_[k], c.x, theta_k));
            const double value = c.z.back()[c.z.back().size() - 1];
            c.max_violation = std::max(c.max_violation, value);
            c.total_violation += std::max(value, 0.0);
        }
        c.evaluated = true;
        return c;
    }

    std::vector<Eigen::VectorXd> phase1_candidates() const {
        std::vector<Eigen::VectorXd> out;
        if (budget_.phase1 == SolverBudget::Phase1::Sobol) {
            SobolSequence seq(dim_);
            const Eigen::MatrixXd pts = seq.points(static_cast<std::uint64_t>(budget_.phase1_points));
            out.reserve(pts.rows());
            for (Eigen::Index r = 0; r < pts.rows(); ++r) out.push_back(pts.row(r).transpose());
            return out;
        }
        // full factorial grid, x axes then theta axes
        std::vector<int> counts(dim_);
        for (int j = 0; j < dim_; ++j) counts[j] = j < n_ ? budget_.grid_points_x : budget_.grid_points_theta;
        long long total = 1;
        for (int cnt : counts) {
            total *= cnt;
            if (total > (1ll << 22)) {
                throw NumericalBreakdownError("grid phase-1 would enumerate more than 2^22 points");
            }
        }
        Eigen::VectorXd u = Eigen::VectorXd::Zero(dim_);
        std::vector<int> idx(dim_, 0);
        out.reserve(static_cast<std::size_t>(total));
        for (long long p = 0; p < total; ++p) {
            for (int j = 0; j < dim_; ++j) {
                u[j] = counts[j] == 1 ? 0.5 : static_cast<double>(idx[j]) / (counts[j] - 1);
            }
            out.push_back(u);
            for (int j = dim_ - 1; j >= 0; --j) {
                if (++idx[j] < counts[j]) break;
                idx[j] = 0;
            }
        }
        return out;
    }

    // Nelder-Mead refinement of `start` under `merit`, returning the exact
    // re-evaluation of the refined point.
    Candidate refine(const Eigen::VectorXd& start,
                     const std::function<double(const Candidate&)>& merit) const {
        const auto f = [&](const Eigen::VectorXd& u) { return merit(evaluate(u)); };
        const NelderMeadResult r = nelder_mead_minimize(f, start, Eigen::VectorXd::Zero(dim_),
                                                        Eigen::VectorXd::Ones(dim_), budget_.refine_iters);
        return evaluate(r.x);
    }

    int dim() const { return dim_; }

    const GraphModels& objective_;
    const std::vector<GraphModels>& constraints_;
    const SolverBudget& budget_;
    int n_ = 0;
    int theta_total_ = 0;
    int dim_ = 0;
    std::vector<int> theta_offsets_;  // per function, into the flattened theta
};

AuxiliarySolution to_solution(const Candidate& c, bool feasible) {
    AuxiliarySolution s;
    s.x = c.x;
    s.theta = c.theta;
    s.z_bar = c.z;
    s.objective = c.objective;
    s.feasible = feasible;
    return s;
}

AuxiliarySolution solve(const GraphModels& objective, const std::vector<GraphModels>& constraints,
                        const SolverBudget& budget) {
    const AuxiliarySearch search(objective, constraints, budget);
    const double ctol = budget.constraint_tolerance;

    std::vector<Eigen::VectorXd> starts = search.phase1_candidates();
    std::vector<Candidate> pool;
    pool.reserve(starts.size());
    for (const Eigen::VectorXd& u : starts) pool.push_back(search.evaluate(u));

    auto order = [&](const Candidate& a, const Candidate& b) { return better(a, b, ctol); };
    std::vector<std::size_t> ranking(pool.size());
    for (std::size_t i = 0; i < ranking.size(); ++i) ranking[i] = i;
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](std::size_t a, std::size_t b) { return order(pool[a], pool[b]); });

    Candidate best = pool[ranking.front()];

    const auto merit = [&](const Candidate& c) {
        if (constraints.empty() || c.max_violation <= ctol) return c.objective;
        return 1e6 + c.max_violation;
    };
    const int starts_used = std::min<int>(budget.refine_starts, static_cast<int>(ranking.size()));
    for (int i = 0; i < starts_used && budget.refine_iters > 0; ++i) {
        const Candidate& seed = pool[ranking[static_cast<std::size_t>(i)]];
        Eigen::VectorXd u(search.dim());
        const GreyBoxGraph& g = *objective.graph;
        for (int j = 0; j < search.n_; ++j) {
            const double span = g.domain_upper[j] - g.domain_lower[j];
            u[j] = span > 0 ? (seed.x[j] - g.domain_lower[j]) / span : 0.5;
        }
        u.tail(search.theta_total_) = seed.theta;
        const Candidate refined = search.refine(u, merit);
        if (order(refined, best)) best = refined;
    }

    if (constraints.empty() || best.max_violation <= ctol) return to_solution(best, true);

    // No admitted candidate: dedicated minimization of the worst constraint.
    const auto violation_merit = [](const Candidate& c) { return c.max_violation; };
    Candidate least_violating = best;
    for (int i = 0; i < starts_used && budget.refine_iters > 0; ++i) {
        const Candidate& seed = pool[ranking[static_cast<std::size_t>(i)]];
        Eigen::VectorXd u(search.dim());
        const GreyBoxGraph& g = *objective.graph;
        for (int j = 0; j < search.n_; ++j) {
            const double span = g.domain_upper[j] - g.domain_lower[j];
            u[j] = span > 0 ? (seed.x[j] - g.domain_lower[j]) / span : 0.5;
        }
        u.tail(search.theta_total_) = seed.theta;
        const Candidate refined = search.refine(u, violation_merit);
        if (order(refined, best)) best = refined;
        if (refined.max_violation < least_violating.max_violation) least_violating = refined;
    }

    if (best.max_violation <= ctol) return to_solution(best, true);
    if (least_violating.max_violation > budget.infeasibility_tolerance) {
        return to_solution(least_violating, false);
    }
    return to_solution(least_violating, true);
}

}  // namespace

AuxiliarySolution solve_unconstrained(const GraphModels& objective, const SolverBudget& budget) {
    return solve(objective, {}, budget);
}

AuxiliarySolution solve_constrained(const GraphModels& objective,
                                    const std::vector<GraphModels>& constraints,
                                    const SolverBudget& budget) {
    return solve(objective, constraints, budget);
}

SolverBudget solver_budget_from_config(const ConfigSection& section) {
    SolverBudget budget;
    const std::string phase1 = section.get_or("phase1", "sobol");
    if (phase1 == "sobol") {
        budget.phase1 = SolverBudget::Phase1::Sobol;
    } else if (phase1 == "grid") {
        budget.phase1 = SolverBudget::Phase1::Grid;
    } else {
        throw ConfigParseError("phase1 must be 'sobol' or 'grid', got '" + phase1 + "'");
    }
    budget.phase1_points = section.get_int_or("phase1_points", budget.phase1_points);
    budget.grid_points_x = section.get_int_or("grid_points_x", budget.grid_points_x);
    budget.grid_points_theta = section.get_int_or("grid_points_theta", budget.grid_points_theta);
    budget.refine_starts = section.get_int_or("refine_starts", budget.refine_starts);
    budget.refine_iters = section.get_int_or("refine_iters", budget.refine_iters);
    budget.infeasibility_tolerance =
        section.get_double_or("infeasibility_tolerance", budget.infeasibility_tolerance);
    budget.constraint_tolerance = section.get_double_or("constraint_tolerance", budget.constraint_tolerance);
    return budget;
}

}  // namespace gbopt
