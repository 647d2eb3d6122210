#include "gbopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gbopt/config.hpp"
#include "gbopt/errors.hpp"
#include "gbopt/rng.hpp"

namespace gbopt {

void RunConfig::validate() const {
    if (T < 1) throw ConfigParseError("run config needs T >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigParseError("run config needs delta in (0,1)");
    if (sigma < 0.0) throw ConfigParseError("run config needs sigma >= 0");
    if (!(beta_scale > 0.0)) throw ConfigParseError("run config needs beta_scale > 0");
}

namespace {

struct Engine {
    const Problem& problem;
    const RunConfig& config;
    std::map<std::string, GpModel> pool;  // keyed by oracle id, shared across functions
    int m_total = 0;
    std::map<int, double> discrepancy;  // objective black node id → A_i
    std::mt19937_64 noise_rng;

    Engine(const Problem& p, const RunConfig& c)
        : problem(p), config(c), noise_rng(make_rng(c.seed, 1)) {
        problem.validate();
        config.validate();
        m_total = problem.objective.node_count();
        for (const GreyBoxGraph& g : problem.constraints) m_total += g.node_count();
        discrepancy = problem.objective.discrepancy_constants();

        const double lambda = config.lambda_is_horizon ? GpModel::lambda_for_horizon(config.T)
                                                       : config.lambda_fixed;
        add_models(problem.objective, lambda);
        for (const GreyBoxGraph& g : problem.constraints) add_models(g, lambda);
    }

    void add_models(const GreyBoxGraph& g, double lambda) {
        for (const NodeSpec& n : g.nodes) {
            if (!n.is_black) continue;
            pool.try_emplace(n.oracle_id, *n.kernel, lambda);
        }
    }

    void set_lambda(double lambda) {
        for (auto& [id, gp] : pool) gp.set_lambda(lambda);
    }

    GraphModels views(const GreyBoxGraph& g) {
        GraphModels fm;
        fm.graph = &g;
        for (const NodeSpec& n : g.nodes) {
            if (!n.is_black) continue;
            NodeModelView view;
            view.gp = &pool.at(n.oracle_id);
            view.conf = ConfidenceModel{n.rkhs_norm_bound, config.sigma, m_total, config.delta,
                                        config.beta_scale};
            fm.nodes.emplace(n.id, view);
        }
        return fm;
    }

    const GreyBoxGraph& function_graph(int fi) const {
        return fi == 0 ? problem.objective : problem.constraints[static_cast<std::size_t>(fi - 1)];
    }

    // One Alg-loop iteration; returns false when infeasibility was declared.
    bool step(int t, RunTrace& trace) {
        const GraphModels obj_view = views(problem.objective);
        std::vector<GraphModels> con_views;
        con_views.reserve(problem.constraints.size());
        for (const GreyBoxGraph& g : problem.constraints) con_views.push_back(views(g));

        const AuxiliarySolution aux = con_views.empty()
                                          ? solve_unconstrained(obj_view, config.budget)
                                          : solve_constrained(obj_view, con_views, config.budget);
        if (!aux.feasible) {
            trace.outcome = RunTrace::Outcome::InfeasibilityDeclared;
            trace.declared_at = t;
            return false;
        }

        StepRecord rec;
        rec.t = t;
        rec.x = aux.x;
        rec.z_bar = aux.z_bar;
        rec.objective_estimate = aux.objective;

        const int functions = 1 + problem.constraint_count();
        rec.z_true.reserve(functions);
        for (int fi = 0; fi < functions; ++fi) {
            rec.z_true.push_back(function_graph(fi).propagate_true(aux.x));
        }
        rec.f = rec.z_true[0][rec.z_true[0].size() - 1];
        rec.g.resize(problem.constraint_count());
        rec.violation.resize(problem.constraint_count());
        for (int k = 0; k < problem.constraint_count(); ++k) {
            rec.g[k] = rec.z_true[k + 1][rec.z_true[k + 1].size() - 1];
            rec.violation[k] = std::max(rec.g[k], 0.0);
        }
        rec.regret = problem.ground_truth ? rec.f - problem.ground_truth->f_star
                                          : std::numeric_limits<double>::quiet_NaN();

        // Planned observations at s̄; exact duplicate queries of the same
        // oracle within a step are made once and shared.
        std::normal_distribution<double> noise(0.0, 1.0);
        std::map<std::pair<std::string, std::string>, double> seen;
        for (int fi = 0; fi < functions; ++fi) {
            const GreyBoxGraph& g = function_graph(fi);
            const GraphModels& fm = fi == 0 ? obj_view : con_views[static_cast<std::size_t>(fi - 1)];
            for (const NodeSpec& n : g.nodes) {
                if (!n.is_black) continue;
                NodeObservation obs;
                obs.function_index = fi;
                obs.node_id = n.id;
                obs.oracle_id = n.oracle_id;
                obs.s = g.node_input(n.id, aux.x, rec.z_bar[static_cast<std::size_t>(fi)]);

                const NodeModelView& view = fm.nodes.at(n.id);
                obs.beta = view.conf.beta(view.gp->info_gain());
                obs.sd = view.gp->posterior(obs.s).sd();

                std::ostringstream key;
                for (Eigen::Index i = 0; i < obs.s.size(); ++i) key << format_double(obs.s[i]) << ',';
                const auto [it, inserted] = seen.try_emplace({n.oracle_id, key.str()}, 0.0);
                if (inserted) {
                    double y = n.oracle(obs.s);
                    if (config.sigma > 0.0) y += config.sigma * noise(noise_rng);
                    it->second = y;
                    obs.y = y;
                    obs.fed = true;
                } else {
                    obs.y = it->second;
                    obs.fed = false;
                }
                rec.observations.push_back(std::move(obs));
            }
        }

        double bound = 0.0;
        for (const NodeObservation& obs : rec.observations) {
            if (obs.function_index != 0) continue;
            bound += discrepancy.at(obs.node_id) * obs.beta * obs.sd;
        }
        rec.discrepancy_bound = bound;
        rec.discrepancy_actual = std::abs(rec.f - rec.z_bar[0][rec.z_bar[0].size() - 1]);

        for (const NodeObservation& obs : rec.observations) {
            if (obs.fed) pool.at(obs.oracle_id).update(obs.s, obs.y);
        }
        trace.records.push_back(std::move(rec));
        return true;
    }
};

RunTrace run_plain(const Problem& problem, const RunConfig& config) {
    Engine engine(problem, config);
    RunTrace trace;
    for (std::uint64_t t = 1; t <= config.T; ++t) {
        if (!engine.step(static_cast<int>(t), trace)) break;
    }
    return trace;
}

}  // namespace

RunTrace run_unconstrained(const Problem& problem, const RunConfig& config) {
    if (problem.constraint_count() != 0) {
        throw DimensionMismatchError("run_unconstrained requires a problem without constraints");
    }
    return run_plain(problem, config);
}

RunTrace run_constrained(const Problem& problem, const RunConfig& config) {
    return run_plain(problem, config);
}

RunTrace run_with_doubling(const Problem& problem, const RunConfig& config) {
    Engine engine(problem, config);
    RunTrace trace;
    std::uint64_t done = 0;
    std::uint64_t round_T = 1;
    while (done < config.T && trace.outcome == RunTrace::Outcome::Completed) {
        engine.set_lambda(config.lambda_is_horizon ? GpModel::lambda_for_horizon(round_T)
                                                   : config.lambda_fixed);
        for (std::uint64_t i = 0; i < round_T && done < config.T; ++i) {
            ++done;
            if (!engine.step(static_cast<int>(done), trace)) break;
        }
        round_T *= 2;
    }
    return trace;
}

namespace {

// Norm of the (regularised) minimum-norm interpolant of `fn` on a grid.  This is a
// certified lower bound on the RKHS norm of `fn`, so it is the most favourable value
// the flattened model can validly assume; a sup-norm heuristic would undercover,
// since sup|f| <= ||f|| * sqrt(sup k(x,x)).
double fitted_norm_floor(const OracleFn& fn, const Kernel& kernel,
                         const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         int points_per_axis) {
    const Eigen::MatrixXd grid = dense_grid(lo, hi, points_per_axis);
    Eigen::VectorXd y(grid.rows());
    for (Eigen::Index r = 0; r < grid.rows(); ++r) y[r] = fn(grid.row(r).transpose());
    const Eigen::MatrixXd gram = kernel.gram(grid);
    double jitter = 1e-8 * std::max(gram.diagonal().mean(), 1e-12);
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd regularised = gram;
        regularised.diagonal().array() += jitter;
        const Eigen::LLT<Eigen::MatrixXd> llt(regularised);
        if (llt.info() == Eigen::Success) return std::sqrt(std::max(y.dot(llt.solve(y)), 0.0));
        jitter *= 100.0;
    }
    throw NumericalBreakdownError("norm floor fit failed to factorise");
}

}  // namespace

Problem derive_blackbox_problem(const Problem& problem) {
    Problem flat;
    flat.name = problem.name + "_blackbox";
    flat.family = problem.family;
    flat.seed = problem.seed;
    flat.ground_truth = problem.ground_truth;
    flat.rejection_count = problem.rejection_count;

    const GreyBoxGraph& src = problem.objective;
    const int n = src.input_dim;
    std::vector<ParentRef> parents;
    for (int j = 0; j < n; ++j) parents.push_back(ParentRef::input(j));

    // GP kernel over x, reusing the smoothness scale of the first black node
    double ls = 1.0;
    double scale = 1.0;
    for (const NodeSpec& node : src.nodes) {
        if (node.is_black) {
            ls = node.kernel->lengthscales()[0];
            scale = node.kernel->scale();
            break;
        }
    }
    const Kernel kernel = Kernel::squared_exponential(Eigen::VectorXd::Constant(n, ls), scale);

    const auto flatten = [&](const GreyBoxGraph& g, const std::string& tag) {
        GreyBoxGraph out;
        out.input_dim = n;
        out.domain_lower = src.domain_lower;
        out.domain_upper = src.domain_upper;

        NodeSpec node;
        node.id = 0;
        node.is_black = true;
        node.parents = parents;
        node.oracle_id = "composite:" + tag + ":" + problem.name;
        node.oracle = [source = g](const Eigen::VectorXd& x) {
            const Eigen::VectorXd z = source.propagate_true(x);
            return z[z.size() - 1];
        };
        node.kernel = kernel;
        const double gmax = grid_max_abs(node.oracle, out.domain_lower, out.domain_upper,
                                         n <= 2 ? 101 : 41);
        const double fitted = fitted_norm_floor(node.oracle, kernel, out.domain_lower,
                                                out.domain_upper, n <= 2 ? 21 : 7);
        node.rkhs_norm_bound =
            std::max({fitted, gmax / std::sqrt(std::max(kernel.scale(), 1e-12)), 1e-6});
        node.output_bound = std::max(node.rkhs_norm_bound, 1.1 * std::max(gmax, 1e-6));
        node.lipschitz = estimate_lipschitz(node.oracle, out.domain_lower, out.domain_upper,
                                            n <= 2 ? 101 : 41);
        node.lipschitz = std::max(node.lipschitz, 1e-6);
        out.nodes.push_back(std::move(node));
        return out;
    };

    flat.objective = flatten(problem.objective, "objective");
    for (int k = 0; k < problem.constraint_count(); ++k) {
        flat.constraints.push_back(flatten(problem.constraints[static_cast<std::size_t>(k)],
                                           "constraint" + std::to_string(k + 1)));
    }
    return flat;
}

RunTrace run_blackbox_baseline(const Problem& problem, const RunConfig& config) {
    const Problem flat = derive_blackbox_problem(problem);
    RunConfig flat_config = config;
    flat_config.mode = RunConfig::Mode::Greybox;  // already flattened
    return flat_config.doubling ? run_with_doubling(flat, flat_config) : run_plain(flat, flat_config);
}

RunTrace run(const Problem& problem, const RunConfig& config) {
    if (config.mode == RunConfig::Mode::BlackboxBaseline) return run_blackbox_baseline(problem, config);
    if (config.doubling) return run_with_doubling(problem, config);
    return run_plain(problem, config);
}

}  // namespace gbopt
