#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <random>

#include "gbopt/acquisition.hpp"
#include "gbopt/config.hpp"
#include "gbopt/errors.hpp"
#include "gbopt/rng.hpp"
#include "oracles.hpp"

using namespace gbopt;

namespace {

GreyBoxGraph box_graph(int n, double lo, double hi) {
    GreyBoxGraph g;
    g.input_dim = n;
    g.domain_lower = Eigen::VectorXd::Constant(n, lo);
    g.domain_upper = Eigen::VectorXd::Constant(n, hi);
    return g;
}

GreyBoxGraph single_black(const std::string& name, OracleFn fn, double B, double C,
                          double lo = -1.0, double hi = 1.0, double ls = 0.5) {
    register_oracle(name, std::move(fn));
    GreyBoxGraph g = box_graph(1, lo, hi);
    NodeSpec node;
    node.id = 0;
    node.is_black = true;
    node.parents = {ParentRef::input(0)};
    node.oracle_id = "user:" + name;
    node.oracle = resolve_oracle(node.oracle_id);
    node.rkhs_norm_bound = B;
    node.kernel = Kernel::squared_exponential(ls, 1.0);
    node.output_bound = C;
    node.lipschitz = 2.0;
    g.nodes.push_back(node);
    g.validate();
    return g;
}

GraphModels make_models(const GreyBoxGraph& g, std::map<std::string, GpModel>& pool,
                        double sigma, int m_total, double delta) {
    GraphModels fm;
    fm.graph = &g;
    for (int id : g.black_set()) {
        const NodeSpec& n = g.nodes[static_cast<std::size_t>(id)];
        auto it = pool.find(n.oracle_id);
        if (it == pool.end()) it = pool.emplace(n.oracle_id, GpModel(*n.kernel)).first;
        ConfidenceModel conf;
        conf.B = n.rkhs_norm_bound;
        conf.sigma = sigma;
        conf.m = m_total;
        conf.delta = delta;
        fm.nodes[id] = NodeModelView{&it->second, conf};
    }
    return fm;
}

SolverBudget grid_budget(int px, int pt, int refine_iters = 0) {
    SolverBudget b;
    b.phase1 = SolverBudget::Phase1::Grid;
    b.grid_points_x = px;
    b.grid_points_theta = pt;
    b.refine_iters = refine_iters;
    return b;
}

}  // namespace

TEST_CASE("all-white graph reduces to deterministic box minimization") {
    // f(x) = (x1 - 0.3)^2 + (x2 + 0.4)^2, minimum 0 at (0.3, -0.4)
    GreyBoxGraph g = box_graph(2, -1.0, 1.0);
    NodeSpec node;
    node.id = 0;
    node.parents = {ParentRef::input(0), ParentRef::input(1)};
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd b(2);
    b << -0.6, 0.8;
    node.expr = make_quadratic(Q, b, 0.09 + 0.16);
    node.output_bound = 10.0;
    node.lipschitz = 5.0;
    g.nodes.push_back(node);
    g.validate();

    std::map<std::string, GpModel> pool;
    const GraphModels fm = make_models(g, pool, 0.0, 1, 0.05);
    SolverBudget budget = grid_budget(21, 1, 200);
    budget.refine_starts = 3;
    const AuxiliarySolution sol = solve_unconstrained(fm, budget);
    CHECK(sol.feasible);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(sol.x[0] == doctest::Approx(0.3).epsilon(1e-4));
    CHECK(sol.x[1] == doctest::Approx(-0.4).epsilon(1e-4));
    CHECK(sol.theta.size() == 0);
}

TEST_CASE("theta endpoints hit the confidence interval ends") {
    const GreyBoxGraph g = single_black("aq_lin", [](const Eigen::VectorXd& s) { return 0.5 * s[0]; },
                                        1.0, 1.0);
    std::map<std::string, GpModel> pool;
    GraphModels fm = make_models(g, pool, 0.1, 1, 0.05);
    Eigen::VectorXd pt(1);
    pt << 0.2;
    pool.begin()->second.update(pt, 0.1);

    Eigen::VectorXd x(1);
    x << -0.7;
    const auto [l, u] = fm.nodes.at(0).bounds(x);
    CHECK(l < u);
    Eigen::VectorXd theta(1);
    theta << 0.0;
    CHECK(forward_plausible(fm, x, theta)[0] == doctest::Approx(l).epsilon(1e-15));
    theta << 1.0;
    CHECK(forward_plausible(fm, x, theta)[0] == doctest::Approx(u).epsilon(1e-15));
    theta << 0.25;
    const double z_mid = forward_plausible(fm, x, theta)[0];
    CHECK(z_mid == doctest::Approx(l + 0.25 * (u - l)).epsilon(1e-15));

    Eigen::VectorXd z(1);
    z << z_mid;
    CHECK(plausibility_slack(fm, x, z) >= 0.0);
    z << u + 0.1;
    CHECK(plausibility_slack(fm, x, z) < 0.0);

    Eigen::VectorXd bad;
    CHECK_THROWS_AS(forward_plausible(fm, x, bad), DimensionMismatchError);
    Eigen::VectorXd too_long(2);
    too_long << 0.5, 0.5;
    CHECK_THROWS_AS(forward_plausible(fm, x, too_long), DimensionMismatchError);
}

TEST_CASE("with no data the optimistic objective is the lower clip -B") {
    const GreyBoxGraph g = single_black("aq_prior", [](const Eigen::VectorXd&) { return 0.0; },
                                        1.0, 1.0);
    std::map<std::string, GpModel> pool;
    const GraphModels fm = make_models(g, pool, 0.1, 1, 0.05);
    const AuxiliarySolution sol = solve_unconstrained(fm, grid_budget(9, 5));
    CHECK(sol.feasible);
    CHECK(sol.objective == -1.0);
    // ties broken toward the lexicographically smallest x then theta
    CHECK(sol.x[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(sol.theta[0] == 0.0);
}

TEST_CASE("grid-mode solve matches exhaustive enumeration") {
    const GreyBoxGraph g = single_black("aq_sine", [](const Eigen::VectorXd& s) {
        return 0.8 * std::sin(3.0 * s[0]);
    }, 1.2, 1.2);
    std::map<std::string, GpModel> pool;
    GraphModels fm = make_models(g, pool, 0.05, 1, 0.1);

    std::mt19937_64 rng = make_rng(17, 0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.05);
    GpModel& gp = pool.begin()->second;
    for (int i = 0; i < 7; ++i) {
        Eigen::VectorXd xi(1);
        xi << unit(rng);
        gp.update(xi, 0.8 * std::sin(3.0 * xi[0]) + noise(rng));
    }

    const SolverBudget budget = grid_budget(41, 21);
    const AuxiliarySolution sol = solve_unconstrained(fm, budget);
    const oracles::EnumeratedBest ref = oracles::enumerate_grid(fm, {}, 41, 21,
                                                                budget.constraint_tolerance);
    CHECK(sol.objective == doctest::Approx(ref.objective).epsilon(1e-9));
    CHECK(sol.x[0] == doctest::Approx(ref.x[0]).epsilon(1e-12));
    CHECK(sol.theta[0] == doctest::Approx(ref.theta[0]).epsilon(1e-12));
}

TEST_CASE("constrained grid-mode solve matches exhaustive enumeration") {
    const GreyBoxGraph obj = single_black("aq_obj", [](const Eigen::VectorXd& s) {
        return 0.5 * s[0] * s[0] - 0.3;
    }, 1.0, 1.0);
    const GreyBoxGraph con = single_black("aq_con", [](const Eigen::VectorXd& s) {
        return 0.6 - s[0];
    }, 1.6, 1.6);

    std::map<std::string, GpModel> pool;
    GraphModels fo = make_models(obj, pool, 0.05, 2, 0.1);
    GraphModels fc = make_models(con, pool, 0.05, 2, 0.1);

    std::mt19937_64 rng = make_rng(23, 0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd xi(1);
        xi << unit(rng);
        pool.at("user:aq_obj").update(xi, 0.5 * xi[0] * xi[0] - 0.3);
        pool.at("user:aq_con").update(xi, 0.6 - xi[0]);
    }

    const SolverBudget budget = grid_budget(41, 21);
    const AuxiliarySolution sol = solve_constrained(fo, {fc}, budget);
    const oracles::EnumeratedBest ref =
        oracles::enumerate_grid(fo, {fc}, 41, 21, budget.constraint_tolerance);
    CHECK(sol.feasible);
    CHECK(sol.objective == doctest::Approx(ref.objective).epsilon(1e-9));
    CHECK(sol.x[0] == doctest::Approx(ref.x[0]).epsilon(1e-12));
    for (Eigen::Index i = 0; i < sol.theta.size(); ++i) {
        CHECK(sol.theta[i] == doctest::Approx(ref.theta[i]).epsilon(1e-12));
    }
}

TEST_CASE("returned plans are plausible and dominate random plausible plans") {
    const GreyBoxGraph g = single_black("aq_dom", [](const Eigen::VectorXd& s) {
        return std::cos(2.0 * s[0]) * 0.6;
    }, 1.1, 1.1);
    std::map<std::string, GpModel> pool;
    GraphModels fm = make_models(g, pool, 0.05, 1, 0.1);
    std::mt19937_64 rng = make_rng(29, 0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GpModel& gp = pool.begin()->second;
    for (int i = 0; i < 5; ++i) {
        Eigen::VectorXd xi(1);
        xi << unit(rng);
        gp.update(xi, std::cos(2.0 * xi[0]) * 0.6);
    }

    SolverBudget budget = grid_budget(41, 21, 150);
    budget.refine_starts = 4;
    const AuxiliarySolution sol = solve_unconstrained(fm, budget);
    CHECK(plausibility_slack(fm, sol.x, sol.z_bar[0]) >= -1e-9);
    CHECK(sol.x[0] >= -1.0);
    CHECK(sol.x[0] <= 1.0);

    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd x(1), theta(1);
        x << unit(rng);
        theta << frac(rng);
        const Eigen::VectorXd z = forward_plausible(fm, x, theta);
        CHECK(sol.objective <= z[z.size() - 1] + 1e-9);
    }
}

TEST_CASE("empty constraint list reduces to the unconstrained solver") {
    const GreyBoxGraph g = single_black("aq_red", [](const Eigen::VectorXd& s) { return s[0]; },
                                        1.0, 1.0);
    std::map<std::string, GpModel> pool;
    GraphModels fm = make_models(g, pool, 0.0, 1, 0.05);
    Eigen::VectorXd pt(1);
    pt << 0.1;
    pool.begin()->second.update(pt, 0.1);

    const SolverBudget budget = grid_budget(21, 11, 60);
    const AuxiliarySolution a = solve_unconstrained(fm, budget);
    const AuxiliarySolution b = solve_constrained(fm, {}, budget);
    CHECK(a.objective == b.objective);
    CHECK(a.x[0] == b.x[0]);
    CHECK(a.theta[0] == b.theta[0]);
    CHECK(b.feasible);
}

TEST_CASE("white-box constraint that is positive everywhere is declared infeasible") {
    // objective: anything; constraint g(x) = x1 on X = [1,2] x [0,1]
    GreyBoxGraph obj = box_graph(2, 0.0, 1.0);
    obj.domain_lower << 1.0, 0.0;
    obj.domain_upper << 2.0, 1.0;
    NodeSpec onode;
    onode.id = 0;
    onode.parents = {ParentRef::input(0), ParentRef::input(1)};
    onode.expr = make_affine((Eigen::VectorXd(2) << 1.0, 1.0).finished(), 0.0);
    onode.output_bound = 4.0;
    onode.lipschitz = 1.0;
    obj.nodes.push_back(onode);
    obj.validate();

    GreyBoxGraph con = obj;
    con.nodes[0].expr = make_affine((Eigen::VectorXd(2) << 1.0, 0.0).finished(), 0.0);
    con.validate();

    std::map<std::string, GpModel> pool;
    const GraphModels fo = make_models(obj, pool, 0.0, 1, 0.05);
    const GraphModels fc = make_models(con, pool, 0.0, 1, 0.05);

    SolverBudget budget = grid_budget(9, 1, 80);
    budget.refine_starts = 3;
    const AuxiliarySolution sol = solve_constrained(fo, {fc}, budget);
    CHECK_FALSE(sol.feasible);
    // the reported point minimizes the worst constraint: x1 driven to 1
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("optimism: optimistic minimum lies below the true minimum") {
    // truth inside the RKHS ball and noiseless data => l <= f <= u, so the
    // optimistic value at the true minimizer cannot exceed the true minimum
    const auto truth = [](const Eigen::VectorXd& s) { return 0.7 * std::exp(-0.5 * s.squaredNorm() / 0.25); };
    const GreyBoxGraph g = single_black("aq_opt", truth, 2.0, 2.0);
    std::map<std::string, GpModel> pool;
    GraphModels fm = make_models(g, pool, 0.0, 1, 0.05);
    std::mt19937_64 rng = make_rng(41, 0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GpModel& gp = pool.begin()->second;
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd xi(1);
        xi << unit(rng);
        gp.update(xi, truth(xi));
    }

    double true_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) {
        Eigen::VectorXd x(1);
        x << -1.0 + 2.0 * i / 400.0;
        true_min = std::min(true_min, truth(x));
    }

    SolverBudget budget = grid_budget(41, 21, 100);
    const AuxiliarySolution sol = solve_unconstrained(fm, budget);
    CHECK(sol.objective <= true_min + 1e-9);
}

TEST_CASE("solver output is bitwise deterministic") {
    const GreyBoxGraph g = single_black("aq_det", [](const Eigen::VectorXd& s) {
        return 0.4 * s[0] * s[0] - 0.2;
    }, 1.0, 1.0);
    std::map<std::string, GpModel> pool;
    GraphModels fm = make_models(g, pool, 0.05, 1, 0.05);
    Eigen::VectorXd pt(1);
    pt << -0.3;
    pool.begin()->second.update(pt, 0.2);

    SolverBudget budget;  // sobol phase 1
    budget.phase1_points = 256;
    budget.refine_starts = 3;
    budget.refine_iters = 80;
    const AuxiliarySolution a = solve_unconstrained(fm, budget);
    const AuxiliarySolution b = solve_unconstrained(fm, budget);
    CHECK(a.objective == b.objective);
    CHECK(a.x[0] == b.x[0]);
    CHECK(a.theta[0] == b.theta[0]);
}

TEST_CASE("solver budget parses from a config section") {
    const Config cfg = Config::parse_string(
        "[solver]\n"
        "phase1 = grid\n"
        "phase1_points = 512\n"
        "grid_points_x = 17\n"
        "grid_points_theta = 9\n"
        "refine_starts = 2\n"
        "refine_iters = 50\n"
        "infeasibility_tolerance = 1e-5\n"
        "constraint_tolerance = 1e-8\n",
        "solver.cfg");
    const SolverBudget b = solver_budget_from_config(cfg.require("solver"));
    CHECK(b.phase1 == SolverBudget::Phase1::Grid);
    CHECK(b.phase1_points == 512);
    CHECK(b.grid_points_x == 17);
    CHECK(b.grid_points_theta == 9);
    CHECK(b.refine_starts == 2);
    CHECK(b.refine_iters == 50);
    CHECK(b.infeasibility_tolerance == doctest::Approx(1e-5));
    CHECK(b.constraint_tolerance == doctest::Approx(1e-8));

    const Config bad = Config::parse_string("[solver]\nphase1 = random\n", "bad.cfg");
    CHECK_THROWS_AS(solver_budget_from_config(bad.require("solver")), ConfigParseError);
}
