#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "gbopt/benchmarks.hpp"
#include "gbopt/errors.hpp"
#include "gbopt/rng.hpp"

using namespace gbopt;

namespace {

// Recover an affine node's weights and offset by probing the expression.
struct AffineParts {
    Eigen::VectorXd w;
    double b = 0.0;
};

AffineParts probe_affine(const Expression& expr, int arity) {
    AffineParts parts;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(arity);
    parts.b = expr(zero);
    parts.w.resize(arity);
    for (int i = 0; i < arity; ++i) {
        Eigen::VectorXd e = zero;
        e[i] = 1.0;
        parts.w[i] = expr(e) - parts.b;
    }
    return parts;
}

}  // namespace

TEST_CASE("rff draws are deterministic and follow the kernel") {
    const Kernel k = Kernel::squared_exponential(Eigen::VectorXd::Constant(2, 1.0 / std::sqrt(2.0)), 0.5);
    Eigen::VectorXd a(2), b(2);
    a << 0.3, -1.1;
    b << -0.4, 0.2;

    const RffFunction f1(k, 42, 16, 2);
    const RffFunction f2(k, 42, 16, 2);
    CHECK(f1(a) == f2(a));
    CHECK(f1(b) == f2(b));
    const RffFunction f3(k, 43, 16, 2);
    CHECK(f1(a) != f3(a));

    // kernel self-value: k(x, x) = 1/2 everywhere
    CHECK(k(a, a) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k(b, b) == doctest::Approx(0.5).epsilon(1e-15));

    // Monte-Carlo covariance across seeds matches the kernel within 3 SEs
    const int reps = 2000;
    double sum = 0.0, sum_sq = 0.0;
    for (int seed = 0; seed < reps; ++seed) {
        const RffFunction f(k, static_cast<std::uint64_t>(seed), 64, 2);
        const double prod = f(a) * f(b);
        sum += prod;
        sum_sq += prod * prod;
    }
    const double mean = sum / reps;
    const double var = sum_sq / reps - mean * mean;
    const double se = std::sqrt(var / reps);
    CHECK(std::abs(mean - k(a, b)) <= 3.0 * se + 1e-12);

    // feature-count convergence of the induced covariance
    const RffFunction g1(k, 7, 2048, 2);
    const RffFunction g2(k, 7, 4096, 2);
    std::mt19937_64 rng = make_rng(3, 0);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        Eigen::VectorXd p(2), q(2);
        p << unit(rng), unit(rng);
        q << unit(rng), unit(rng);
        worst = std::max(worst, std::abs(g1.induced_covariance(p, q) - g2.induced_covariance(p, q)));
    }
    CHECK(worst < 0.02);

    CHECK_THROWS_AS(RffFunction(Kernel::matern(2.5, 1.0, 0.5), 1, 16, 2), UnsupportedKernelError);
}

TEST_CASE("kernel expansions carry their declared RKHS norm") {
    const Kernel k = Kernel::squared_exponential(0.6, 1.0);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -1.0);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 1.0);
    KernelExpansion f = sample_kernel_expansion(k, 11, 10, lo, hi, 1.5);
    CHECK(f.norm == doctest::Approx(1.5).epsilon(1e-12));

    // norm recomputed from first principles: sqrt(w' K w)
    const Eigen::MatrixXd K = k.gram(f.centers);
    CHECK(std::sqrt(f.weights.dot(K * f.weights)) == doctest::Approx(1.5).epsilon(1e-10));

    const KernelExpansion again = sample_kernel_expansion(k, 11, 10, lo, hi, 1.5);
    Eigen::VectorXd p(2);
    p << 0.2, -0.7;
    CHECK(f(p) == again(p));
}

TEST_CASE("grid utilities") {
    CHECK(default_grid_axis_points(1) == 201);
    CHECK(default_grid_axis_points(2) == 201);
    CHECK(default_grid_axis_points(3) == 61);
    CHECK(default_grid_axis_points(4) == 31);

    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, 0.0);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 1.0);
    const Eigen::MatrixXd grid = dense_grid(lo, hi, 3);
    REQUIRE(grid.rows() == 9);
    CHECK(grid(0, 0) == 0.0);
    CHECK(grid(0, 1) == 0.0);
    CHECK(grid(1, 1) == 0.5);  // last axis fastest
    CHECK(grid(8, 0) == 1.0);
    CHECK(grid(8, 1) == 1.0);

    const OracleFn linear = [](const Eigen::VectorXd& s) { return 2.0 * s[0] - 1.0 * s[1]; };
    CHECK(estimate_lipschitz(linear, lo, hi, 11) == doctest::Approx(2.0 * 1.2).epsilon(1e-12));
    CHECK(grid_max_abs(linear, lo, hi, 11) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lp_gp instances expose the stated structure") {
    const Problem p = generate_lp_gp(3);
    p.validate();
    CHECK(p.family == "lp_gp");
    CHECK(p.constraint_count() == 2);
    REQUIRE(p.ground_truth.has_value());
    CHECK(p.ground_truth->feasible_point_exists);

    const GreyBoxGraph& obj = p.objective;
    CHECK(obj.input_dim == 2);
    CHECK(obj.domain_lower.minCoeff() == -2.0);
    CHECK(obj.domain_upper.maxCoeff() == 2.0);
    REQUIRE(obj.nodes.size() == 3);

    // two GP-sampled black nodes reading x only, then an affine terminal
    for (int i : {0, 1}) {
        const NodeSpec& n = obj.nodes[static_cast<std::size_t>(i)];
        CHECK(n.is_black);
        CHECK(n.oracle_id.rfind("rff:", 0) == 0);
        REQUIRE(n.parents.size() == 2);
        CHECK(n.parents[0] == ParentRef::input(0));
        CHECK(n.parents[1] == ParentRef::input(1));
        REQUIRE(n.kernel.has_value());
        Eigen::VectorXd probe(2);
        probe << 0.4, -1.0;
        CHECK((*n.kernel)(probe, probe) == doctest::Approx(0.5).epsilon(1e-15));
    }
    const NodeSpec& term = obj.nodes[2];
    CHECK_FALSE(term.is_black);
    REQUIRE(term.parents.size() == 4);
    CHECK(term.parents[2] == ParentRef::node(0));
    CHECK(term.parents[3] == ParentRef::node(1));

    // unit norms of c1, c2, b and the A-rows
    const AffineParts obj_parts = probe_affine(term.expr, 4);
    CHECK(obj_parts.w.head(2).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(obj_parts.w.tail(2).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(obj_parts.b == 0.0);

    Eigen::VectorXd b_vec(p.constraint_count());
    for (int k = 0; k < p.constraint_count(); ++k) {
        const GreyBoxGraph& c = p.constraints[static_cast<std::size_t>(k)];
        REQUIRE(c.nodes.size() == 3);
        // constraint shares the objective's black-box oracles (same GP keys)
        CHECK(c.nodes[0].oracle_id == obj.nodes[0].oracle_id);
        CHECK(c.nodes[1].oracle_id == obj.nodes[1].oracle_id);
        const AffineParts parts = probe_affine(c.nodes[2].expr, 4);
        CHECK(parts.w.head(2).norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(parts.w.tail(2).norm() == doctest::Approx(1.0).epsilon(1e-12));
        b_vec[k] = parts.b;
    }
    CHECK(b_vec.norm() == doctest::Approx(1.0).epsilon(1e-12));

    // composite really is c1'x + c2'h(x)
    std::mt19937_64 rng = make_rng(5, 0);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd x(2);
        x << unit(rng), unit(rng);
        Eigen::VectorXd h(2);
        h << obj.nodes[0].oracle(x), obj.nodes[1].oracle(x);
        const double direct = obj_parts.w.head(2).dot(x) + obj_parts.w.tail(2).dot(h);
        CHECK(p.true_objective(x) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("section 3.3 families have the stated shapes") {
    const Problem add = generate_section33(Section33Variant::Additive, 4);
    add.validate();
    REQUIRE(add.objective.nodes.size() == 4);
    CHECK(add.objective.black_set() == std::vector<int>{0, 1, 2});
    CHECK(add.objective.input_dim == 3);
    for (int i : {0, 1, 2}) {
        CHECK(add.objective.nodes[static_cast<std::size_t>(i)].parents.size() == 2);
    }
    // distinct 2-subsets of x
    CHECK(add.objective.nodes[0].parents != add.objective.nodes[1].parents);
    CHECK(add.objective.nodes[1].parents != add.objective.nodes[2].parents);

    const Problem sq = generate_section33(Section33Variant::SquaredComposition, 4);
    sq.validate();
    REQUIRE(sq.objective.nodes.size() == 3);
    const NodeSpec& sq_term = sq.objective.nodes[2];
    // f = z1^2 + z2^2; the zero plan maps to zero
    CHECK(sq_term.expr(Eigen::VectorXd::Zero(2)) == 0.0);
    CHECK(sq_term.expr((Eigen::VectorXd(2) << 0.3, -0.4).finished()) ==
          doctest::Approx(0.25).epsilon(1e-15));
    Eigen::VectorXd x(2);
    x << 0.2, -0.5;
    const double z1 = sq.objective.nodes[0].oracle(x);
    const double z2 = sq.objective.nodes[1].oracle(x);
    CHECK(sq.true_objective(x) == doctest::Approx(z1 * z1 + z2 * z2).epsilon(1e-12));

    const Problem hy = generate_section33(Section33Variant::HybridChain, 4);
    hy.validate();
    REQUIRE(hy.objective.nodes.size() == 3);
    CHECK(hy.objective.nodes[0].is_black);
    CHECK_FALSE(hy.objective.nodes[1].is_black);
    CHECK(hy.objective.nodes[2].is_black);
    // middle-node Lipschitz constant is sup |2u + 3| over u in [-C1, C1]
    const double C1 = hy.objective.nodes[0].output_bound;
    CHECK(hy.objective.nodes[1].lipschitz == doctest::Approx(2.0 * C1 + 3.0).epsilon(1e-12));
    Eigen::VectorXd x1(1);
    x1 << 0.35;
    const double u = hy.objective.nodes[0].oracle(x1);
    Eigen::VectorXd mid(1);
    mid << u * u + 3.0 * u - 3.0;
    CHECK(hy.true_objective(x1) ==
          doctest::Approx(hy.objective.nodes[2].oracle(mid)).epsilon(1e-12));
}

TEST_CASE("one-layer problems keep all black nodes at depth one") {
    const Problem p = generate_one_layer(6, 2);
    p.validate();
    CHECK(p.family == "one_layer");
    CHECK(p.constraint_count() == 2);
    REQUIRE(p.ground_truth.has_value());

    for (const GreyBoxGraph* g : {&p.objective, &p.constraints[0], &p.constraints[1]}) {
        for (int id : g->black_set()) {
            for (const ParentRef& parent : g->nodes[static_cast<std::size_t>(id)].parents) {
                CHECK(parent.kind == ParentRef::Kind::Input);
            }
        }
    }

    // combiner is affine in the layer outputs
    Eigen::VectorXd x(2);
    x << 0.3, 0.6;
    Eigen::VectorXd z(2);
    z << p.objective.nodes[0].oracle(x), p.objective.nodes[1].oracle(x);
    CHECK(p.true_objective(x) == doctest::Approx(0.7 * z[0] + 0.7 * z[1]).epsilon(1e-12));

    // with F(x, z) = z_1 the composite is exactly the first layer function
    Problem reduced = p;
    Eigen::VectorXd w(1);
    w << 1.0;
    NodeSpec pass;
    pass.id = 2;
    pass.parents = {ParentRef::node(0)};
    pass.expr = make_affine(w, 0.0);
    pass.lipschitz = 1.0;
    pass.output_bound = p.objective.nodes[0].output_bound;
    reduced.objective.nodes[2] = pass;
    reduced.constraints.clear();
    reduced.validate();
    CHECK(reduced.true_objective(x) == doctest::Approx(z[0]).epsilon(1e-15));
}

TEST_CASE("infeasible instances have constraint minimum exactly epsilon") {
    const Problem p = generate_infeasible(9, 0.3);
    p.validate();
    CHECK_FALSE(p.ground_truth.has_value());
    REQUIRE(p.constraint_count() == 1);

    double grid_min = std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd grid = dense_grid(p.objective.domain_lower, p.objective.domain_upper, 101);
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        grid_min = std::min(grid_min, p.true_constraints(grid.row(i).transpose())[0]);
    }
    CHECK(grid_min == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(grid_min > 0.0);
}

TEST_CASE("ground truth comes from the dense grid and reproduces bit-exactly") {
    // known affine optimum: f = x1 on [-1,1]^2, so f* = -1 at x1 = -1
    Problem toy;
    toy.name = "toy";
    toy.family = "toy";
    GreyBoxGraph g;
    g.input_dim = 2;
    g.domain_lower = Eigen::VectorXd::Constant(2, -1.0);
    g.domain_upper = Eigen::VectorXd::Constant(2, 1.0);
    NodeSpec n;
    n.id = 0;
    n.parents = {ParentRef::input(0), ParentRef::input(1)};
    n.expr = make_affine((Eigen::VectorXd(2) << 1.0, 0.0).finished(), 0.0);
    n.lipschitz = 1.0;
    n.output_bound = 2.0;
    g.nodes.push_back(n);
    toy.objective = g;
    toy.validate();

    const GroundTruth gt = compute_ground_truth(toy, 21);
    CHECK(gt.feasible_point_exists);
    CHECK(gt.f_star == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(gt.x_star[0] == doctest::Approx(-1.0).epsilon(1e-15));

    const Problem a = generate_lp_gp(12);
    const Problem b = generate_lp_gp(12);
    REQUIRE(a.ground_truth.has_value());
    REQUIRE(b.ground_truth.has_value());
    CHECK(a.ground_truth->f_star == b.ground_truth->f_star);
    CHECK((a.ground_truth->x_star - b.ground_truth->x_star).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.rejection_count == b.rejection_count);
}

TEST_CASE("every family validates across seeds") {
    for (const char* family : {"lp_gp", "additive", "squared_composition", "hybrid_chain",
                               "one_layer", "one_layer_unconstrained", "infeasible"}) {
        for (std::uint64_t seed : {1ull, 2ull}) {
            const Problem p = generate_problem(family, seed);
            CHECK_NOTHROW(p.validate());
            CHECK(p.seed == seed);
        }
    }
    CHECK_THROWS_AS(generate_problem("unknown", 1), ConfigParseError);
}

TEST_CASE("problem text round-trip is lossless") {
    const Problem p = generate_lp_gp(8);
    const std::string text = problem_to_text(p);
    const Problem back = problem_from_text(text);
    back.validate();
    CHECK(problem_to_text(back) == text);
    CHECK(back.name == p.name);
    CHECK(back.seed == p.seed);
    CHECK(back.constraint_count() == p.constraint_count());
    REQUIRE(back.ground_truth.has_value());
    CHECK(back.ground_truth->f_star == p.ground_truth->f_star);

    std::mt19937_64 rng = make_rng(21, 0);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd x(2);
        x << unit(rng), unit(rng);
        CHECK(back.true_objective(x) == p.true_objective(x));
        CHECK((back.true_constraints(x) - p.true_constraints(x)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("problem validation enforces matching domains") {
    Problem p = generate_one_layer(2, 1);
    p.constraints[0].domain_upper[0] = 0.5;
    CHECK_THROWS_AS(p.validate(), DimensionMismatchError);
}
