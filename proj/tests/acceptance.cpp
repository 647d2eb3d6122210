// Acceptance gate.  Each criterion prints exactly one PASS/FAIL line carrying
// its pinned thresholds and the measured quantities, and the exit code
// reports the verdict.  Usage: gbopt_acceptance [n] with n in 1..8; without
// an argument all criteria run in order.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gbopt/acquisition.hpp"
#include "gbopt/benchmarks.hpp"
#include "gbopt/gp.hpp"
#include "gbopt/harness.hpp"
#include "gbopt/metrics.hpp"
#include "gbopt/optimizer.hpp"
#include "gbopt/rng.hpp"
#include "gbopt/sobol.hpp"
#include "oracles.hpp"

using namespace gbopt;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return std::string(buf);
}

SolverBudget sobol_budget(int points, int iters, int starts = 3) {
    SolverBudget b;
    b.phase1 = SolverBudget::Phase1::Sobol;
    b.phase1_points = points;
    b.refine_starts = starts;
    b.refine_iters = iters;
    return b;
}

// 1. Posterior mean/variance and information gain against dense linear
//    algebra on 100 random datasets (t <= 40, dim <= 6), tolerance 1e-8.
bool criterion1(std::string& detail) {
    double max_err = 0.0;
    for (int seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng = make_rng(static_cast<std::uint64_t>(seed), 0);
        std::uniform_real_distribution<double> unit(-2.0, 2.0);
        const int dim = 1 + seed % 6;
        const int t = 1 + (seed * 7) % 40;

        Kernel kernel = Kernel::squared_exponential(0.4 + 0.1 * (seed % 5), 0.8);
        if (seed % 3 == 1) kernel = Kernel::matern(2.5, 0.7, 0.9);
        if (seed % 3 == 2) kernel = Kernel::linear(4.0, 0.6);
        const double lambda = seed % 2 == 0 ? GpModel::kDefaultLambda : 1.05;

        Eigen::MatrixXd X(t, dim);
        Eigen::VectorXd y(t);
        for (int r = 0; r < t; ++r) {
            for (int c = 0; c < dim; ++c) X(r, c) = unit(rng);
            y[r] = unit(rng);
        }
        GpModel gp(kernel, lambda);
        for (int r = 0; r < t; ++r) gp.update(X.row(r).transpose(), y[r]);

        const oracles::KernelFn kfn = [&kernel](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
            return kernel(a, b);
        };
        for (int q = 0; q < 5; ++q) {
            Eigen::VectorXd s(dim);
            for (int c = 0; c < dim; ++c) s[c] = unit(rng);
            const Posterior p = gp.posterior(s);
            const oracles::DensePosterior ref = oracles::dense_gp_posterior(kfn, X, y, lambda, s);
            max_err = std::max(max_err, std::abs(p.mean - ref.mean));
            max_err = std::max(max_err, std::abs(p.variance - ref.variance));
        }
        max_err = std::max(max_err, std::abs(gp.info_gain() - oracles::dense_info_gain(kfn, X, lambda)));
    }
    detail = fmt("posterior/info-gain max error %.3e over 100 datasets (tolerance 1e-8)", max_err);
    return max_err <= 1e-8;
}

// 2. Confidence coverage on RKHS-ball functions under Gaussian noise:
//    all-steps containment in >= 90%% of 50 runs at delta = 0.1.
bool criterion2(std::string& detail) {
    const Kernel kernel = Kernel::squared_exponential(0.5, 1.0);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -1.0);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 1.0);
    const double noise = 0.1;
    const int steps = 30;

    int covered_runs = 0;
    for (int seed = 1; seed <= 50; ++seed) {
        const KernelExpansion f =
            sample_kernel_expansion(kernel, static_cast<std::uint64_t>(seed), 12, lo, hi, 2.0);
        GpModel gp(kernel, GpModel::lambda_for_horizon(steps));
        const ConfidenceModel conf{f.norm, noise, 1, 0.1, 1.0};
        std::mt19937_64 noise_rng = make_rng(static_cast<std::uint64_t>(seed), 7);
        std::normal_distribution<double> gauss(0.0, noise);
        const SobolSequence sobol(2);

        bool covered = true;
        for (int t = 0; t < steps; ++t) {
            const Eigen::VectorXd u = sobol.point(static_cast<std::uint64_t>(t));
            const Eigen::VectorXd s = lo.array() + u.array() * (hi - lo).array();
            const double beta = conf.beta(gp.info_gain());
            const Posterior p = gp.posterior(s);
            if (std::abs(f(s) - p.mean) > beta * p.sd() + 1e-12) covered = false;
            gp.update(s, f(s) + gauss(noise_rng));
        }
        covered_runs += covered ? 1 : 0;
    }
    detail = fmt("all-steps containment in %d/50 runs at delta=0.1 (need >= 45)", covered_runs);
    return covered_runs >= 45;
}

// 3. Per-step output discrepancy bound |z_m - z̄_m| <= sum A_i beta_i sd_i in
//    >= 95%% of (run, step) pairs over 40 hybrid-chain seeds at delta = 0.05.
bool criterion3(std::string& detail) {
    int total = 0, held = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const Problem p = generate_section33(Section33Variant::HybridChain, seed);
        RunConfig rc;
        rc.T = 12;
        rc.delta = 0.05;
        rc.seed = seed;
        rc.budget = sobol_budget(192, 15);
        const RunTrace trace = run(p, rc);
        for (const StepRecord& rec : trace.records) {
            ++total;
            if (rec.discrepancy_actual <= rec.discrepancy_bound + 1e-9) ++held;
        }
    }
    const double frac = total == 0 ? 0.0 : static_cast<double>(held) / total;
    detail = fmt("bound held at %d/%d steps (%.1f%%, need >= 95%%) over 40 seeds", held, total,
                 100.0 * frac);
    return frac >= 0.95;
}

// 4. Auxiliary solver equals exhaustive (x, theta) enumeration to 1e-9 on a
//    one-dimensional single-black-node instance, and on its K=1 analog.
bool criterion4(std::string& detail) {
    const Kernel kernel = Kernel::squared_exponential(0.5, 1.0);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(1, -1.0);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(1, 1.0);

    auto make_graph = [&](double B) {
        GreyBoxGraph g;
        g.input_dim = 1;
        g.domain_lower = lo;
        g.domain_upper = hi;
        NodeSpec n;
        n.id = 0;
        n.is_black = true;
        n.parents = {ParentRef::input(0)};
        n.kernel = kernel;
        n.rkhs_norm_bound = B;
        n.lipschitz = 4.0;
        n.output_bound = B;
        g.nodes.push_back(n);
        return g;
    };

    auto seed_gp = [&](GpModel& gp, std::uint64_t seed, double offset) {
        const KernelExpansion f = sample_kernel_expansion(kernel, seed, 8, lo, hi, 1.5);
        for (int i = 0; i < 7; ++i) {
            Eigen::VectorXd s(1);
            s << -0.9 + 0.3 * i;
            gp.update(s, f(s) + offset);
        }
    };

    const GreyBoxGraph obj_graph = make_graph(2.0);
    const GreyBoxGraph con_graph = make_graph(2.0);
    GpModel obj_gp(kernel, 1.05), con_gp(kernel, 1.05);
    seed_gp(obj_gp, 5, 0.0);
    seed_gp(con_gp, 6, 0.2);
    const ConfidenceModel conf{2.0, 0.0, 2, 0.05, 1.0};

    GraphModels obj;
    obj.graph = &obj_graph;
    obj.nodes.emplace(0, NodeModelView{&obj_gp, conf});
    GraphModels con;
    con.graph = &con_graph;
    con.nodes.emplace(0, NodeModelView{&con_gp, conf});

    SolverBudget budget;
    budget.phase1 = SolverBudget::Phase1::Grid;
    budget.refine_iters = 0;

    double max_gap = 0.0;

    budget.grid_points_x = 201;
    budget.grid_points_theta = 101;
    const AuxiliarySolution free_sol = solve_unconstrained(obj, budget);
    const oracles::EnumeratedBest free_ref =
        oracles::enumerate_grid(obj, {}, 201, 101, budget.constraint_tolerance);
    max_gap = std::max(max_gap, std::abs(free_sol.objective - free_ref.objective));
    max_gap = std::max(max_gap, (free_sol.x - free_ref.x).cwiseAbs().maxCoeff());
    max_gap = std::max(max_gap, (free_sol.theta - free_ref.theta).cwiseAbs().maxCoeff());

    budget.grid_points_x = 101;
    budget.grid_points_theta = 41;
    const AuxiliarySolution con_sol = solve_constrained(obj, {con}, budget);
    const oracles::EnumeratedBest con_ref =
        oracles::enumerate_grid(obj, {con}, 101, 41, budget.constraint_tolerance);
    max_gap = std::max(max_gap, std::abs(con_sol.objective - con_ref.objective));
    max_gap = std::max(max_gap, (con_sol.x - con_ref.x).cwiseAbs().maxCoeff());
    max_gap = std::max(max_gap, (con_sol.theta - con_ref.theta).cwiseAbs().maxCoeff());

    detail = fmt("solver vs exhaustive enumeration: max gap %.3e (tolerance 1e-9)", max_gap);
    return max_gap <= 1e-9;
}

// 5. Regret decay: median best-iterate simple regret at T=100 is at most
//    0.3x its value at T=10 over 20 squared-composition seeds.
bool criterion5(std::string& detail) {
    std::vector<double> at10, at100;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Problem p = generate_section33(Section33Variant::SquaredComposition, seed);
        RunConfig rc;
        rc.T = 100;
        rc.seed = seed;
        rc.lambda_is_horizon = false;  // noiseless runs keep the regularizer small
        rc.budget = sobol_budget(256, 20);
        const RunTrace trace = run(p, rc);
        const MetricSeries m = compute_metrics(trace, p.ground_truth);
        at10.push_back(m.best_simple_regret[9]);
        at100.push_back(m.best_simple_regret[99]);
    }
    const double med10 = quantile(at10, 0.5);
    const double med100 = quantile(at100, 0.5);
    detail = fmt("median best simple regret %.4g @T=100 vs %.4g @T=10 (need <= 0.3x) over 20 seeds",
                 med100, med10);
    return med100 <= 0.3 * med10;
}

// 6. LP-GP comparison at T=50 over 20 seeds: grey-box median CR_50 below the
//    black-box baseline's, and per-seed wins in >= 70%% of seeds.
bool criterion6(std::string& detail) {
    std::vector<double> cr_grey, cr_black;
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Problem p = generate_lp_gp(seed);
        RunConfig rc;
        rc.T = 50;
        rc.seed = seed;
        rc.lambda_is_horizon = false;  // identical noiseless regime for both modes
        rc.budget = sobol_budget(512, 40, 5);

        rc.mode = RunConfig::Mode::Greybox;
        const RunTrace grey = run(p, rc);
        rc.mode = RunConfig::Mode::BlackboxBaseline;
        const RunTrace black = run(p, rc);

        const auto final_cr = [&p](const RunTrace& trace) {
            if (trace.records.empty()) return std::numeric_limits<double>::infinity();
            return compute_metrics(trace, p.ground_truth).constrained_regret.back();
        };
        const double g = final_cr(grey);
        const double b = final_cr(black);
        cr_grey.push_back(g);
        cr_black.push_back(b);
        wins += g < b ? 1 : 0;
    }
    const double med_g = quantile(cr_grey, 0.5);
    const double med_b = quantile(cr_black, 0.5);
    detail = fmt("median CR_50 grey %.4g vs black %.4g, grey wins %d/20 (need median < and >= 14)",
                 med_g, med_b, wins);
    return med_g < med_b && wins >= 14;
}

// 7. Infeasibility detection: margin-0.3 infeasible instances declared within
//    T=200 in >= 95%% of 20 seeds; zero declarations on 40 feasible runs.
bool criterion7(std::string& detail) {
    int declared = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Problem p = generate_infeasible(seed, 0.3);
        RunConfig rc;
        rc.T = 200;
        rc.seed = seed;
        rc.lambda_is_horizon = false;
        rc.budget = sobol_budget(256, 15);
        const RunTrace trace = run(p, rc);
        declared += trace.outcome == RunTrace::Outcome::InfeasibilityDeclared ? 1 : 0;
    }

    int false_positives = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const Problem p = generate_one_layer(seed, 2);
        RunConfig rc;
        rc.T = 25;
        rc.seed = seed;
        rc.lambda_is_horizon = false;
        rc.budget = sobol_budget(192, 15);
        const RunTrace trace = run(p, rc);
        false_positives += trace.outcome == RunTrace::Outcome::InfeasibilityDeclared ? 1 : 0;
    }
    detail = fmt("declared %d/20 infeasible (need >= 19), false positives %d/40 (need 0)", declared,
                 false_positives);
    return declared >= 19 && false_positives == 0;
}

// 8. Determinism: a rerun of a full experiment with an identical config
//    produces byte-identical CSV output.
bool criterion8(std::string& detail) {
    const fs::path root = fs::temp_directory_path() / "gbopt_acceptance_c8";
    fs::remove_all(root);

    ExperimentConfig exp;
    exp.name = "determinism";
    exp.families = {"hybrid_chain", "lp_gp"};
    exp.seeds = {1, 2};
    exp.modes = {RunConfig::Mode::Greybox, RunConfig::Mode::BlackboxBaseline};
    exp.T = 5;
    exp.workers = 2;
    exp.budget = sobol_budget(128, 10);

    exp.out = (root / "first").string();
    run_experiment(exp);
    exp.out = (root / "second").string();
    run_experiment(exp);

    int files = 0, mismatches = 0;
    for (const auto& entry : fs::directory_iterator(root / "first")) {
        ++files;
        std::ifstream a(entry.path(), std::ios::binary);
        std::ifstream b(root / "second" / entry.path().filename(), std::ios::binary);
        std::ostringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        if (!b.good() || sa.str() != sb.str()) ++mismatches;
    }
    fs::remove_all(root);
    detail = fmt("rerun of 8 jobs compared over %d output files, %d mismatched (need 0)", files,
                 mismatches);
    return files > 0 && mismatches == 0;
}

bool run_criterion(int n) {
    std::string detail;
    bool ok = false;
    switch (n) {
        case 1: ok = criterion1(detail); break;
        case 2: ok = criterion2(detail); break;
        case 3: ok = criterion3(detail); break;
        case 4: ok = criterion4(detail); break;
        case 5: ok = criterion5(detail); break;
        case 6: ok = criterion6(detail); break;
        case 7: ok = criterion7(detail); break;
        case 8: ok = criterion8(detail); break;
        default:
            std::fprintf(stderr, "unknown criterion %d (valid: 1..8)\n", n);
            return false;
    }
    std::printf("criterion %d: %s - %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        if (argc > 1) {
            return run_criterion(std::atoi(argv[1])) ? 0 : 1;
        }
        bool all_ok = true;
        for (int n = 1; n <= 8; ++n) all_ok = run_criterion(n) && all_ok;
        return all_ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
