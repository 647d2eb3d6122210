#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gbopt/graph.hpp"
#include "gbopt/kernels.hpp"

namespace gbopt {

// Deterministic GP sample path built from random Fourier features.
class RffFunction {
public:
    RffFunction(const Kernel& kernel, std::uint64_t seed, int feature_count, int dim);

    double operator()(const Eigen::VectorXd& x) const;
    // RKHS norm of the draw under the feature-induced kernel.
    double weight_norm() const { return weights_.norm(); }
    // Covariance E_w[f(a)·f(b)] of the feature map; converges to the kernel
    // as the feature count grows.
    double induced_covariance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
    std::string descriptor() const;

private:
    Eigen::MatrixXd omega_;  // feature_count x dim
    Eigen::VectorXd phase_;
    Eigen::VectorXd weights_;
    double amplitude_ = 1.0;  // sqrt(2*scale/feature_count)
    Kernel kernel_;
    std::uint64_t seed_ = 0;
    int dim_ = 0;
};

// Finite kernel expansion φ(s) = Σ_j w_j k(c_j, s) with ‖φ‖² = wᵀKw.
struct KernelExpansion {
    Eigen::MatrixXd centers;  // rows = points
    Eigen::VectorXd weights;
    Kernel kernel = Kernel::squared_exponential(1.0);
    double norm = 0.0;

    double operator()(const Eigen::VectorXd& s) const;
    void rescale_to_norm(double target);
};

// Expansion with random centers in [lo, hi], Gaussian weights, rescaled to
// RKHS norm `target_norm`.
KernelExpansion sample_kernel_expansion(const Kernel& kernel, std::uint64_t seed, int count,
                                        const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                        double target_norm);

// §-style GP draw; kernel must be squared-exponential.
RffFunction sample_gp_function(const Kernel& kernel, std::uint64_t seed, int feature_count, int dim);

// ---- grid utilities ----
int default_grid_axis_points(int dim);
Eigen::MatrixXd dense_grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int points_per_axis);
// max axis-aligned finite-difference slope over a dense grid, ×1.2 margin
double estimate_lipschitz(const OracleFn& fn, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          int points_per_axis);
double grid_max_abs(const OracleFn& fn, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                    int points_per_axis);

struct GroundTruth {
    Eigen::VectorXd x_star;
    double f_star = 0.0;
    bool feasible_point_exists = false;
};

struct Problem {
    std::string name;
    std::string family;
    std::uint64_t seed = 0;
    GreyBoxGraph objective;
    std::vector<GreyBoxGraph> constraints;
    std::optional<GroundTruth> ground_truth;
    int rejection_count = 0;

    int constraint_count() const { return static_cast<int>(constraints.size()); }
    double true_objective(const Eigen::VectorXd& x) const;
    Eigen::VectorXd true_constraints(const Eigen::VectorXd& x) const;
    void validate() const;
};

// Dense-grid optimum of the true composite subject to true constraints ≤ 0.
GroundTruth compute_ground_truth(const Problem& problem, int points_per_axis = 0);

struct LpGpOptions {
    int constraint_count = 2;
    int feature_count = 16;
    int max_rejections = 64;
};

// §-form LP with an embedded 2-output GP draw on X = [−2,2]²; rejection
// samples until the dense grid contains a feasible point.
Problem generate_lp_gp(std::uint64_t seed, const LpGpOptions& options = {});

enum class Section33Variant { Additive, SquaredComposition, HybridChain };
Problem generate_section33(Section33Variant variant, std::uint64_t seed);

// Single black-box layer feeding a known combiner, with K known-form
// constraints sharing the layer.
Problem generate_one_layer(std::uint64_t seed, int K);

// Constraint infeasible by construction: grid minimum of the constraint is
// exactly `eps` (> 0), realized as a positive kernel expansion.
Problem generate_infeasible(std::uint64_t seed, double eps = 0.3);

Problem generate_problem(const std::string& family, std::uint64_t seed);

// ---- text round-trip (graph schema + sidecar metadata) ----
std::string problem_to_text(const Problem& problem);
Problem problem_from_text(const std::string& text, const std::string& origin = "<problem>");
Problem problem_from_file(const std::string& path);

}  // namespace gbopt
