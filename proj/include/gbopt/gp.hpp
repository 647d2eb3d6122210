#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "gbopt/kernels.hpp"

namespace gbopt {

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
    double sd() const;
};

// Regularized GP regressor with a cached Cholesky factorization of (K + λI).
// Each update triggers a full refit; running information gain
// γ̂_t = (1/2)·log det(I + λ⁻¹K_t) is maintained alongside the factorization.
class GpModel {
public:
    explicit GpModel(Kernel kernel, double lambda = kDefaultLambda);

    static double lambda_for_horizon(std::uint64_t T) { return 1.0 + 2.0 / static_cast<double>(T); }
    static constexpr double kDefaultLambda = 1e-2;

    int size() const { return static_cast<int>(targets_.size()); }
    double lambda() const { return lambda_; }
    const Kernel& kernel() const { return kernel_; }
    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::VectorXd& targets() const { return targets_; }
    double info_gain() const { return info_gain_; }

    Posterior posterior(const Eigen::VectorXd& s) const;
    // Rows of S are query points; returns (means, variances).
    std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_batch(const Eigen::MatrixXd& S) const;

    void update(const Eigen::VectorXd& s_new, double y_new);
    // Swaps the regularizer and refits (used when a new horizon changes λ).
    void set_lambda(double lambda);

private:
    void refit();
    double prior_variance(const Eigen::VectorXd& s) const;
    double clamp_variance(double variance) const;

    Kernel kernel_;
    double lambda_;
    Eigen::MatrixXd inputs_;   // rows = stored s̄ vectors
    Eigen::VectorXd targets_;
    Eigen::LLT<Eigen::MatrixXd> llt_;  // of (K + λI)
    Eigen::VectorXd alpha_;            // (K + λI)⁻¹ y
    double info_gain_ = 0.0;
};

struct ConfidenceModel {
    double B = 1.0;           // RKHS norm bound
    double sigma = 0.0;       // observation noise level
    int m = 1;                // total node count across all functions
    double delta = 0.05;      // confidence level
    double beta_scale = 1.0;

    double beta(double info_gain_prev) const;
};

// Clipped confidence interval: both ends clamped into [−B, B], so l ≤ u always.
std::pair<double, double> confidence_bounds(const GpModel& gp, const ConfidenceModel& conf,
                                            const Eigen::VectorXd& s);

}  // namespace gbopt
