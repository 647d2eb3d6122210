#include "gbopt/gp.hpp"

#include <algorithm>
#include <cmath>

#include "gbopt/errors.hpp"

namespace gbopt {

double Posterior::sd() const { return std::sqrt(std::max(variance, 0.0)); }

GpModel::GpModel(Kernel kernel, double lambda) : kernel_(std::move(kernel)), lambda_(lambda) {
    if (!(lambda_ > 0.0)) throw NumericalBreakdownError("gp regularizer lambda must be positive");
    targets_.resize(0);
}

double GpModel::prior_variance(const Eigen::VectorXd& s) const { return kernel_(s, s); }

double GpModel::clamp_variance(double variance) const {
    if (variance >= 0.0) return variance;
    if (variance >= -1e-10) return 0.0;
    throw NumericalBreakdownError("posterior variance below clamping threshold: " + std::to_string(variance));
}

void GpModel::refit() {
    const int t = size();
    if (t == 0) {
        info_gain_ = 0.0;
        return;
    }
    Eigen::MatrixXd A = kernel_.gram(inputs_);
    A.diagonal().array() += lambda_;
    llt_.compute(A);
    if (llt_.info() != Eigen::Success) {
        throw NumericalBreakdownError("Cholesky factorization of (K + lambda I) failed");
    }
    alpha_ = llt_.solve(targets_);
    double logdet = 0.0;
    const auto& L = llt_.matrixLLT();
    for (int i = 0; i < t; ++i) logdet += std::log(L(i, i));
    info_gain_ = logdet - 0.5 * t * std::log(lambda_);
}

Posterior GpModel::posterior(const Eigen::VectorXd& s) const {
    const int t = size();
    if (t == 0) return Posterior{0.0, clamp_variance(prior_variance(s))};
    if (s.size() != inputs_.cols()) {
        throw DimensionMismatchError("gp query dimension does not match stored inputs");
    }
    Eigen::VectorXd k(t);
    for (int j = 0; j < t; ++j) k[j] = kernel_(inputs_.row(j).transpose(), s);
    const double mean = k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    const double variance = prior_variance(s) - v.squaredNorm();
    return Posterior{mean, clamp_variance(variance)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> GpModel::posterior_batch(const Eigen::MatrixXd& S) const {
    Eigen::VectorXd means(S.rows());
    Eigen::VectorXd variances(S.rows());
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
        const Posterior p = posterior(S.row(i).transpose());
        means[i] = p.mean;
        variances[i] = p.variance;
    }
    return {means, variances};
}

void GpModel::update(const Eigen::VectorXd& s_new, double y_new) {
    if (size() > 0 && s_new.size() != inputs_.cols()) {
        throw DimensionMismatchError("gp update dimension does not match stored inputs");
    }
    const int t = size();
    inputs_.conservativeResize(t + 1, s_new.size());
    inputs_.row(t) = s_new.transpose();
    targets_.conservativeResize(t + 1);
    targets_[t] = y_new;
    refit();
}

void GpModel::set_lambda(double lambda) {
    if (!(lambda > 0.0)) throw NumericalBreakdownError("gp regularizer lambda must be positive");
    lambda_ = lambda;
    refit();
}

double ConfidenceModel::beta(double info_gain_prev) const {
    const double gamma = std::max(info_gain_prev, 0.0);
    return beta_scale * (B + sigma * std::sqrt(2.0 * (gamma + 1.0 + std::log(static_cast<double>(m) / delta))));
}

std::pair<double, double> confidence_bounds(const GpModel& gp, const ConfidenceModel& conf,
                                            const Eigen::VectorXd& s) {
    const Posterior p = gp.posterior(s);
    const double beta = conf.beta(gp.info_gain());
    const double half = beta * p.sd();
    const double l = std::clamp(p.mean - half, -conf.B, conf.B);
    const double u = std::clamp(p.mean + half, -conf.B, conf.B);
    return {l, u};
}

}  // namespace gbopt
