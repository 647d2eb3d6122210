#pragma once

#include <Eigen/Dense>
#include <string>

namespace gbopt {

// Stationary / dot-product covariance functions normalized so that
// k(s, s) <= 1 on the admissible domain.
class Kernel {
public:
    enum class Family { SquaredExponential, Matern12, Matern32, Matern52, Linear };

    static Kernel squared_exponential(const Eigen::VectorXd& lengthscales, double scale = 1.0);
    static Kernel squared_exponential(double lengthscale, double scale = 1.0);
    static Kernel matern(double nu, const Eigen::VectorXd& lengthscales, double scale = 1.0);
    static Kernel matern(double nu, double lengthscale, double scale = 1.0);
    // k(a, b) = scale * (a . b) / radius^2; requires inputs with norm <= radius.
    static Kernel linear(double radius, double scale = 1.0);

    Family family() const { return family_; }
    double scale() const { return scale_; }
    const Eigen::VectorXd& lengthscales() const { return lengthscales_; }
    double radius() const { return radius_; }

    double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
    // Rows of `A` and `B` are points; result is |A| x |B|.
    Eigen::MatrixXd gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const;
    Eigen::MatrixXd gram(const Eigen::MatrixXd& A) const;

    // e.g. "se:ls=0.5:scale=1", "matern52:ls=1,2:scale=0.5", "linear:radius=3:scale=1"
    std::string to_string() const;
    static Kernel parse(const std::string& text);

private:
    Kernel() = default;
    Eigen::VectorXd scaled_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

    Family family_ = Family::SquaredExponential;
    double scale_ = 1.0;
    Eigen::VectorXd lengthscales_;
    double radius_ = 1.0;
};

}  // namespace gbopt
