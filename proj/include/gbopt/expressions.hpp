#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace gbopt {

// A white-box elementary function with a lossless text descriptor.
// arity < 0 means "any input dimension".
struct Expression {
    std::string descriptor;
    int arity = -1;
    std::function<double(const Eigen::VectorXd&)> fn;

    double operator()(const Eigen::VectorXd& s) const { return fn(s); }
    bool valid() const { return static_cast<bool>(fn); }
};

// w . s + b
Expression make_affine(const Eigen::VectorXd& w, double b);
// s' Q s + b . s + c
Expression make_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b, double c);
// product of all inputs
Expression make_product();
// s[0]^p for integer p >= 1
Expression make_power(int p);

// Named user expressions resolvable through "user:<name>" descriptors.
void register_expression(const std::string& name, int arity,
                         std::function<double(const Eigen::VectorXd&)> fn);

// Parses "affine:w=1,-2:b=0.5", "quadratic:q=1,0;0,2:b=0,0:c=-3",
// "product", "power:p=2", "user:<name>".
Expression parse_expression(const std::string& descriptor);

}  // namespace gbopt
