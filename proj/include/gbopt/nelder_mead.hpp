#pragma once

#include <Eigen/Dense>
#include <functional>

namespace gbopt {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
};

// Minimizes `f` over the box [lo, hi] starting from `x0`.  Points proposed
// outside the box are clamped onto it, so every evaluation stays feasible.
NelderMeadResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi,
                                      int max_iterations,
                                      double tolerance = 1e-12);

}  // namespace gbopt
