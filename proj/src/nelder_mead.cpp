#include "gbopt/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace gbopt {

namespace {

Eigen::VectorXd clamp_box(Eigen::VectorXd x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

struct Incumbent {
    Eigen::VectorXd x;
    double value = 0.0;
};

// One simplex descent from `start`, spending iterations from the shared
// budget until the simplex flattens.  Clamping can glue vertices onto an
// active box face and degenerate the simplex there, which is why the caller
// restarts from the incumbent instead of trusting a single descent.
Incumbent descend(const std::function<double(const Eigen::VectorXd&)>& f,
                  const Eigen::VectorXd& start, const Eigen::VectorXd& lo,
                  const Eigen::VectorXd& hi, int& iterations_left, double tolerance) {
    const Eigen::Index n = start.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<Eigen::VectorXd> simplex;
    simplex.reserve(static_cast<std::size_t>(n) + 1);
    simplex.push_back(start);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd v = simplex[0];
        const double span = hi[i] - lo[i];
        double step = span > 0 ? 0.05 * span : 0.05;
        if (v[i] + step > hi[i]) step = -step;
        v[i] += step;
        simplex.push_back(clamp_box(v, lo, hi));
    }

    std::vector<double> values(static_cast<std::size_t>(n) + 1);
    for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = f(simplex[i]);

    std::vector<int> order(static_cast<std::size_t>(n) + 1);
    while (iterations_left > 0) {
        --iterations_left;
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
        const int best = order.front();
        const int worst = order.back();
        const int second_worst = order[order.size() - 2];
        if (std::abs(values[worst] - values[best]) <= tolerance * (1.0 + std::abs(values[best]))) {
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int idx : order) {
            if (idx != worst) centroid += simplex[static_cast<std::size_t>(idx)];
        }
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected =
            clamp_box(centroid + alpha * (centroid - simplex[static_cast<std::size_t>(worst)]), lo, hi);
        const double fr = f(reflected);
        if (fr < values[static_cast<std::size_t>(best)]) {
            const Eigen::VectorXd expanded = clamp_box(centroid + gamma * (reflected - centroid), lo, hi);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[static_cast<std::size_t>(worst)] = expanded;
                values[static_cast<std::size_t>(worst)] = fe;
            } else {
                simplex[static_cast<std::size_t>(worst)] = reflected;
                values[static_cast<std::size_t>(worst)] = fr;
            }
            continue;
        }
        if (fr < values[static_cast<std::size_t>(second_worst)]) {
            simplex[static_cast<std::size_t>(worst)] = reflected;
            values[static_cast<std::size_t>(worst)] = fr;
            continue;
        }
        const Eigen::VectorXd contracted =
            clamp_box(centroid + rho * (simplex[static_cast<std::size_t>(worst)] - centroid), lo, hi);
        const double fc = f(contracted);
        if (fc < values[static_cast<std::size_t>(worst)]) {
            simplex[static_cast<std::size_t>(worst)] = contracted;
            values[static_cast<std::size_t>(worst)] = fc;
            continue;
        }
        for (int idx : order) {
            if (idx == best) continue;
            simplex[static_cast<std::size_t>(idx)] = clamp_box(
                simplex[static_cast<std::size_t>(best)] +
                    sigma * (simplex[static_cast<std::size_t>(idx)] - simplex[static_cast<std::size_t>(best)]),
                lo, hi);
            values[static_cast<std::size_t>(idx)] = f(simplex[static_cast<std::size_t>(idx)]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[best]) best = i;
    }
    return Incumbent{simplex[best], values[best]};
}

}  // namespace

NelderMeadResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi,
                                      int max_iterations,
                                      double tolerance) {
    Incumbent incumbent{clamp_box(x0, lo, hi), 0.0};
    if (x0.size() == 0 || max_iterations <= 0) {
        incumbent.value = f(incumbent.x);
        return NelderMeadResult{incumbent.x, incumbent.value, 0};
    }
    incumbent.value = f(incumbent.x);

    int iterations_left = max_iterations;
    while (iterations_left > 0) {
        const Incumbent candidate = descend(f, incumbent.x, lo, hi, iterations_left, tolerance);
        const bool improved =
            candidate.value < incumbent.value - tolerance * (1.0 + std::abs(incumbent.value));
        if (candidate.value < incumbent.value) incumbent = candidate;
        if (!improved) break;  // a fresh simplex could not beat the incumbent
    }
    return NelderMeadResult{incumbent.x, incumbent.value, max_iterations - iterations_left};
}

}  // namespace gbopt
