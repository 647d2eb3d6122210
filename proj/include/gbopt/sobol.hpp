#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace gbopt {

// Digitally shifted Sobol sequence in [0,1)^dim.
//
// Direction numbers are built from primitive polynomials over GF(2) found by
// exhaustive search at construction time, with unit initial values; a fixed
// per-dimension digital shift decouples dimensions that share a polynomial
// degree. Every one-dimensional projection is a base-2 (0,1)-sequence: the
// first 2^k points hit each dyadic interval of length 2^-k exactly once.
class SobolSequence {
public:
    explicit SobolSequence(int dim);

    int dim() const { return dim_; }

    // Point #index (0-based); O(log index) per coordinate.
    Eigen::VectorXd point(std::uint64_t index) const;

    // First `count` points, one per row.
    Eigen::MatrixXd points(std::uint64_t count) const;

private:
    int dim_ = 0;
    // direction_[d][k] is v_{k+1} for dimension d, scaled by 2^32.
    std::vector<std::vector<std::uint32_t>> direction_;
    std::vector<std::uint32_t> shift_;
};

// Returns the first `count` primitive polynomials over GF(2) in increasing
// degree order, each encoded with its coefficient bits (x^3+x+1 -> 0b1011).
std::vector<std::uint32_t> primitive_polynomials(int count);

}  // namespace gbopt
