#include "gbopt/sobol.hpp"

#include <bit>
#include <stdexcept>

#include "gbopt/rng.hpp"

namespace gbopt {

namespace {

constexpr int kBits = 32;

int poly_degree(std::uint32_t p) { return 31 - std::countl_zero(p); }

// Multiplication in GF(2)[x] modulo p.
std::uint32_t gf2_mulmod(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
    const int deg = poly_degree(p);
    std::uint64_t acc = 0;
    std::uint64_t aa = a;
    while (b) {
        if (b & 1u) acc ^= aa;
        b >>= 1;
        aa <<= 1;
    }
    for (int bit = 2 * deg; bit >= deg; --bit) {
        if (acc >> bit & 1u) acc ^= static_cast<std::uint64_t>(p) << (bit - deg);
    }
    return static_cast<std::uint32_t>(acc);
}

std::uint32_t gf2_powmod(std::uint32_t base, std::uint64_t e, std::uint32_t p) {
    std::uint32_t result = 1;
    while (e) {
        if (e & 1u) result = gf2_mulmod(result, base, p);
        base = gf2_mulmod(base, base, p);
        e >>= 1;
    }
    return result;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t q = 2; q * q <= n; ++q) {
        if (n % q == 0) {
            out.push_back(q);
            while (n % q == 0) n /= q;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

// p primitive over GF(2): x has order 2^deg - 1 in GF(2)[x]/(p).
bool is_primitive(std::uint32_t p) {
    const int deg = poly_degree(p);
    if (deg < 1) return false;
    if ((p & 1u) == 0) return false;  // constant term required
    const std::uint64_t order = (1ull << deg) - 1;
    if (gf2_powmod(2u, order, p) != 1u) return false;
    for (std::uint64_t q : prime_factors(order)) {
        if (gf2_powmod(2u, order / q, p) == 1u) return false;
    }
    return true;
}

}  // namespace

std::vector<std::uint32_t> primitive_polynomials(int count) {
    std::vector<std::uint32_t> polys;
    for (int deg = 1; static_cast<int>(polys.size()) < count; ++deg) {
        if (deg > 24) throw std::runtime_error("sobol: dimension too large");
        const std::uint32_t lo = 1u << deg;
        const std::uint32_t hi = 1u << (deg + 1);
        for (std::uint32_t p = lo + 1; p < hi && static_cast<int>(polys.size()) < count; p += 2) {
            if (is_primitive(p)) polys.push_back(p);
        }
    }
    return polys;
}

SobolSequence::SobolSequence(int dim) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("sobol: dim must be >= 1");
    direction_.resize(dim_);
    shift_.resize(dim_);

    // Dimension 0 is the van der Corput sequence: m_k = 1 for all k.
    direction_[0].resize(kBits);
    for (int k = 0; k < kBits; ++k) direction_[0][k] = 1u << (kBits - 1 - k);

    const auto polys = dim_ > 1 ? primitive_polynomials(dim_ - 1) : std::vector<std::uint32_t>{};
    for (int d = 1; d < dim_; ++d) {
        const std::uint32_t p = polys[d - 1];
        const int s = poly_degree(p);
        std::vector<std::uint32_t> m(kBits);
        for (int k = 0; k < s && k < kBits; ++k) m[k] = 1;  // unit initialization (odd, < 2^{k+1})
        for (int k = s; k < kBits; ++k) {
            std::uint32_t v = m[k - s] ^ (m[k - s] << s);
            for (int l = 1; l < s; ++l) {
                if (p >> (s - l) & 1u) v ^= m[k - l] << l;
            }
            m[k] = v;
        }
        direction_[d].resize(kBits);
        for (int k = 0; k < kBits; ++k) direction_[d][k] = m[k] << (kBits - 1 - k);
    }

    // Fixed digital shift; keeps the sequence deterministic while breaking
    // the coordinate coincidences of the unit initialization.
    std::uint64_t state = 0x5eed5eed5eed5eedULL;
    for (int d = 0; d < dim_; ++d) shift_[d] = static_cast<std::uint32_t>(splitmix64(state) >> 32);
}

Eigen::VectorXd SobolSequence::point(std::uint64_t index) const {
    Eigen::VectorXd out(dim_);
    for (int d = 0; d < dim_; ++d) {
        std::uint32_t x = shift_[d];
        std::uint64_t gray = index ^ (index >> 1);
        for (int k = 0; gray; ++k, gray >>= 1) {
            if (gray & 1u) x ^= direction_[d][k];
        }
        out[d] = static_cast<double>(x) * 0x1p-32;
    }
    return out;
}

Eigen::MatrixXd SobolSequence::points(std::uint64_t count) const {
    Eigen::MatrixXd out(count, dim_);
    std::vector<std::uint32_t> x(shift_);
    for (std::uint64_t n = 0; n < count; ++n) {
        for (int d = 0; d < dim_; ++d) out(static_cast<Eigen::Index>(n), d) = static_cast<double>(x[d]) * 0x1p-32;
        const int k = std::countr_zero(n + 1);
        for (int d = 0; d < dim_; ++d) x[d] ^= direction_[d][k];
    }
    return out;
}

}  // namespace gbopt
