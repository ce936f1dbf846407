#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "equicomp/errors.hpp"

namespace equicomp {

// Exact variant counts. They grow super-polynomially in N, so all counting
// runs over arbitrary-precision integers and only the final ratios are
// lowered to doubles.
using BigCount = boost::multiprecision::cpp_int;

inline std::string to_decimal(const BigCount& x) { return x.str(); }

// Natural log of a positive count, accurate to ~1e-15 relative even when the
// value is far beyond double range.
inline double log_big(const BigCount& x) {
    if (x <= 0) throw validation_error("log of nonpositive count");
    const unsigned bits = boost::multiprecision::msb(x);
    if (bits < 900) return std::log(x.convert_to<double>());
    const unsigned shift = bits - 64;
    const BigCount top = x >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * 0.6931471805599453;
}

// a/b as a double; a >= 0, b > 0. Safe when both exceed double range.
inline double ratio_big(const BigCount& a, const BigCount& b) {
    if (b <= 0) throw validation_error("ratio with nonpositive denominator");
    if (a == 0) return 0.0;
    return std::exp(log_big(a) - log_big(b));
}

// Uniform draw from [0, bound) by rejection on fixed-width bit blocks; exact,
// no floating point involved.
inline BigCount uniform_below(const BigCount& bound, std::mt19937_64& rng) {
    if (bound <= 0) throw validation_error("uniform draw from empty range");
    if (bound == 1) return BigCount(0);
    const unsigned bits = boost::multiprecision::msb(bound) + 1;
    const unsigned words = (bits + 63) / 64;
    const unsigned top_bits = bits - 64 * (words - 1);
    const std::uint64_t top_mask =
        top_bits >= 64 ? ~std::uint64_t(0) : ((std::uint64_t(1) << top_bits) - 1);
    for (;;) {
        BigCount v = 0;
        for (unsigned w = 0; w < words; ++w) {
            std::uint64_t chunk = rng();
            if (w == 0) chunk &= top_mask;
            v <<= 64;
            v |= BigCount(chunk);
        }
        if (v < bound) return v;
    }
}

// Binomial coefficient C(n, k) as an exact count.
inline BigCount binomial(long long n, long long k) {
    if (k < 0 || k > n) return BigCount(0);
    if (k > n - k) k = n - k;
    BigCount r = 1;
    for (long long i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;
    }
    return r;
}

} // namespace equicomp
