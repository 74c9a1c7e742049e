#pragma once

#include <cmath>
#include <numbers>

namespace lsmc::normal {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

inline double pdf(double z) noexcept {
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

inline double cdf(double z) noexcept {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// Upper tail 1 - cdf(z), accurate for large z.
inline double sf(double z) noexcept {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

// P(lo <= Z < hi) without cancellation in either tail.
inline double mass(double lo, double hi) noexcept {
    if (!(hi > lo)) return 0.0;
    if (lo >= 0.0) return sf(lo) - sf(hi);
    if (hi <= 0.0) return cdf(hi) - cdf(lo);
    return 1.0 - cdf(lo) - sf(hi);
}

double quantile(double p);

// z with sf(z) = q.
double upper_quantile(double q);

} // namespace lsmc::normal
