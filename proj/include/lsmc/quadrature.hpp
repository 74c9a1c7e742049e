#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lsmc {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1]. Cached; safe to call concurrently.
const QuadratureRule& gauss_legendre(std::size_t n);

// n-point Gauss-Hermite rule for the standard normal weight:
// E[f(Z)] ~= sum_i w_i f(x_i), with sum_i w_i = 1. Cached; safe to call concurrently.
const QuadratureRule& gauss_hermite_normal(std::size_t n);

// Fixed n-point Gauss-Legendre on [a, b].
double integrate_fixed(const std::function<double(double)>& f, double a, double b, std::size_t n);

// Globally adaptive bisection with a 20-point Gauss-Legendre panel rule. The
// panel whose halves disagree most is split until the summed disagreement is at
// most max(rel_tolerance * |estimate|, abs_tolerance), or until the panel budget
// is spent, in which case the current estimate is returned. The budget bounds
// the work when the integrand is noisier than the tolerance.
inline constexpr std::size_t kMaxAdaptivePanels = 2048;
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tolerance = 1e-12, double abs_tolerance = 1e-15);

} // namespace lsmc
