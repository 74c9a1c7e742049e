#include "lsmc/quadrature.hpp"

#include "lsmc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace lsmc {

namespace {

QuadratureRule make_gauss_legendre(std::size_t n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

// Nodes from the eigenvalues of the Jacobi matrix; weights from the Christoffel
// function with running rescaling, since orthonormal Hermite values overflow
// at the outer nodes for large n.
QuadratureRule make_gauss_hermite(std::size_t n) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
    for (Eigen::Index k = 0; k < sub.size(); ++k) sub[k] = std::sqrt(static_cast<double>(k + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("Gauss-Hermite eigen solve failed");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = solver.eigenvalues()[static_cast<Eigen::Index>(i)];
        double log_sum = 0.0;
        for (int pass = 0; pass < 3; ++pass) {
            // pass 0,1: Newton polish of the root; pass 2: weight.
            double pm1 = 0.0;
            double p = 1.0;
            double sum = 1.0;
            double log_scale = 0.0;
            for (std::size_t k = 0; k + 1 < n + (pass < 2 ? 1 : 0); ++k) {
                const double pn = (x * p - std::sqrt(static_cast<double>(k)) * pm1) /
                                  std::sqrt(static_cast<double>(k + 1));
                pm1 = p;
                p = pn;
                if (pass == 2) sum += p * p;
                if (std::abs(p) > 1e100) {
                    p *= 1e-100;
                    pm1 *= 1e-100;
                    sum *= 1e-200;
                    log_scale += 200.0 * std::numbers::ln10;
                }
            }
            if (pass < 2) {
                // p = p_n, pm1 = p_{n-1} (same scale); p_n' = sqrt(n) p_{n-1}.
                if (pm1 != 0.0) x -= p / (std::sqrt(static_cast<double>(n)) * pm1);
            } else {
                log_sum = std::log(sum) + log_scale;
            }
        }
        rule.nodes[i] = x;
        rule.weights[i] = std::exp(-log_sum);
    }
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;
    return rule;
}

template <typename Maker>
const QuadratureRule& cached_rule(std::map<std::size_t, std::unique_ptr<QuadratureRule>>& cache,
                                  std::mutex& mutex, std::size_t n, Maker make) {
    if (n == 0) throw ConfigError("quadrature rule needs at least one point");
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, std::make_unique<QuadratureRule>(make(n))).first;
    }
    return *it->second;
}

double panel(const std::function<double(double)>& f, double a, double b) {
    const QuadratureRule& rule = gauss_legendre(20);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return sum * half;
}

struct Segment {
    double a;
    double b;
    double value; // left + right
    double left;
    double right;
    double error; // |left + right - coarse|
};

Segment make_segment(const std::function<double(double)>& f, double a, double b, double coarse) {
    const double mid = 0.5 * (a + b);
    const double left = panel(f, a, mid);
    const double right = panel(f, mid, b);
    return {a, b, left + right, left, right, std::abs(left + right - coarse)};
}

} // namespace

const QuadratureRule& gauss_legendre(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    static std::mutex mutex;
    return cached_rule(cache, mutex, n, make_gauss_legendre);
}

const QuadratureRule& gauss_hermite_normal(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    static std::mutex mutex;
    return cached_rule(cache, mutex, n, make_gauss_hermite);
}

double integrate_fixed(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    const QuadratureRule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return sum * half;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tolerance, double abs_tolerance) {
    if (a == b) return 0.0;
    if (b < a) return -integrate_adaptive(f, b, a, rel_tolerance, abs_tolerance);
    auto worse = [](const Segment& x, const Segment& y) { return x.error < y.error; };
    std::vector<Segment> heap{make_segment(f, a, b, panel(f, a, b))};
    double total = heap.front().value;
    double total_error = heap.front().error;
    while (heap.size() < kMaxAdaptivePanels &&
           total_error > std::max(rel_tolerance * std::abs(total), abs_tolerance)) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        const Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        for (const Segment& child : {make_segment(f, worst.a, mid, worst.left),
                                     make_segment(f, mid, worst.b, worst.right)}) {
            heap.push_back(child);
            std::push_heap(heap.begin(), heap.end(), worse);
        }
        // Re-sum so rounding in the running totals cannot stall the loop.
        total = 0.0;
        total_error = 0.0;
        for (const Segment& s : heap) {
            total += s.value;
            total_error += s.error;
        }
    }
    std::sort(heap.begin(), heap.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
    double sum = 0.0;
    for (const Segment& s : heap) sum += s.value;
    return sum;
}

} // namespace lsmc
