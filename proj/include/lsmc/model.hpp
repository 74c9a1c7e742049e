#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lsmc {

enum class ProcessKind { brownian, gbm, basket_tree };

// Underlying process law. gbm is a martingale with S(0) = spot, i.e. drift -sigma^2/2
// in log space. basket_tree is the fixed two-asset, two-period discrete example.
struct ProcessSpec {
    ProcessKind kind = ProcessKind::brownian;
    double volatility = 0.0; // gbm only, per-year fraction
    double horizon = 1.0;    // T in years
    int dimension = 1;
    double spot = 1.0; // gbm initial value

    void validate() const;
};

enum class FeatureKind { terminal, path_integral, pair_u_T, basket_sum };

// Path functional evaluated at eval_time. pair_u_T yields (Z(u), Z(eval_time)).
// path_integral at t < T yields (integral over [0, t], Z(t)).
struct FeatureSpec {
    FeatureKind kind = FeatureKind::terminal;
    double eval_time = 1.0;
    double intermediate_time = 0.0; // pair_u_T only

    [[nodiscard]] std::size_t output_dim(const ProcessSpec& proc) const;
    void validate(const ProcessSpec& proc) const;
};

// Interval [a1, a2] and the probability the feature law assigns to it.
struct Domain {
    double a1 = 0.0;
    double a2 = 1.0;
    double mass = 1.0;

    void validate() const;
    [[nodiscard]] bool contains(double x) const { return x >= a1 && x <= a2; }
};

struct SampleMetadata {
    std::string law;            // declared process law the draws come from
    std::string discretization; // e.g. "exact" or "trapezoid steps=256"
    std::uint64_t attempts = 0; // rejection sampling only
    [[nodiscard]] double acceptance_rate(std::size_t n) const {
        return attempts == 0 ? 1.0 : static_cast<double>(n) / static_cast<double>(attempts);
    }
};

// N i.i.d. draws. payoffs is empty until attached (see payoff.hpp).
struct SampleSet {
    Eigen::MatrixXd features; // N x dim
    std::vector<double> payoffs;
    std::uint64_t seed = 0;
    std::optional<Domain> domain;
    SampleMetadata meta;

    [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(features.rows()); }
    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
    void validate() const;
};

inline constexpr std::size_t kDefaultIntegralSteps = 256;
inline constexpr double kDefaultDomainEpsilon = 1e-4;
inline constexpr double kMinConditioningMass = 1e-6;

// Draws n i.i.d. features. Row i depends only on (seed, i), never on `threads`.
SampleSet simulate_terminal(const ProcessSpec& proc, const FeatureSpec& feat, std::size_t n,
                            std::uint64_t seed, unsigned threads = 1);

// Rejection sampler for the feature law conditioned on column 0 lying in dom.
SampleSet simulate_conditional(const ProcessSpec& proc, const FeatureSpec& feat, const Domain& dom,
                               std::size_t n, std::uint64_t seed, unsigned threads = 1);

// Trapezoidal integral of the path over [0, horizon] on `steps` equal intervals.
// Power-of-two step counts refine one path: halving steps subsamples its grid.
SampleSet simulate_path_integral(const ProcessSpec& proc, double horizon, std::size_t steps,
                                 std::size_t n, std::uint64_t seed, unsigned threads = 1);

// Exact law of column 0 of the feature, when it is Gaussian or log-normal.
// Returns P(a1 <= A <= a2), or nullopt when the law has no closed form here.
std::optional<double> feature_mass(const ProcessSpec& proc, const FeatureSpec& feat, double a1,
                                   double a2);

// Central interval of column 0 carrying mass 1 - eps, edges from the inverse CDF.
Domain central_domain(const ProcessSpec& proc, const FeatureSpec& feat,
                      double eps = kDefaultDomainEpsilon);

// Gaussian (mean, variance) of column 0 where the feature law is normal.
std::optional<std::pair<double, double>> gaussian_feature_law(const ProcessSpec& proc,
                                                              const FeatureSpec& feat);

std::string describe(const ProcessSpec& proc);

// ---- two-asset discrete tree ---------------------------------------------

using Rational = boost::rational<std::int64_t>;

struct BasketNode {
    int z1 = 0;
    int z2 = 0;
    Rational probability;
    Rational expectation; // E[(Z1(2) + Z2(2) - strike)^+ | Z1(1), Z2(1)]
};

inline constexpr int kBasketStrike = 10;

// Node-recursive evaluation over the four time-1 states.
std::vector<BasketNode> basket_tree_expectations();

// Flat enumeration of all 16 leaf paths, grouped by their time-1 state.
std::vector<BasketNode> basket_tree_expectations_by_enumeration();

// E[X] at time 0 by leaf enumeration.
Rational basket_tree_expected_payoff();

} // namespace lsmc
