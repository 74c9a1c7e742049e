#pragma once

#include "lsmc/model.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lsmc {

struct UniformLaw {
    double a = 0.0;
    double b = 1.0;
};

// Normal(mean, variance) restricted and renormalized to [a1, a2].
struct TruncatedNormalLaw {
    double mean = 0.0;
    double variance = 1.0;
    double a1 = -1.0;
    double a2 = 1.0;
};

// Pilot-sample law on [a1, a2]; points outside the interval are discarded.
struct EmpiricalLaw {
    std::vector<double> sample; // sorted ascending after construction
    double a1 = 0.0;
    double a2 = 1.0;
};

// Law of the regressed feature. Analytic laws have a positive continuous
// density on their domain.
class DistSpec {
public:
    static DistSpec uniform(double a, double b);
    static DistSpec truncated_normal(double mean, double variance, double a1, double a2);
    // Truncated normal on the central 1 - eps mass interval.
    static DistSpec central_normal(double mean, double variance, double eps = kDefaultDomainEpsilon);
    static DistSpec empirical(std::vector<double> sample, double a1, double a2);
    static DistSpec empirical(std::vector<double> sample); // domain = sample range

    [[nodiscard]] bool analytic() const { return !std::holds_alternative<EmpiricalLaw>(law_); }
    [[nodiscard]] Domain domain() const;
    [[nodiscard]] const auto& law() const { return law_; }

    // Density on the domain (zero outside). Analytic laws only.
    [[nodiscard]] double density(double u) const;
    // Normalized CDF on the domain. Analytic laws only.
    [[nodiscard]] double cdf(double u) const;
    // Inverse CDF at level p in [0, 1]. Analytic laws only.
    [[nodiscard]] double quantile(double p) const;

    // E[1{lo <= U < hi} (U - c)^j] for j = 0..4 (right-closed when `right_closed`).
    // Closed form for uniform and truncated normal; sample averages for empirical.
    [[nodiscard]] std::array<double, 5> central_moments(double lo, double hi, double c,
                                                        bool right_closed = false) const;
    // E[1{lo <= U < hi} U].
    [[nodiscard]] double first_moment(double lo, double hi, bool right_closed = false) const;

    [[nodiscard]] std::string describe() const;

private:
    explicit DistSpec(std::variant<UniformLaw, TruncatedNormalLaw, EmpiricalLaw> law)
        : law_(std::move(law)) {}
    std::variant<UniformLaw, TruncatedNormalLaw, EmpiricalLaw> law_;
    double normalizer_ = 1.0; // truncated normal: mass of [a1, a2] under the untruncated law
};

enum class PartitionMode { analytic, empirical };

// K bins [b_k, b_{k+1}); the last bin is closed on the right.
struct BinPartition {
    std::vector<double> edges; // K + 1, strictly increasing
    std::size_t K = 0;
    Domain domain;
    PartitionMode mode = PartitionMode::analytic;

    // Owning bin of u, or nullopt outside [a1, a2].
    [[nodiscard]] std::optional<std::size_t> locate(double u) const;
    void validate() const;
};

inline constexpr std::size_t kMinPilotPerBin = 10;

BinPartition build_partition(const DistSpec& dist, std::size_t K);

struct BinMoments {
    std::vector<double> centers; // c_k
    std::vector<double> norm0;   // C0_k = sqrt(K)
    std::vector<double> norm1;   // C1_k
};

BinMoments bin_moments(const BinPartition& partition, const DistSpec& dist);

// Orthonormal piecewise-linear basis: on bin k, e0k = C0_k 1_k and
// e1k = C1_k 1_k (u - c_k). Coordinates are interleaved: index 2k is e0k and
// index 2k + 1 is e1k (k zero-based).
struct SieveBasis {
    BinPartition partition;
    std::vector<double> centers;
    std::vector<double> norm0;
    std::vector<double> norm1;

    [[nodiscard]] std::size_t K() const { return partition.K; }
    [[nodiscard]] std::size_t dim() const { return 2 * partition.K; }
    [[nodiscard]] std::optional<std::size_t> locate(double u) const { return partition.locate(u); }
    // (e0k(u), e1k(u)) for the owning bin k.
    [[nodiscard]] std::array<double, 2> pair(std::size_t k, double u) const {
        return {norm0[k], norm1[k] * (u - centers[k])};
    }
    void validate() const;
};

SieveBasis build_basis(const DistSpec& dist, std::size_t K);
SieveBasis make_basis(BinPartition partition, const BinMoments& moments);

Eigen::VectorXd eval_basis(const SieveBasis& basis, double u);

// Sum of coefficients . e(u) using the sparse structure.
double eval_expansion(const SieveBasis& basis, std::span<const double> coefficients, double u);

// N x 2K design matrix of basis values at the given points.
Eigen::MatrixXd design_matrix(const SieveBasis& basis, std::span<const double> points);

struct GramDiagnostics {
    double frobenius_dist = 0.0; // ||G - I||_F
    double lambda_min = 0.0;
    bool rank_deficiency_warning = false; // N < 2K
};

GramDiagnostics gram_diagnostics(const Eigen::MatrixXd& gram);
// G = (1/N) E^T E over column 0 of the sample.
GramDiagnostics gram_diagnostics(const SieveBasis& basis, const SampleSet& sample);
// E[e_i(U) e_j(U)] by per-bin adaptive quadrature against the density.
Eigen::MatrixXd gram_quadrature(const SieveBasis& basis, const DistSpec& dist);

// (1/N) E[(e(U)^T e(U))^2] from the bin moments.
double h_tilde(const SieveBasis& basis, const DistSpec& dist, std::size_t N);

// max_k E[1_k (U - c_k)^4] / E[1_k (U - c_k)^2]^2.
double moment_ratio_max(const SieveBasis& basis, const DistSpec& dist);

// True projection coefficients alpha_i = E[g(U) e_i(U)] by per-bin quadrature.
Eigen::VectorXd projection_coefficients(const std::function<double(double)>& g,
                                        const SieveBasis& basis, const DistSpec& dist);

struct ApproxErrorMoments {
    double l2 = 0.0;          // E[(g - g^K)^2]
    double fourth_root = 0.0; // (E[(g - g^K)^4])^(1/2)
    double l2_norm = 0.0;     // (E[(g - g^K)^2])^(1/2)
};

ApproxErrorMoments approx_error_moments(const std::function<double(double)>& g,
                                        const SieveBasis& basis, const DistSpec& dist);

// E[f(U)] under an analytic law, integrating each bin of `breakpoints` (a
// partition of the domain) with `points`-point Gauss-Legendre.
double expect_piecewise(const DistSpec& dist, std::span<const double> breakpoints,
                        const std::function<double(double)>& f, std::size_t points = 32);

// Nodes and density-weighted weights of the same composite rule, so repeated
// expectations can reuse expensive integrand values.
struct WeightedRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    [[nodiscard]] double expect(const std::function<double(double)>& f) const;
};
WeightedRule piecewise_rule(const DistSpec& dist, std::span<const double> breakpoints,
                            std::size_t points = 32);

nlohmann::json basis_to_json(const SieveBasis& basis);
SieveBasis basis_from_json(const nlohmann::json& doc);

} // namespace lsmc
