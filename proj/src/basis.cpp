#include "lsmc/basis.hpp"

#include "lsmc/errors.hpp"
#include "lsmc/normal.hpp"
#include "lsmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lsmc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void require_analytic(const char* what) {
    throw ConfigError(std::string(what) + " requires an analytic (uniform or truncated normal) law");
}

// Integrate f * density over [lo, hi] to a relative tolerance with an absolute floor.
double bin_integral(const DistSpec& dist, double lo, double hi, const std::function<double(double)>& f,
                    double abs_floor, double rel = 1e-13) {
    return integrate_adaptive([&](double u) { return f(u) * dist.density(u); }, lo, hi, rel, abs_floor);
}

// Squared residuals lose relative accuracy to cancellation, so their integrals
// are only asked for what the integrand can deliver.
constexpr double kResidualRelTolerance = 1e-9;

} // namespace

// ---- DistSpec -------------------------------------------------------------

DistSpec DistSpec::uniform(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) throw ConfigError("uniform law needs a < b");
    return DistSpec(UniformLaw{a, b});
}

DistSpec DistSpec::truncated_normal(double mean, double variance, double a1, double a2) {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw ConfigError("truncated normal variance must be > 0");
    }
    if (!std::isfinite(mean) || !std::isfinite(a1) || !std::isfinite(a2) || !(a1 < a2)) {
        throw ConfigError("truncated normal needs finite mean and a1 < a2");
    }
    DistSpec d(TruncatedNormalLaw{mean, variance, a1, a2});
    const double sd = std::sqrt(variance);
    d.normalizer_ = normal::mass((a1 - mean) / sd, (a2 - mean) / sd);
    if (!(d.normalizer_ > 0.0)) throw ConfigError("truncated normal domain carries no mass");
    return d;
}

DistSpec DistSpec::central_normal(double mean, double variance, double eps) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw ConfigError("domain epsilon must lie in (0, 1)");
    if (!(variance > 0.0)) throw ConfigError("truncated normal variance must be > 0");
    const double half_width = std::sqrt(variance) * normal::upper_quantile(0.5 * eps);
    return truncated_normal(mean, variance, mean - half_width, mean + half_width);
}

DistSpec DistSpec::empirical(std::vector<double> sample, double a1, double a2) {
    if (!std::isfinite(a1) || !std::isfinite(a2) || !(a1 < a2)) {
        throw ConfigError("empirical law needs a1 < a2");
    }
    std::erase_if(sample, [&](double x) { return !(x >= a1 && x <= a2); });
    std::sort(sample.begin(), sample.end());
    if (sample.empty()) throw ConfigError("empirical law has no points inside its domain");
    return DistSpec(EmpiricalLaw{std::move(sample), a1, a2});
}

DistSpec DistSpec::empirical(std::vector<double> sample) {
    if (sample.empty()) throw ConfigError("empirical law needs a non-empty sample");
    const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
    const double a1 = *lo;
    const double a2 = *hi;
    return empirical(std::move(sample), a1, a2);
}

Domain DistSpec::domain() const {
    return std::visit(overloaded{
                          [](const UniformLaw& l) { return Domain{l.a, l.b, 1.0}; },
                          [this](const TruncatedNormalLaw& l) { return Domain{l.a1, l.a2, normalizer_}; },
                          [](const EmpiricalLaw& l) { return Domain{l.a1, l.a2, 1.0}; },
                      },
                      law_);
}

double DistSpec::density(double u) const {
    return std::visit(overloaded{
                          [u](const UniformLaw& l) { return (u >= l.a && u <= l.b) ? 1.0 / (l.b - l.a) : 0.0; },
                          [u, this](const TruncatedNormalLaw& l) {
                              if (!(u >= l.a1 && u <= l.a2)) return 0.0;
                              const double sd = std::sqrt(l.variance);
                              return normal::pdf((u - l.mean) / sd) / (sd * normalizer_);
                          },
                          [](const EmpiricalLaw&) -> double { require_analytic("density"); },
                      },
                      law_);
}

double DistSpec::cdf(double u) const {
    return std::visit(overloaded{
                          [u](const UniformLaw& l) { return std::clamp((u - l.a) / (l.b - l.a), 0.0, 1.0); },
                          [u, this](const TruncatedNormalLaw& l) {
                              if (u <= l.a1) return 0.0;
                              if (u >= l.a2) return 1.0;
                              const double sd = std::sqrt(l.variance);
                              return normal::mass((l.a1 - l.mean) / sd, (u - l.mean) / sd) / normalizer_;
                          },
                          [](const EmpiricalLaw&) -> double { require_analytic("cdf"); },
                      },
                      law_);
}

double DistSpec::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("quantile level must lie in [0, 1]");
    return std::visit(
        overloaded{
            [p](const UniformLaw& l) {
                if (p == 1.0) return l.b;
                return l.a + p * (l.b - l.a);
            },
            [p, this](const TruncatedNormalLaw& l) {
                if (p == 0.0) return l.a1;
                if (p == 1.0) return l.a2;
                const double sd = std::sqrt(l.variance);
                const double alpha = (l.a1 - l.mean) / sd;
                const double beta = (l.a2 - l.mean) / sd;
                double z;
                if (p <= 0.5) {
                    z = normal::quantile(normal::cdf(alpha) + p * normalizer_);
                } else {
                    z = normal::upper_quantile(normal::sf(beta) + (1.0 - p) * normalizer_);
                }
                return std::clamp(l.mean + sd * z, l.a1, l.a2);
            },
            [](const EmpiricalLaw&) -> double { require_analytic("quantile"); },
        },
        law_);
}

std::array<double, 5> DistSpec::central_moments(double lo, double hi, double c, bool right_closed) const {
    std::array<double, 5> m{};
    std::visit(
        overloaded{
            [&](const UniformLaw& l) {
                const double x0 = std::max(lo, l.a) - c;
                const double x1 = std::min(hi, l.b) - c;
                if (!(x1 > x0)) return;
                double p0 = x0;
                double p1 = x1;
                for (int j = 0; j < 5; ++j) {
                    m[j] = (p1 - p0) / ((j + 1) * (l.b - l.a));
                    p0 *= x0;
                    p1 *= x1;
                }
            },
            [&](const TruncatedNormalLaw& l) {
                const double sd = std::sqrt(l.variance);
                const double alpha = (std::max(lo, l.a1) - l.mean) / sd;
                const double beta = (std::min(hi, l.a2) - l.mean) / sd;
                if (!(beta > alpha)) return;
                // J_j = int_alpha^beta (z - zc)^j phi(z) dz via integration by parts:
                // J_j = -zc J_{j-1} + (j-1) J_{j-2} + ya^{j-1} phi(alpha) - yb^{j-1} phi(beta).
                const double zc = (c - l.mean) / sd;
                const double ya = alpha - zc;
                const double yb = beta - zc;
                const double pa = normal::pdf(alpha);
                const double pb = normal::pdf(beta);
                std::array<double, 5> J{};
                J[0] = normal::mass(alpha, beta);
                double ya_pow = 1.0;
                double yb_pow = 1.0;
                for (int j = 1; j < 5; ++j) {
                    J[j] = -zc * J[j - 1] + (j >= 2 ? (j - 1) * J[j - 2] : 0.0) + ya_pow * pa - yb_pow * pb;
                    ya_pow *= ya;
                    yb_pow *= yb;
                }
                double scale = 1.0 / normalizer_;
                for (int j = 0; j < 5; ++j) {
                    m[j] = J[j] * scale;
                    scale *= sd;
                }
            },
            [&](const EmpiricalLaw& l) {
                const auto first = std::lower_bound(l.sample.begin(), l.sample.end(), lo);
                const auto last = right_closed ? std::upper_bound(first, l.sample.end(), hi)
                                               : std::lower_bound(first, l.sample.end(), hi);
                for (auto it = first; it != last; ++it) {
                    const double y = *it - c;
                    double p = 1.0;
                    for (int j = 0; j < 5; ++j) {
                        m[j] += p;
                        p *= y;
                    }
                }
                for (double& v : m) v /= static_cast<double>(l.sample.size());
            },
        },
        law_);
    return m;
}

double DistSpec::first_moment(double lo, double hi, bool right_closed) const {
    // E[1 U] = c * E[1] + E[1 (U - c)] for any c; expand about the bin midpoint.
    const double mid = 0.5 * (lo + hi);
    const auto m = central_moments(lo, hi, mid, right_closed);
    return mid * m[0] + m[1];
}

std::string DistSpec::describe() const {
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const UniformLaw& l) { out << "uniform(" << l.a << "," << l.b << ")"; },
                   [&](const TruncatedNormalLaw& l) {
                       out << "truncated_normal(" << l.mean << "," << l.variance << ",[" << l.a1 << ","
                           << l.a2 << "])";
                   },
                   [&](const EmpiricalLaw& l) {
                       out << "empirical(n=" << l.sample.size() << ",[" << l.a1 << "," << l.a2 << "])";
                   },
               },
               law_);
    return out.str();
}

// ---- partition ------------------------------------------------------------

std::optional<std::size_t> BinPartition::locate(double u) const {
    if (!(u >= edges.front() && u <= edges.back())) return std::nullopt;
    if (u == edges.back()) return K - 1;
    const auto it = std::upper_bound(edges.begin(), edges.end(), u);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

void BinPartition::validate() const {
    if (K < 1 || edges.size() != K + 1) throw ConfigError("partition needs K >= 1 and K + 1 edges");
    for (std::size_t k = 0; k < K; ++k) {
        if (!(edges[k] < edges[k + 1])) throw NumericalError("partition edges must be strictly increasing");
    }
    if (edges.front() != domain.a1 || edges.back() != domain.a2) {
        throw NumericalError("partition edges must start at a1 and end at a2");
    }
}

BinPartition build_partition(const DistSpec& dist, std::size_t K) {
    if (K < 1) throw ConfigError("number of bins K must be >= 1");
    BinPartition part;
    part.K = K;
    part.domain = dist.domain();
    part.edges.resize(K + 1);
    part.edges.front() = part.domain.a1;
    part.edges.back() = part.domain.a2;
    if (dist.analytic()) {
        part.mode = PartitionMode::analytic;
        for (std::size_t k = 1; k < K; ++k) {
            part.edges[k] = dist.quantile(static_cast<double>(k) / static_cast<double>(K));
        }
    } else {
        part.mode = PartitionMode::empirical;
        const auto& pilot = std::get<EmpiricalLaw>(dist.law()).sample;
        const std::size_t n = pilot.size();
        if (n < kMinPilotPerBin * K) {
            throw ConfigError("empirical pilot of " + std::to_string(n) + " points is below 10*K = " +
                              std::to_string(kMinPilotPerBin * K));
        }
        for (std::size_t k = 1; k < K; ++k) {
            const std::size_t m = k * n / K;
            part.edges[k] = std::clamp(0.5 * (pilot[m - 1] + pilot[m]), part.domain.a1, part.domain.a2);
        }
    }
    part.validate();
    return part;
}

BinMoments bin_moments(const BinPartition& partition, const DistSpec& dist) {
    partition.validate();
    const std::size_t K = partition.K;
    BinMoments out;
    out.centers.resize(K);
    out.norm0.assign(K, std::sqrt(static_cast<double>(K)));
    out.norm1.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double lo = partition.edges[k];
        const double hi = partition.edges[k + 1];
        const bool closed = k + 1 == K;
        const double mid = 0.5 * (lo + hi);
        const auto about_mid = dist.central_moments(lo, hi, mid, closed);
        if (!(about_mid[0] > 0.0)) throw NumericalError("bin " + std::to_string(k) + " carries no mass");
        // Conditional bin mean; equals K E[1_k U] when the bin mass is exactly 1/K.
        const double c = mid + about_mid[1] / about_mid[0];
        const double second = dist.central_moments(lo, hi, c, closed)[2];
        if (!(second > 0.0)) {
            throw NumericalError("bin " + std::to_string(k) + " has zero second moment (degenerate density)");
        }
        out.centers[k] = std::clamp(c, lo, hi);
        out.norm1[k] = 1.0 / std::sqrt(second);
    }
    return out;
}

void SieveBasis::validate() const {
    partition.validate();
    const std::size_t K = partition.K;
    if (centers.size() != K || norm0.size() != K || norm1.size() != K) {
        throw ConfigError("basis vectors must have length K");
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (norm0[k] != std::sqrt(static_cast<double>(K))) throw ConfigError("C0_k must equal sqrt(K)");
        if (!(norm1[k] > 0.0) || !std::isfinite(norm1[k])) throw ConfigError("C1_k must be positive");
        if (!(centers[k] >= partition.edges[k] && centers[k] <= partition.edges[k + 1])) {
            throw ConfigError("c_k must lie inside its bin");
        }
    }
}

SieveBasis make_basis(BinPartition partition, const BinMoments& moments) {
    SieveBasis basis{std::move(partition), moments.centers, moments.norm0, moments.norm1};
    basis.validate();
    return basis;
}

SieveBasis build_basis(const DistSpec& dist, std::size_t K) {
    BinPartition part = build_partition(dist, K);
    const BinMoments moments = bin_moments(part, dist);
    return make_basis(std::move(part), moments);
}

Eigen::VectorXd eval_basis(const SieveBasis& basis, double u) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.dim()));
    if (auto k = basis.locate(u)) {
        const auto [e0, e1] = basis.pair(*k, u);
        e[static_cast<Eigen::Index>(2 * *k)] = e0;
        e[static_cast<Eigen::Index>(2 * *k + 1)] = e1;
    }
    return e;
}

double eval_expansion(const SieveBasis& basis, std::span<const double> coefficients, double u) {
    if (coefficients.size() != basis.dim()) throw ConfigError("coefficient length must equal 2K");
    const auto k = basis.locate(u);
    if (!k) return 0.0;
    const auto [e0, e1] = basis.pair(*k, u);
    return coefficients[2 * *k] * e0 + coefficients[2 * *k + 1] * e1;
}

Eigen::MatrixXd design_matrix(const SieveBasis& basis, std::span<const double> points) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()),
                                              static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (auto k = basis.locate(points[i])) {
            const auto [e0, e1] = basis.pair(*k, points[i]);
            E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * *k)) = e0;
            E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * *k + 1)) = e1;
        }
    }
    return E;
}

// ---- diagnostics ----------------------------------------------------------

GramDiagnostics gram_diagnostics(const Eigen::MatrixXd& gram) {
    GramDiagnostics out;
    out.frobenius_dist = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    out.lambda_min = solver.eigenvalues().minCoeff();
    return out;
}

GramDiagnostics gram_diagnostics(const SieveBasis& basis, const SampleSet& sample) {
    const std::size_t N = sample.n();
    if (N == 0) throw ConfigError("Gram diagnostics need a non-empty sample");
    const std::size_t K = basis.K();
    // Disjoint supports make E^T E block diagonal with one 2x2 block per bin.
    std::vector<std::array<double, 3>> blocks(K, {0.0, 0.0, 0.0});
    for (Eigen::Index i = 0; i < sample.features.rows(); ++i) {
        const double u = sample.features(i, 0);
        if (auto k = basis.locate(u)) {
            const auto [e0, e1] = basis.pair(*k, u);
            blocks[*k][0] += e0 * e0;
            blocks[*k][1] += e0 * e1;
            blocks[*k][2] += e1 * e1;
        }
    }
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * K),
                                                 static_cast<Eigen::Index>(2 * K));
    for (std::size_t k = 0; k < K; ++k) {
        const auto a = static_cast<Eigen::Index>(2 * k);
        gram(a, a) = blocks[k][0];
        gram(a, a + 1) = gram(a + 1, a) = blocks[k][1];
        gram(a + 1, a + 1) = blocks[k][2];
    }
    gram /= static_cast<double>(N);
    GramDiagnostics out = gram_diagnostics(gram);
    out.rank_deficiency_warning = N < 2 * K;
    return out;
}

Eigen::MatrixXd gram_quadrature(const SieveBasis& basis, const DistSpec& dist) {
    if (!dist.analytic()) require_analytic("gram_quadrature");
    const std::size_t K = basis.K();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * K),
                                                 static_cast<Eigen::Index>(2 * K));
    for (std::size_t k = 0; k < K; ++k) {
        const double lo = basis.partition.edges[k];
        const double hi = basis.partition.edges[k + 1];
        const double c = basis.centers[k];
        const double C0 = basis.norm0[k];
        const double C1 = basis.norm1[k];
        const auto a = static_cast<Eigen::Index>(2 * k);
        gram(a, a) = bin_integral(dist, lo, hi, [&](double) { return C0 * C0; }, 1e-16);
        gram(a, a + 1) = gram(a + 1, a) =
            bin_integral(dist, lo, hi, [&](double u) { return C0 * C1 * (u - c); }, 1e-16);
        gram(a + 1, a + 1) =
            bin_integral(dist, lo, hi, [&](double u) { return C1 * C1 * (u - c) * (u - c); }, 1e-16);
    }
    return gram;
}

double h_tilde(const SieveBasis& basis, const DistSpec& dist, std::size_t N) {
    if (N < 1) throw ConfigError("h_tilde needs N >= 1");
    const std::size_t K = basis.K();
    const double Kd = static_cast<double>(K);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const auto m = dist.central_moments(basis.partition.edges[k], basis.partition.edges[k + 1],
                                            basis.centers[k], k + 1 == K);
        const double C1sq = basis.norm1[k] * basis.norm1[k];
        total += Kd * Kd * m[0] + 2.0 * Kd * C1sq * m[2] + C1sq * C1sq * m[4];
    }
    return total / static_cast<double>(N);
}

double moment_ratio_max(const SieveBasis& basis, const DistSpec& dist) {
    double worst = 0.0;
    for (std::size_t k = 0; k < basis.K(); ++k) {
        const auto m = dist.central_moments(basis.partition.edges[k], basis.partition.edges[k + 1],
                                            basis.centers[k], k + 1 == basis.K());
        worst = std::max(worst, m[4] / (m[2] * m[2]));
    }
    return worst;
}

Eigen::VectorXd projection_coefficients(const std::function<double(double)>& g,
                                        const SieveBasis& basis, const DistSpec& dist) {
    if (!dist.analytic()) require_analytic("projection_coefficients");
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t k = 0; k < basis.K(); ++k) {
        const double lo = basis.partition.edges[k];
        const double hi = basis.partition.edges[k + 1];
        const double c = basis.centers[k];
        alpha[static_cast<Eigen::Index>(2 * k)] =
            basis.norm0[k] * bin_integral(dist, lo, hi, g, 1e-18);
        alpha[static_cast<Eigen::Index>(2 * k + 1)] =
            basis.norm1[k] * bin_integral(dist, lo, hi, [&](double u) { return g(u) * (u - c); }, 1e-18);
    }
    return alpha;
}

ApproxErrorMoments approx_error_moments(const std::function<double(double)>& g,
                                        const SieveBasis& basis, const DistSpec& dist) {
    const Eigen::VectorXd alpha = projection_coefficients(g, basis, dist);
    double second = 0.0;
    double fourth = 0.0;
    for (std::size_t k = 0; k < basis.K(); ++k) {
        const double lo = basis.partition.edges[k];
        const double hi = basis.partition.edges[k + 1];
        const double a0 = alpha[static_cast<Eigen::Index>(2 * k)];
        const double a1 = alpha[static_cast<Eigen::Index>(2 * k + 1)];
        auto residual = [&](double u) {
            const auto [e0, e1] = basis.pair(k, u);
            return g(u) - a0 * e0 - a1 * e1;
        };
        second += bin_integral(dist, lo, hi, [&](double u) { return std::pow(residual(u), 2); }, 1e-28,
                               kResidualRelTolerance);
        fourth += bin_integral(dist, lo, hi, [&](double u) { return std::pow(residual(u), 4); }, 1e-44,
                               kResidualRelTolerance);
    }
    return {second, std::sqrt(fourth), std::sqrt(second)};
}

double expect_piecewise(const DistSpec& dist, std::span<const double> breakpoints,
                        const std::function<double(double)>& f, std::size_t points) {
    return piecewise_rule(dist, breakpoints, points).expect(f);
}

WeightedRule piecewise_rule(const DistSpec& dist, std::span<const double> breakpoints,
                            std::size_t points) {
    if (!dist.analytic()) require_analytic("piecewise_rule");
    if (breakpoints.size() < 2) throw ConfigError("piecewise_rule needs at least two breakpoints");
    const QuadratureRule& gl = gauss_legendre(points);
    WeightedRule rule;
    rule.nodes.reserve((breakpoints.size() - 1) * points);
    rule.weights.reserve((breakpoints.size() - 1) * points);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double mid = 0.5 * (breakpoints[i] + breakpoints[i + 1]);
        const double half = 0.5 * (breakpoints[i + 1] - breakpoints[i]);
        for (std::size_t j = 0; j < points; ++j) {
            const double u = mid + half * gl.nodes[j];
            rule.nodes.push_back(u);
            rule.weights.push_back(half * gl.weights[j] * dist.density(u));
        }
    }
    return rule;
}

double WeightedRule::expect(const std::function<double(double)>& f) const {
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) total += weights[i] * f(nodes[i]);
    return total;
}

// ---- serialization --------------------------------------------------------

nlohmann::json basis_to_json(const SieveBasis& basis) {
    nlohmann::json doc;
    doc["K"] = basis.K();
    doc["dim"] = basis.dim();
    doc["mode"] = basis.partition.mode == PartitionMode::analytic ? "analytic" : "empirical";
    doc["domain"] = {{"a1", basis.partition.domain.a1},
                     {"a2", basis.partition.domain.a2},
                     {"mass", basis.partition.domain.mass}};
    doc["edges"] = basis.partition.edges;
    doc["centers"] = basis.centers;
    doc["norm0"] = basis.norm0;
    doc["norm1"] = basis.norm1;
    return doc;
}

SieveBasis basis_from_json(const nlohmann::json& doc) {
    try {
        BinPartition part;
        part.K = doc.at("K").get<std::size_t>();
        const std::string mode = doc.at("mode").get<std::string>();
        if (mode != "analytic" && mode != "empirical") throw ConfigError("basis mode must be analytic or empirical");
        part.mode = mode == "analytic" ? PartitionMode::analytic : PartitionMode::empirical;
        const auto& dom = doc.at("domain");
        part.domain = Domain{dom.at("a1").get<double>(), dom.at("a2").get<double>(),
                             dom.at("mass").get<double>()};
        part.edges = doc.at("edges").get<std::vector<double>>();
        BinMoments moments{doc.at("centers").get<std::vector<double>>(),
                           doc.at("norm0").get<std::vector<double>>(),
                           doc.at("norm1").get<std::vector<double>>()};
        return make_basis(std::move(part), moments);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed basis document: ") + e.what());
    }
}

} // namespace lsmc
