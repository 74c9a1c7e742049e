#include "lsmc/model.hpp"

#include "lsmc/errors.hpp"
#include "lsmc/normal.hpp"
#include "lsmc/parallel.hpp"
#include "lsmc/rng.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace lsmc {

namespace {

constexpr std::size_t kChunk = 2048;

bool is_integer_time(double t) { return t == std::floor(t); }

void check_finite_time(double t, const char* what) {
    if (!std::isfinite(t)) throw ConfigError(std::string(what) + " must be finite");
}

// One path value at an arbitrary time set, simulated exactly on the process law.
class PathWalker {
public:
    PathWalker(const ProcessSpec& proc, NormalStream& normals)
        : proc_(proc), normals_(normals),
          value_(proc.kind == ProcessKind::gbm ? proc.spot : 0.0) {}

    double advance_to(double t) {
        const double dt = t - time_;
        if (dt > 0.0) {
            const double z = normals_.next();
            if (proc_.kind == ProcessKind::gbm) {
                const double s = proc_.volatility;
                value_ *= std::exp(-0.5 * s * s * dt + s * std::sqrt(dt) * z);
            } else {
                value_ += std::sqrt(dt) * z;
            }
            time_ = t;
        }
        return value_;
    }

private:
    const ProcessSpec& proc_;
    NormalStream& normals_;
    double time_ = 0.0;
    double value_;
};

// Brownian path on the grid k * horizon / steps, k = 0..steps. For a power-of-two
// step count the grid is filled by dyadic midpoint refinement (Levy's
// construction), so the path on steps/2 uses a prefix of the same normals and
// the coarse grid is a subsample of the fine one.
std::vector<double> brownian_grid(NormalStream& normals, double horizon, std::size_t steps) {
    std::vector<double> w(steps + 1, 0.0);
    const double h = horizon / static_cast<double>(steps);
    if (std::has_single_bit(steps)) {
        w[steps] = std::sqrt(horizon) * normals.next();
        for (std::size_t span = steps; span > 1; span /= 2) {
            const double sd = std::sqrt(0.25 * h * static_cast<double>(span));
            for (std::size_t left = 0; left < steps; left += span) {
                w[left + span / 2] = 0.5 * (w[left] + w[left + span]) + sd * normals.next();
            }
        }
        return w;
    }
    const double root = std::sqrt(h);
    for (std::size_t k = 1; k <= steps; ++k) w[k] = w[k - 1] + root * normals.next();
    return w;
}

// Trapezoid rule for the integral of the path over [0, horizon]; returns
// (integral, terminal value).
std::pair<double, double> trapezoid_integral(const ProcessSpec& proc, NormalStream& normals,
                                             double horizon, std::size_t steps) {
    const std::vector<double> w = brownian_grid(normals, horizon, steps);
    const double h = horizon / static_cast<double>(steps);
    auto value = [&](std::size_t k) {
        if (proc.kind != ProcessKind::gbm) return w[k];
        const double s = proc.volatility;
        return proc.spot * std::exp(s * w[k] - 0.5 * s * s * h * static_cast<double>(k));
    };
    double sum = 0.5 * (value(0) + value(steps));
    for (std::size_t k = 1; k < steps; ++k) sum += value(k);
    return {sum * h, value(steps)};
}

struct TreeLeg {
    int mid;
    std::array<int, 2> next;
};

// Z1: 10 -> {12, 6}; 12 -> {14, 8}; 6 -> 6 w.p. 1 (two identical branches).
constexpr std::array<TreeLeg, 2> kAsset1{{{12, {14, 8}}, {6, {6, 6}}}};
// Z2: 10 -> {12, 6}; 12 -> {14, 8}; 6 -> {9, 1}.
constexpr std::array<TreeLeg, 2> kAsset2{{{12, {14, 8}}, {6, {9, 1}}}};

void draw_feature(const ProcessSpec& proc, const FeatureSpec& feat, std::uint64_t key,
                  Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    NormalStream normals(key);
    if (proc.kind == ProcessKind::basket_tree) {
        const int i1 = normals.uniform() < 0.5 ? 0 : 1;
        const int i2 = normals.uniform() < 0.5 ? 0 : 1;
        const int j1 = normals.uniform() < 0.5 ? 0 : 1;
        const int j2 = normals.uniform() < 0.5 ? 0 : 1;
        const int t = static_cast<int>(feat.eval_time);
        int z1 = 10;
        int z2 = 10;
        if (t >= 1) z1 = kAsset1[i1].mid, z2 = kAsset2[i2].mid;
        if (t >= 2) z1 = kAsset1[i1].next[j1], z2 = kAsset2[i2].next[j2];
        row[0] = static_cast<double>(z1 + z2);
        return;
    }
    PathWalker walker(proc, normals);
    switch (feat.kind) {
    case FeatureKind::terminal:
        row[0] = walker.advance_to(feat.eval_time);
        break;
    case FeatureKind::pair_u_T:
        row[0] = walker.advance_to(feat.intermediate_time);
        row[1] = walker.advance_to(feat.eval_time);
        break;
    case FeatureKind::path_integral:
    {
        const auto [integral, terminal] = trapezoid_integral(proc, normals, feat.eval_time, kDefaultIntegralSteps);
        row[0] = integral;
        if (feat.eval_time < proc.horizon) row[1] = terminal;
        break;
    }
    case FeatureKind::basket_sum:
        throw ConfigError("basket_sum feature requires the basket_tree process");
    }
}

std::string discretization_of(const FeatureSpec& feat) {
    if (feat.kind == FeatureKind::path_integral) {
        return "trapezoid steps=" + std::to_string(kDefaultIntegralSteps);
    }
    return "exact";
}

} // namespace

void ProcessSpec::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("process.horizon must be > 0");
    switch (kind) {
    case ProcessKind::brownian:
        if (dimension != 1) throw ConfigError("process.dimension must be 1 for brownian");
        break;
    case ProcessKind::gbm:
        if (!(volatility > 0.0) || !std::isfinite(volatility)) {
            throw ConfigError("process.volatility must be > 0 for gbm");
        }
        if (!(spot > 0.0)) throw ConfigError("process.spot must be > 0 for gbm");
        if (dimension != 1) throw ConfigError("process.dimension must be 1 for gbm");
        break;
    case ProcessKind::basket_tree:
        if (dimension != 2) throw ConfigError("process.dimension must be 2 for basket_tree");
        if (horizon != 2.0) throw ConfigError("process.horizon must be 2 for basket_tree");
        break;
    }
}

std::size_t FeatureSpec::output_dim(const ProcessSpec& proc) const {
    switch (kind) {
    case FeatureKind::terminal:
    case FeatureKind::basket_sum:
        return 1;
    case FeatureKind::path_integral:
        return eval_time < proc.horizon ? 2 : 1;
    case FeatureKind::pair_u_T:
        return 2;
    }
    return 1;
}

void FeatureSpec::validate(const ProcessSpec& proc) const {
    check_finite_time(eval_time, "feature.eval_time");
    if (eval_time < 0.0 || eval_time > proc.horizon) {
        throw ConfigError("feature.eval_time must lie in [0, horizon]");
    }
    if (proc.kind == ProcessKind::basket_tree) {
        if (kind != FeatureKind::basket_sum) {
            throw ConfigError("basket_tree process supports only the basket_sum feature");
        }
        if (!is_integer_time(eval_time)) throw ConfigError("basket_tree times are 0, 1 or 2");
        return;
    }
    if (kind == FeatureKind::basket_sum) {
        throw ConfigError("basket_sum feature requires the basket_tree process");
    }
    if (kind == FeatureKind::pair_u_T) {
        check_finite_time(intermediate_time, "feature.intermediate_time");
        if (intermediate_time < 0.0 || !(intermediate_time < eval_time)) {
            throw ConfigError("feature.intermediate_time must satisfy 0 <= u < eval_time");
        }
    }
    if (kind == FeatureKind::path_integral && !(eval_time > 0.0)) {
        throw ConfigError("path_integral feature needs eval_time > 0");
    }
}

void Domain::validate() const {
    if (!std::isfinite(a1) || !std::isfinite(a2) || !(a1 < a2)) {
        throw ConfigError("domain must satisfy a1 < a2");
    }
    if (!(mass > 0.0) || mass > 1.0) throw ConfigError("domain mass must lie in (0, 1]");
}

void SampleSet::validate() const {
    if (!payoffs.empty() && payoffs.size() != n()) {
        throw ConfigError("sample payoffs length differs from feature row count");
    }
    if (!features.allFinite()) throw NumericalError("sample contains non-finite features");
    for (double x : payoffs) {
        if (!std::isfinite(x)) throw NumericalError("sample contains non-finite payoffs");
    }
}

std::string describe(const ProcessSpec& proc) {
    std::ostringstream out;
    switch (proc.kind) {
    case ProcessKind::brownian:
        out << "brownian T=" << proc.horizon;
        break;
    case ProcessKind::gbm:
        out << "gbm sigma=" << proc.volatility << " S0=" << proc.spot << " T=" << proc.horizon;
        break;
    case ProcessKind::basket_tree:
        out << "basket_tree d=2 T=2";
        break;
    }
    return out.str();
}

SampleSet simulate_terminal(const ProcessSpec& proc, const FeatureSpec& feat, std::size_t n,
                            std::uint64_t seed, unsigned threads) {
    proc.validate();
    feat.validate(proc);
    if (n < 1) throw ConfigError("sample size must be >= 1");
    SampleSet out;
    out.features.resize(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(feat.output_dim(proc)));
    out.seed = seed;
    out.meta.law = describe(proc);
    out.meta.discretization = discretization_of(feat);
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            draw_feature(proc, feat, derive_key(seed, {i}), out.features.row(static_cast<Eigen::Index>(i)));
        }
    });
    return out;
}

SampleSet simulate_conditional(const ProcessSpec& proc, const FeatureSpec& feat, const Domain& dom,
                               std::size_t n, std::uint64_t seed, unsigned threads) {
    proc.validate();
    feat.validate(proc);
    dom.validate();
    if (n < 1) throw ConfigError("sample size must be >= 1");
    const double mass = feature_mass(proc, feat, dom.a1, dom.a2).value_or(dom.mass);
    if (mass < kMinConditioningMass) {
        throw ConfigError("conditioning domain mass below 1e-6; rejection sampling refused");
    }
    const auto max_attempts =
        static_cast<std::uint64_t>(std::max(1.0e4, 1.0e3 / mass));

    SampleSet out;
    out.features.resize(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(feat.output_dim(proc)));
    out.seed = seed;
    out.domain = Domain{dom.a1, dom.a2, mass};
    out.meta.law = describe(proc) + " conditioned on [a1,a2]";
    out.meta.discretization = discretization_of(feat);

    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> attempts(chunks, 0);
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        Eigen::RowVectorXd row(out.features.cols());
        for (std::size_t i = c * kChunk; i < end; ++i) {
            for (std::uint64_t a = 0;; ++a) {
                if (a >= max_attempts) throw NumericalError("rejection sampler exceeded its attempt cap");
                draw_feature(proc, feat, derive_key(seed, {i, a}), row);
                if (dom.contains(row[0])) {
                    out.features.row(static_cast<Eigen::Index>(i)) = row;
                    attempts[c] += a + 1;
                    break;
                }
            }
        }
    });
    out.meta.attempts = std::accumulate(attempts.begin(), attempts.end(), std::uint64_t{0});
    return out;
}

SampleSet simulate_path_integral(const ProcessSpec& proc, double horizon, std::size_t steps,
                                 std::size_t n, std::uint64_t seed, unsigned threads) {
    proc.validate();
    if (proc.kind == ProcessKind::basket_tree) {
        throw ConfigError("path integral is not defined for the basket_tree process");
    }
    if (steps < 2) throw ConfigError("path integral needs at least 2 steps");
    if (!(horizon > 0.0) || horizon > proc.horizon) {
        throw ConfigError("path integral horizon must lie in (0, process horizon]");
    }
    if (n < 1) throw ConfigError("sample size must be >= 1");
    SampleSet out;
    out.features.resize(static_cast<Eigen::Index>(n), 1);
    out.seed = seed;
    out.meta.law = describe(proc);
    out.meta.discretization = "trapezoid steps=" + std::to_string(steps);
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            NormalStream normals(derive_key(seed, {i}));
            out.features(static_cast<Eigen::Index>(i), 0) = trapezoid_integral(proc, normals, horizon, steps).first;
        }
    });
    return out;
}

std::optional<std::pair<double, double>> gaussian_feature_law(const ProcessSpec& proc,
                                                              const FeatureSpec& feat) {
    if (proc.kind != ProcessKind::brownian) return std::nullopt;
    switch (feat.kind) {
    case FeatureKind::terminal:
        return std::pair{0.0, feat.eval_time};
    case FeatureKind::pair_u_T:
        return std::pair{0.0, feat.intermediate_time};
    case FeatureKind::path_integral:
        return std::pair{0.0, feat.eval_time * feat.eval_time * feat.eval_time / 3.0};
    case FeatureKind::basket_sum:
        return std::nullopt;
    }
    return std::nullopt;
}

std::optional<double> feature_mass(const ProcessSpec& proc, const FeatureSpec& feat, double a1,
                                   double a2) {
    if (auto law = gaussian_feature_law(proc, feat)) {
        const double sd = std::sqrt(law->second);
        if (sd == 0.0) return (a1 <= law->first && law->first <= a2) ? 1.0 : 0.0;
        return normal::mass((a1 - law->first) / sd, (a2 - law->first) / sd);
    }
    if (proc.kind == ProcessKind::gbm &&
        (feat.kind == FeatureKind::terminal || feat.kind == FeatureKind::pair_u_T)) {
        const double t = feat.kind == FeatureKind::terminal ? feat.eval_time : feat.intermediate_time;
        const double s = proc.volatility * std::sqrt(t);
        const double m = std::log(proc.spot) - 0.5 * proc.volatility * proc.volatility * t;
        if (s == 0.0) return (a1 <= proc.spot && proc.spot <= a2) ? 1.0 : 0.0;
        const double lo = a1 <= 0.0 ? -INFINITY : (std::log(a1) - m) / s;
        const double hi = a2 <= 0.0 ? -INFINITY : (std::log(a2) - m) / s;
        return normal::mass(lo, hi);
    }
    return std::nullopt;
}

Domain central_domain(const ProcessSpec& proc, const FeatureSpec& feat, double eps) {
    proc.validate();
    feat.validate(proc);
    if (!(eps > 0.0) || !(eps < 1.0)) throw ConfigError("domain epsilon must lie in (0, 1)");
    const double z = normal::upper_quantile(0.5 * eps);
    if (auto law = gaussian_feature_law(proc, feat)) {
        const double sd = std::sqrt(law->second);
        if (sd == 0.0) throw ConfigError("feature law is degenerate at this time");
        return Domain{law->first - z * sd, law->first + z * sd, 1.0 - eps};
    }
    if (proc.kind == ProcessKind::gbm &&
        (feat.kind == FeatureKind::terminal || feat.kind == FeatureKind::pair_u_T)) {
        const double t = feat.kind == FeatureKind::terminal ? feat.eval_time : feat.intermediate_time;
        const double s = proc.volatility * std::sqrt(t);
        if (s == 0.0) throw ConfigError("feature law is degenerate at this time");
        const double m = std::log(proc.spot) - 0.5 * proc.volatility * proc.volatility * t;
        return Domain{std::exp(m - z * s), std::exp(m + z * s), 1.0 - eps};
    }
    throw ConfigError("no closed-form feature law for a central domain");
}

// ---- two-asset discrete tree ---------------------------------------------

namespace {

Rational call_value(int sum) { return Rational(std::max(sum - kBasketStrike, 0)); }

} // namespace

std::vector<BasketNode> basket_tree_expectations() {
    std::vector<BasketNode> nodes;
    for (const TreeLeg& a : kAsset1) {
        for (const TreeLeg& b : kAsset2) {
            BasketNode node;
            node.z1 = a.mid;
            node.z2 = b.mid;
            node.probability = Rational(1, 4);
            Rational sum(0);
            for (int x : a.next) {
                for (int y : b.next) sum += Rational(1, 4) * call_value(x + y);
            }
            node.expectation = sum;
            nodes.push_back(node);
        }
    }
    return nodes;
}

std::vector<BasketNode> basket_tree_expectations_by_enumeration() {
    struct Leaf {
        int m1, m2, l1, l2;
    };
    std::vector<Leaf> leaves;
    for (int i1 = 0; i1 < 2; ++i1)
        for (int j1 = 0; j1 < 2; ++j1)
            for (int i2 = 0; i2 < 2; ++i2)
                for (int j2 = 0; j2 < 2; ++j2)
                    leaves.push_back({kAsset1[i1].mid, kAsset2[i2].mid, kAsset1[i1].next[j1],
                                      kAsset2[i2].next[j2]});
    // Every leaf path has probability 1/16; condition by grouping on the time-1 state.
    std::map<std::pair<int, int>, std::pair<Rational, Rational>> groups;
    for (const Leaf& leaf : leaves) {
        auto& [weight, payoff] = groups[{leaf.m1, leaf.m2}];
        weight += Rational(1, 16);
        payoff += Rational(1, 16) * call_value(leaf.l1 + leaf.l2);
    }
    std::vector<BasketNode> nodes;
    for (const TreeLeg& a : kAsset1) {
        for (const TreeLeg& b : kAsset2) {
            const auto& [weight, payoff] = groups.at({a.mid, b.mid});
            nodes.push_back({a.mid, b.mid, weight, payoff / weight});
        }
    }
    return nodes;
}

Rational basket_tree_expected_payoff() {
    Rational total(0);
    for (const TreeLeg& a : kAsset1)
        for (int x : a.next)
            for (const TreeLeg& b : kAsset2)
                for (int y : b.next) total += Rational(1, 16) * call_value(x + y);
    return total;
}

} // namespace lsmc
