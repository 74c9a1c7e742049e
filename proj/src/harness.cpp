#include "lsmc/harness.hpp"

#include "lsmc/condexp.hpp"
#include "lsmc/config.hpp"
#include "lsmc/errors.hpp"
#include "lsmc/parallel.hpp"
#include "lsmc/regress.hpp"
#include "lsmc/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

namespace lsmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Role tags of the per-repetition substreams.
constexpr std::uint64_t kRegressionDraws = 0;
constexpr std::uint64_t kPairedDraws = 1;
constexpr std::uint64_t kEvaluationDraws = 2;
// Equal-probability panels for conditional-expectation integrals at time t.
constexpr std::size_t kConditionalPanels = 64;
constexpr std::size_t kPanelPoints = 32;

// Truncated Gaussian law of W at `time` on its central 1 - eps interval.
struct Regressor {
    FeatureSpec feature;
    Domain domain;
    DistSpec dist;
};

Regressor regressor_at(const ExperimentConfig& cfg, double time) {
    FeatureSpec feat{FeatureKind::terminal, time, 0.0};
    const auto law = gaussian_feature_law(cfg.process, feat);
    if (!law) throw ConfigError("process.kind: no Gaussian feature law for this process");
    const Domain dom = central_domain(cfg.process, feat, cfg.domain_epsilon);
    return {feat, dom, DistSpec::truncated_normal(law->first, law->second, dom.a1, dom.a2)};
}

ReportRow summarize(std::size_t K, std::size_t N, const std::vector<double>& mse, double approx,
                    double h) {
    ReportRow row;
    row.K = K;
    row.N = N;
    row.approx_l2 = approx;
    row.h_tilde = h;
    double sum = 0.0;
    for (double m : mse) {
        if (std::isnan(m)) {
            ++row.failures;
        } else {
            ++row.reps;
            sum += m;
        }
    }
    if (row.reps == 0) {
        row.mse_mean = kNaN;
        row.mse_stderr = kNaN;
        return row;
    }
    row.mse_mean = sum / static_cast<double>(row.reps);
    if (row.reps > 1) {
        double ss = 0.0;
        for (double m : mse) {
            if (!std::isnan(m)) ss += (m - row.mse_mean) * (m - row.mse_mean);
        }
        row.mse_stderr = std::sqrt(ss / static_cast<double>(row.reps - 1) / static_cast<double>(row.reps));
    }
    return row;
}

std::optional<SlopeFit> try_slope(const std::vector<double>& x, const std::vector<double>& y,
                                  std::vector<std::string>& warnings, const std::string& label) {
    try {
        SlopeFit fit = fit_loglog_slope(x, y);
        for (const auto& w : fit.warnings) warnings.push_back(label + ": " + w);
        return fit;
    } catch (const NumericalError& e) {
        warnings.push_back(label + ": no slope (" + std::string(e.what()) + ")");
        return std::nullopt;
    }
}

// Fresh-sample average of f over `reg`, or the weighted quadrature rule.
double evaluate(const ExperimentConfig& cfg, const Regressor& reg, const WeightedRule& rule,
                const std::function<double(double)>& f, std::size_t N, std::uint64_t key) {
    if (cfg.eval == EvalMethod::quadrature) return rule.expect(f);
    const auto M = static_cast<std::size_t>(std::max(1.0, std::round(cfg.eval_multiplier * static_cast<double>(N))));
    const SampleSet fresh = simulate_conditional(cfg.process, reg.feature, reg.domain, M, key, 1);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < fresh.features.rows(); ++i) sum += f(fresh.features(i, 0));
    return sum / static_cast<double>(M);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

nlohmann::json slope_json(const std::optional<SlopeFit>& fit) {
    if (!fit) return nullptr;
    return {{"slope", fit->slope},
            {"intercept", fit->intercept},
            {"slope_stderr", fit->slope_stderr},
            {"ci", {fit->ci_low, fit->ci_high}},
            {"points", fit->points},
            {"warnings", fit->warnings}};
}

nlohmann::json rows_json(const std::vector<ReportRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    auto num = [](double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    for (const auto& r : rows) {
        out.push_back({{"K", r.K},
                       {"N", r.N},
                       {"reps", r.reps},
                       {"mse_mean", num(r.mse_mean)},
                       {"mse_stderr", num(r.mse_stderr)},
                       {"approx_l2", r.approx_l2},
                       {"h_tilde", r.h_tilde},
                       {"failures", r.failures}});
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- Regress-Later sweep -----------------------------------------------------

ConvergenceReport run_later(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    cfg.validate();
    if (cfg.estimator != EstimatorKind::later) throw ConfigError("estimator: expected later");

    const auto pts = cfg.points();
    const Regressor reg = regressor_at(cfg, cfg.feature.eval_time);
    const auto g = payoff_function(cfg.payoff);

    std::map<std::size_t, SieveBasis> bases;
    std::map<std::size_t, double> approx;
    std::map<std::size_t, WeightedRule> rules;
    for (const auto& [K, N] : pts) {
        if (bases.contains(K)) continue;
        SieveBasis basis = build_basis(reg.dist, K);
        approx[K] = approx_error_moments(g, basis, reg.dist).l2;
        rules[K] = piecewise_rule(reg.dist, basis.partition.edges, kPanelPoints);
        bases.emplace(K, std::move(basis));
    }

    const std::size_t reps = cfg.repetitions;
    std::vector<double> mse(pts.size() * reps, kNaN);
    parallel_for(mse.size(), cfg.threads, [&](std::size_t task) {
        const auto [K, N] = pts[task / reps];
        const std::uint64_t rep = task % reps;
        const SieveBasis& basis = bases.at(K);
        try {
            SampleSet sample = simulate_conditional(cfg.process, reg.feature, reg.domain, N,
                                                    derive_key(cfg.seed, {K, N, rep, kRegressionDraws}), 1);
            attach_payoffs(sample, cfg.payoff);
            const FitResult fit = regress_later_fit(sample, basis);
            const auto err = [&](double u) {
                const double d = g(u) - predict(fit, basis, u);
                return d * d;
            };
            mse[task] = evaluate(cfg, reg, rules.at(K), err, N,
                                 derive_key(cfg.seed, {K, N, rep, kEvaluationDraws}));
        } catch (const NumericalError&) {
            // NaN marks the failed repetition; the row records the count.
        }
    });

    ConvergenceReport report;
    report.config = cfg;
    report.slope_axis = cfg.sweep == SweepKind::growing_K ? "K" : "N";
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const auto [K, N] = pts[p];
        std::vector<double> slot(mse.begin() + static_cast<std::ptrdiff_t>(p * reps),
                                 mse.begin() + static_cast<std::ptrdiff_t>((p + 1) * reps));
        report.rows.push_back(summarize(K, N, slot, approx.at(K), h_tilde(bases.at(K), reg.dist, N)));
        if (report.rows.back().failures > 0) {
            report.warnings.push_back("K=" + std::to_string(K) + " N=" + std::to_string(N) + ": " +
                                      std::to_string(report.rows.back().failures) + " failed repetitions");
        }
        report.rep_mse.push_back(std::move(slot));
        x.push_back(static_cast<double>(cfg.sweep == SweepKind::growing_K ? K : N));
        y.push_back(report.rows.back().mse_mean);
    }
    report.slope = try_slope(x, y, report.warnings, "slope");
    if (cfg.sweep == SweepKind::fixed_K) {
        const ReportRow& last = report.rows.back();
        report.plateau = last.approx_l2 > 0.0 ? last.mse_mean / last.approx_l2 : kNaN;
    }
    report.wall_time = seconds_since(start);
    return report;
}

} // namespace

// ---- configuration ---------------------------------------------------------

std::size_t NRule::operator()(std::size_t K) const {
    return static_cast<std::size_t>(std::llround(c * std::pow(static_cast<double>(K), b)));
}

void ExperimentConfig::validate() const {
    if (schema_version != kSchemaVersion) throw ConfigError("schema_version: unsupported version");
    if (process.kind != ProcessKind::brownian) {
        throw ConfigError("process.kind: the harness supports the brownian process only");
    }
    if (!(process.horizon > 0.0) || !std::isfinite(process.horizon)) {
        throw ConfigError("process.horizon: must be a positive finite number");
    }
    if (process.dimension != 1) throw ConfigError("process.dimension: the harness is univariate");
    if (feature.kind != FeatureKind::terminal) {
        throw ConfigError("feature.kind: the harness regresses on the terminal value only");
    }
    if (!(feature.eval_time > 0.0) || feature.eval_time > process.horizon) {
        throw ConfigError("feature.time: must lie in (0, process.horizon]");
    }
    payoff.validate();
    if (payoff.kind != PayoffKind::tanh && payoff.kind != PayoffKind::square &&
        payoff.kind != PayoffKind::identity) {
        throw ConfigError("payoff.kind: the harness supports tanh, square and identity, got '" +
                          to_string(payoff.kind) + "'");
    }
    oracle.validate();
    if (K_list.empty()) throw ConfigError("sweep.K: list must not be empty");
    for (std::size_t i = 0; i < K_list.size(); ++i) {
        if (K_list[i] < 1) throw ConfigError("sweep.K: every K must be >= 1");
        if (i > 0 && K_list[i] <= K_list[i - 1]) throw ConfigError("sweep.K: values must be strictly increasing");
    }
    if (n_rule) {
        if (!(n_rule->c > 0.0) || !std::isfinite(n_rule->c)) throw ConfigError("sweep.N_rule.c: must be positive");
        if (!(n_rule->b > 0.0) || !std::isfinite(n_rule->b)) throw ConfigError("sweep.N_rule.b: must be positive");
    }
    if (sweep == SweepKind::fixed_K) {
        if (K_list.size() != 1) throw ConfigError("sweep.K: fixed_K takes exactly one K");
        if (N_list.empty()) throw ConfigError("sweep.N: fixed_K needs an explicit N list");
        for (std::size_t i = 1; i < N_list.size(); ++i) {
            if (N_list[i] <= N_list[i - 1]) throw ConfigError("sweep.N: values must be strictly increasing");
        }
    } else if (!n_rule && N_list.size() != K_list.size()) {
        throw ConfigError("sweep.N: growing_K needs N_rule or one N per K");
    }
    for (const auto& [K, N] : points()) {
        if (N < 2 * K + 1) {
            throw ConfigError("sweep.N: N=" + std::to_string(N) + " is below 2K+1 for K=" + std::to_string(K));
        }
    }
    if (estimator == EstimatorKind::compare) {
        if (!(condition_time > 0.0) || !(condition_time < feature.eval_time)) {
            throw ConfigError("condition_time: must lie in (0, feature.time)");
        }
    }
    if (repetitions < 1) throw ConfigError("repetitions: must be >= 1");
    if (!(eval_multiplier > 0.0) || !std::isfinite(eval_multiplier)) {
        throw ConfigError("evaluation.multiplier: must be positive");
    }
    if (!(domain_epsilon > 0.0) || !(domain_epsilon < 0.5)) {
        throw ConfigError("domain_epsilon: must lie in (0, 0.5)");
    }
}

std::vector<std::pair<std::size_t, std::size_t>> ExperimentConfig::points() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (sweep == SweepKind::fixed_K) {
        for (std::size_t N : N_list) out.emplace_back(K_list.front(), N);
        return out;
    }
    for (std::size_t i = 0; i < K_list.size(); ++i) {
        const std::size_t K = K_list[i];
        out.emplace_back(K, n_rule ? (*n_rule)(K) : (i < N_list.size() ? N_list[i] : 0));
    }
    return out;
}

// ---- slope -----------------------------------------------------------------

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("slope fit needs equally many x and y values");
    SlopeFit fit;
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !std::isfinite(x[i])) throw ConfigError("slope fit needs positive x values");
        if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
            fit.warnings.push_back("point " + std::to_string(i) + " excluded (nonpositive or non-finite value)");
            continue;
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const std::size_t n = lx.size();
    if (n < 3) throw NumericalError("slope fit needs at least 3 positive points, got " + std::to_string(n));
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw NumericalError("slope fit needs at least two distinct x values");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        rss += r * r;
    }
    const double dof = static_cast<double>(n - 2);
    fit.slope_stderr = std::sqrt(rss / dof / sxx);
    const double q = boost::math::quantile(boost::math::students_t(dof), 0.975);
    fit.ci_low = fit.slope - q * fit.slope_stderr;
    fit.ci_high = fit.slope + q * fit.slope_stderr;
    fit.points = n;
    return fit;
}

// ---- experiments -----------------------------------------------------------

ConvergenceReport run_growing_K(const ExperimentConfig& config) {
    if (config.sweep != SweepKind::growing_K) throw ConfigError("sweep.kind: expected growing_K");
    return run_later(config);
}

ConvergenceReport run_fixed_K(const ExperimentConfig& config) {
    if (config.sweep != SweepKind::fixed_K) throw ConfigError("sweep.kind: expected fixed_K");
    return run_later(config);
}

ConvergenceReport now_vs_later_compare(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    cfg.validate();
    if (cfg.estimator != EstimatorKind::compare) throw ConfigError("estimator: expected compare");

    const double t = cfg.condition_time;
    const double T = cfg.feature.eval_time;
    const auto pts = cfg.points();
    const Regressor reg_T = regressor_at(cfg, T);
    const Regressor reg_t = regressor_at(cfg, t);
    const Transition transition{TransitionKind::brownian, t, T, 0.0};
    const FeatureSpec paired_feature{FeatureKind::pair_u_T, T, t};
    const auto g = payoff_function(cfg.payoff);

    // Conditional-expectation integrals at time t share one rule, so the oracle
    // is evaluated once per node.
    const BinPartition panels = build_partition(reg_t.dist, kConditionalPanels);
    const WeightedRule rule_t = piecewise_rule(reg_t.dist, panels.edges, kPanelPoints);
    ProcessSpec until_T = cfg.process; // the oracle conditions on the payoff time T
    until_T.horizon = T;
    const auto g0t_fn = conditional_function(cfg.payoff, until_T, t, cfg.oracle);
    std::vector<double> g0t(rule_t.nodes.size());
    parallel_for(g0t.size(), cfg.threads, [&](std::size_t i) { g0t[i] = g0t_fn(rule_t.nodes[i]); });

    struct PerK {
        SieveBasis later_basis;
        SieveBasis now_basis;
        Eigen::MatrixXd transfer; // nodes x 2K, E[e(W_T) | W_t = node]
        double later_floor = 0.0;
        double now_floor = 0.0;
    };
    std::map<std::size_t, PerK> per_k;
    for (const auto& [K, N] : pts) {
        if (per_k.contains(K)) continue;
        PerK pk{build_basis(reg_T.dist, K), build_basis(reg_t.dist, K), {}, 0.0, 0.0};
        pk.transfer.resize(static_cast<Eigen::Index>(rule_t.nodes.size()), static_cast<Eigen::Index>(2 * K));
        parallel_for(rule_t.nodes.size(), cfg.threads, [&](std::size_t i) {
            pk.transfer.row(static_cast<Eigen::Index>(i)) =
                basis_condexp(transition, pk.later_basis, rule_t.nodes[i]).transpose();
        });
        const Eigen::VectorXd alpha = projection_coefficients(g, pk.later_basis, reg_T.dist);
        const Eigen::VectorXd est = pk.transfer * alpha;
        for (std::size_t i = 0; i < g0t.size(); ++i) {
            const double d = g0t[i] - est[static_cast<Eigen::Index>(i)];
            pk.later_floor += rule_t.weights[i] * d * d;
        }
        const Eigen::VectorXd beta = projection_coefficients(g0t_fn, pk.now_basis, reg_t.dist);
        for (std::size_t i = 0; i < g0t.size(); ++i) {
            const double d = g0t[i] - eval_expansion(pk.now_basis, {beta.data(), static_cast<std::size_t>(beta.size())},
                                                     rule_t.nodes[i]);
            pk.now_floor += rule_t.weights[i] * d * d;
        }
        per_k.emplace(K, std::move(pk));
    }

    const std::size_t reps = cfg.repetitions;
    const std::size_t tasks = pts.size() * reps;
    std::vector<double> later_mse(tasks, kNaN);
    std::vector<double> now_mse(tasks, kNaN);
    std::vector<signed char> jensen(tasks, -1); // -1 not run, 0 violated, 1 holds

    parallel_for(tasks, cfg.threads, [&](std::size_t task) {
        const auto [K, N] = pts[task / reps];
        const std::uint64_t rep = task % reps;
        const PerK& pk = per_k.at(K);
        const std::uint64_t eval_key = derive_key(cfg.seed, {K, N, rep, kEvaluationDraws});
        std::optional<SampleSet> fresh;
        if (cfg.eval == EvalMethod::fresh_sample) {
            const auto M = static_cast<std::size_t>(
                std::max(1.0, std::round(cfg.eval_multiplier * static_cast<double>(N))));
            fresh = simulate_conditional(cfg.process, reg_t.feature, reg_t.domain, M, eval_key, 1);
        }
        // Mean of (g0t - h)^2 over time-t states.
        auto cond_mse = [&](const std::function<double(std::size_t)>& at_node,
                            const std::function<double(double)>& at_state) {
            if (!fresh) {
                double s = 0.0;
                for (std::size_t i = 0; i < g0t.size(); ++i) {
                    const double d = g0t[i] - at_node(i);
                    s += rule_t.weights[i] * d * d;
                }
                return s;
            }
            double s = 0.0;
            for (Eigen::Index i = 0; i < fresh->features.rows(); ++i) {
                const double w = fresh->features(i, 0);
                const double d = g0t_fn(w) - at_state(w);
                s += d * d;
            }
            return s / static_cast<double>(fresh->features.rows());
        };

        std::optional<FitResult> later_fit;
        try {
            SampleSet sample = simulate_conditional(cfg.process, reg_T.feature, reg_T.domain, N,
                                                    derive_key(cfg.seed, {K, N, rep, kRegressionDraws}), 1);
            attach_payoffs(sample, cfg.payoff);
            later_fit = regress_later_fit(sample, pk.later_basis);
            const Eigen::VectorXd est = pk.transfer * later_fit->coefficients;
            later_mse[task] = cond_mse(
                [&](std::size_t i) { return est[static_cast<Eigen::Index>(i)]; },
                [&](double w) { return basis_condexp(transition, pk.later_basis, w).dot(later_fit->coefficients); });
        } catch (const NumericalError&) {
            later_fit.reset();
        }

        try {
            SampleSet paired = simulate_conditional(cfg.process, paired_feature, reg_t.domain, N,
                                                    derive_key(cfg.seed, {K, N, rep, kPairedDraws}), 1);
            const Eigen::Index col[] = {1};
            attach_payoffs(paired, cfg.payoff, col);
            SampleSet now_sample;
            now_sample.features = paired.features.col(0);
            now_sample.payoffs = paired.payoffs;
            const FitResult now_fit = regress_now_fit(now_sample, pk.now_basis).first;
            const std::span<const double> beta{now_fit.coefficients.data(),
                                               static_cast<std::size_t>(now_fit.coefficients.size())};
            now_mse[task] = cond_mse(
                [&](std::size_t i) { return eval_expansion(pk.now_basis, beta, rule_t.nodes[i]); },
                [&](double w) { return eval_expansion(pk.now_basis, beta, w); });
            if (later_fit) {
                const JensenResult j = jensen_check(*later_fit, transition, pk.later_basis, g0t_fn, paired);
                jensen[task] = j.holds ? 1 : 0;
            }
        } catch (const NumericalError&) {
        }
    });

    ConvergenceReport report;
    report.config = cfg;
    report.slope_axis = "N";
    std::vector<double> x;
    std::vector<double> y_later;
    std::vector<double> y_now;
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const auto [K, N] = pts[p];
        const auto first = static_cast<std::ptrdiff_t>(p * reps);
        const auto last = static_cast<std::ptrdiff_t>((p + 1) * reps);
        std::vector<double> ls(later_mse.begin() + first, later_mse.begin() + last);
        std::vector<double> ns(now_mse.begin() + first, now_mse.begin() + last);
        const PerK& pk = per_k.at(K);
        report.rows.push_back(summarize(K, N, ls, pk.later_floor, h_tilde(pk.later_basis, reg_T.dist, N)));
        report.now_rows.push_back(summarize(K, N, ns, pk.now_floor, h_tilde(pk.now_basis, reg_t.dist, N)));
        report.rep_mse.push_back(std::move(ls));
        report.now_rep_mse.push_back(std::move(ns));
        x.push_back(static_cast<double>(N));
        y_later.push_back(report.rows.back().mse_mean);
        y_now.push_back(report.now_rows.back().mse_mean);
    }
    report.slope = try_slope(x, y_later, report.warnings, "later slope");
    report.now_slope = try_slope(x, y_now, report.warnings, "now slope");

    // Each repetition index is one seed batch across the sweep.
    std::size_t steeper = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        std::vector<double> yl;
        std::vector<double> yn;
        for (std::size_t p = 0; p < pts.size(); ++p) {
            yl.push_back(report.rep_mse[p][r]);
            yn.push_back(report.now_rep_mse[p][r]);
        }
        double sl = kNaN;
        double sn = kNaN;
        try {
            sl = fit_loglog_slope(x, yl).slope;
            sn = fit_loglog_slope(x, yn).slope;
        } catch (const NumericalError&) {
        }
        report.later_batch_slopes.push_back(sl);
        report.now_batch_slopes.push_back(sn);
        if (sl < sn) ++steeper;
    }
    report.later_steeper_fraction = static_cast<double>(steeper) / static_cast<double>(reps);
    for (signed char j : jensen) {
        if (j < 0) continue;
        ++report.jensen_checks;
        if (j == 0) ++report.jensen_violations;
    }
    report.wall_time = seconds_since(start);
    return report;
}

ConvergenceReport run_experiment(const ExperimentConfig& config) {
    if (config.estimator == EstimatorKind::compare) return now_vs_later_compare(config);
    return config.sweep == SweepKind::growing_K ? run_growing_K(config) : run_fixed_K(config);
}

// ---- output ----------------------------------------------------------------

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.K) + ',' + std::to_string(r.N) + ',' + std::to_string(r.reps) + ',' +
               format_double(r.mse_mean) + ',' + format_double(r.mse_stderr) + ',' +
               format_double(r.approx_l2) + ',' + format_double(r.h_tilde) + '\n';
    }
    return out;
}

nlohmann::json report_to_json(const ConvergenceReport& report) {
    nlohmann::json doc;
    doc["config"] = config_to_json(report.config);
    doc["slope_axis"] = report.slope_axis;
    doc["rows"] = rows_json(report.rows);
    doc["slope"] = slope_json(report.slope);
    if (report.plateau) doc["plateau"] = std::isfinite(*report.plateau) ? nlohmann::json(*report.plateau) : nlohmann::json(nullptr);
    if (report.config.estimator == EstimatorKind::compare) {
        doc["now_rows"] = rows_json(report.now_rows);
        doc["now_slope"] = slope_json(report.now_slope);
        auto finite_or_null = [](const std::vector<double>& v) {
            nlohmann::json a = nlohmann::json::array();
            for (double s : v) a.push_back(std::isfinite(s) ? nlohmann::json(s) : nlohmann::json(nullptr));
            return a;
        };
        doc["later_batch_slopes"] = finite_or_null(report.later_batch_slopes);
        doc["now_batch_slopes"] = finite_or_null(report.now_batch_slopes);
        doc["later_steeper_fraction"] = report.later_steeper_fraction;
        doc["jensen"] = {{"checks", report.jensen_checks}, {"violations", report.jensen_violations}};
    }
    doc["wall_time"] = report.wall_time;
    doc["warnings"] = report.warnings;
    return doc;
}

} // namespace lsmc
