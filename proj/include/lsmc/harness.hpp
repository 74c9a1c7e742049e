#pragma once

#include "lsmc/basis.hpp"
#include "lsmc/model.hpp"
#include "lsmc/payoff.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lsmc {

enum class SweepKind { growing_K, fixed_K };
// later: Regress-Later MSE of the fitted payoff function at the regression time.
// compare: conditional-expectation MSE at condition_time for Regress-Later
// (via exact transfer) and Regress-Now on the same points.
enum class EstimatorKind { later, compare };
enum class EvalMethod { quadrature, fresh_sample };

struct NRule {
    double c = 100.0;
    double b = 2.01;
    [[nodiscard]] std::size_t operator()(std::size_t K) const;
};

struct ExperimentConfig {
    int schema_version = 1;
    std::string name = "experiment";
    ProcessSpec process;
    PayoffSpec payoff;
    FeatureSpec feature; // terminal, eval_time is the regression time T
    OracleSpec oracle;
    SweepKind sweep = SweepKind::growing_K;
    std::vector<std::size_t> K_list;
    std::optional<NRule> n_rule;
    std::vector<std::size_t> N_list;
    EstimatorKind estimator = EstimatorKind::later;
    double condition_time = 0.0; // compare only: the time t < T
    std::size_t repetitions = 100;
    std::uint64_t seed = 1;
    EvalMethod eval = EvalMethod::quadrature;
    double eval_multiplier = 10.0;
    double domain_epsilon = kDefaultDomainEpsilon;
    unsigned threads = 0; // 0 = hardware concurrency

    void validate() const;
    // (K, N) per sweep point in run order.
    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> points() const;
};

struct ReportRow {
    std::size_t K = 0;
    std::size_t N = 0;
    std::size_t reps = 0; // successful repetitions
    double mse_mean = 0.0;
    double mse_stderr = 0.0;
    double approx_l2 = 0.0; // deterministic floor E[a^2]
    double h_tilde = 0.0;
    std::size_t failures = 0;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double ci_low = 0.0; // 95% t interval
    double ci_high = 0.0;
    std::size_t points = 0;
    std::vector<std::string> warnings;
};

// Unweighted least squares of log(y) on log(x). Nonpositive or non-finite y are
// dropped with a warning; fewer than three survivors is a NumericalError.
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceReport {
    ExperimentConfig config;
    std::string slope_axis; // "K" or "N"
    std::vector<ReportRow> rows; // Regress-Later series
    std::optional<SlopeFit> slope;
    std::optional<double> plateau; // fixed_K: mse_mean(N_max) / approx_l2
    // Per-repetition MSE, indexed [point][rep]; NaN marks a failed repetition.
    std::vector<std::vector<double>> rep_mse;

    // compare only
    std::vector<ReportRow> now_rows;
    std::optional<SlopeFit> now_slope;
    std::vector<std::vector<double>> now_rep_mse;
    std::vector<double> later_batch_slopes; // per repetition, vs log N
    std::vector<double> now_batch_slopes;
    double later_steeper_fraction = 0.0;
    std::size_t jensen_checks = 0;
    std::size_t jensen_violations = 0;

    double wall_time = 0.0;
    std::vector<std::string> warnings;
};

ConvergenceReport run_growing_K(const ExperimentConfig& config);
ConvergenceReport run_fixed_K(const ExperimentConfig& config);
ConvergenceReport now_vs_later_compare(const ExperimentConfig& config);
// Dispatches on estimator and sweep kind.
ConvergenceReport run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader = "K,N,reps,mse_mean,mse_stderr,approx_l2,h_tilde";

std::string rows_to_csv(const std::vector<ReportRow>& rows);
nlohmann::json report_to_json(const ConvergenceReport& report);

} // namespace lsmc
