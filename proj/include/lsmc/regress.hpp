#pragma once

#include "lsmc/basis.hpp"
#include "lsmc/model.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace lsmc {

enum class FitMode { later, now };

struct FitResult {
    Eigen::VectorXd coefficients;
    std::size_t rank = 0;
    std::vector<std::size_t> dropped_columns; // coefficient exactly 0
    double residual_l2 = 0.0;                 // ||X - E alpha||_2
    double gram_frobenius_dist = 0.0;         // ||E^T E / N - I||_F
    double gram_lambda_min = 0.0;
    FitMode mode = FitMode::later;
    std::size_t n_samples = 0;
    bool rank_deficiency_warning = false; // N < number of columns
};

struct NowDiagnostics {
    double residual_variance_estimate = 0.0; // RSS / (N - rank)
    bool projection_error_present = false;
};

// Columns whose norm is below this times sqrt(N) are dropped before the solve.
inline constexpr double kColumnNormTolerance = 1e-10;
// Relative pivot threshold of the column-pivoted QR.
inline constexpr double kRankTolerance = 1e-10;

// Least squares via column-pivoted Householder QR (never the normal equations).
FitResult ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets);

// Regresses sample.payoffs on the basis evaluated at feature column 0.
FitResult regress_later_fit(const SampleSet& sample, const SieveBasis& basis);

// Same regression with time-t features; adds the residual variance estimate.
std::pair<FitResult, NowDiagnostics> regress_now_fit(const SampleSet& sample, const SieveBasis& basis);

// Fitted function value at u.
double predict(const FitResult& fit, const SieveBasis& basis, double u);

// (alpha_hat - alpha)^T (alpha_hat - alpha) against the quadrature projection of
// `target` onto the basis.
double coefficient_error(const FitResult& fit, const SieveBasis& basis,
                         const std::function<double(double)>& target, const DistSpec& dist);

nlohmann::json fit_to_json(const FitResult& fit);

} // namespace lsmc
