#include "lsmc/regress.hpp"

#include "lsmc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lsmc {

namespace {

std::vector<double> column0(const SampleSet& sample) {
    if (sample.dim() != 1) {
        throw ConfigError("sieve regression needs univariate features, got dimension " +
                          std::to_string(sample.dim()));
    }
    if (sample.payoffs.size() != sample.n()) throw ConfigError("sample has no payoffs attached");
    return {sample.features.data(), sample.features.data() + sample.n()};
}

} // namespace

FitResult ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets) {
    const Eigen::Index N = design.rows();
    const Eigen::Index p = design.cols();
    if (N < 1) throw ConfigError("least squares needs at least one observation");
    if (targets.size() != N) throw ConfigError("target length differs from design row count");
    if (p < 1) throw ConfigError("least squares needs at least one column");

    FitResult fit;
    fit.n_samples = static_cast<std::size_t>(N);
    fit.coefficients = Eigen::VectorXd::Zero(p);
    fit.rank_deficiency_warning = N < p;

    const double floor = kColumnNormTolerance * std::sqrt(static_cast<double>(N));
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (design.col(j).norm() < floor) fit.dropped_columns.push_back(static_cast<std::size_t>(j));
        else kept.push_back(j);
    }
    if (kept.empty()) throw NumericalError("degenerate design: every column was dropped");

    Eigen::MatrixXd reduced(N, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) reduced.col(static_cast<Eigen::Index>(j)) = design.col(kept[j]);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(reduced);
    qr.setThreshold(kRankTolerance);
    const Eigen::Index r = qr.rank();
    if (r == 0) throw NumericalError("degenerate design: numerical rank is zero");
    fit.rank = static_cast<std::size_t>(r);

    // Solve on the r leading pivot columns; the rest are linearly dependent.
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
    const Eigen::VectorXd qtb = (qr.householderQ().transpose() * targets).head(r);
    const Eigen::VectorXd z = R.template triangularView<Eigen::Upper>().solve(qtb);
    for (Eigen::Index i = 0; i < r; ++i) fit.coefficients[kept[static_cast<std::size_t>(perm[i])]] = z[i];
    for (Eigen::Index i = r; i < static_cast<Eigen::Index>(kept.size()); ++i) {
        fit.dropped_columns.push_back(static_cast<std::size_t>(kept[static_cast<std::size_t>(perm[i])]));
    }
    std::sort(fit.dropped_columns.begin(), fit.dropped_columns.end());

    fit.residual_l2 = (targets - design * fit.coefficients).norm();

    const Eigen::MatrixXd gram = (design.transpose() * design) / static_cast<double>(N);
    const GramDiagnostics diag = gram_diagnostics(gram);
    fit.gram_frobenius_dist = diag.frobenius_dist;
    fit.gram_lambda_min = diag.lambda_min;
    return fit;
}

FitResult regress_later_fit(const SampleSet& sample, const SieveBasis& basis) {
    const std::vector<double> u = column0(sample);
    const Eigen::MatrixXd E = design_matrix(basis, u);
    const Eigen::Map<const Eigen::VectorXd> X(sample.payoffs.data(), static_cast<Eigen::Index>(sample.n()));
    FitResult fit = ols_fit(E, X);
    fit.mode = FitMode::later;
    return fit;
}

std::pair<FitResult, NowDiagnostics> regress_now_fit(const SampleSet& sample, const SieveBasis& basis) {
    FitResult fit = regress_later_fit(sample, basis);
    fit.mode = FitMode::now;
    NowDiagnostics diag;
    const std::size_t N = fit.n_samples;
    if (N > fit.rank) {
        diag.residual_variance_estimate =
            fit.residual_l2 * fit.residual_l2 / static_cast<double>(N - fit.rank);
    }
    double mean_square = 0.0;
    for (double x : sample.payoffs) mean_square += x * x;
    mean_square /= static_cast<double>(N);
    diag.projection_error_present = diag.residual_variance_estimate > 1e-8 * std::max(1.0, mean_square);
    return {std::move(fit), diag};
}

double predict(const FitResult& fit, const SieveBasis& basis, double u) {
    return eval_expansion(basis, {fit.coefficients.data(), static_cast<std::size_t>(fit.coefficients.size())}, u);
}

double coefficient_error(const FitResult& fit, const SieveBasis& basis,
                         const std::function<double(double)>& target, const DistSpec& dist) {
    if (static_cast<std::size_t>(fit.coefficients.size()) != basis.dim()) {
        throw ConfigError("fit and basis dimensions differ");
    }
    const Eigen::VectorXd alpha = projection_coefficients(target, basis, dist);
    return (fit.coefficients - alpha).squaredNorm();
}

nlohmann::json fit_to_json(const FitResult& fit) {
    nlohmann::json doc;
    doc["mode"] = fit.mode == FitMode::later ? "later" : "now";
    doc["coefficients"] = std::vector<double>(fit.coefficients.data(),
                                              fit.coefficients.data() + fit.coefficients.size());
    doc["rank"] = fit.rank;
    doc["dropped_columns"] = fit.dropped_columns;
    doc["residual_l2"] = fit.residual_l2;
    doc["gram_frobenius_dist"] = fit.gram_frobenius_dist;
    doc["gram_lambda_min"] = fit.gram_lambda_min;
    doc["n_samples"] = fit.n_samples;
    doc["rank_deficiency_warning"] = fit.rank_deficiency_warning;
    return doc;
}

} // namespace lsmc
