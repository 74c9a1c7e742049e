#include "lsmc/condexp.hpp"

#include "lsmc/errors.hpp"
#include "lsmc/normal.hpp"

#include <cmath>

namespace lsmc {

void Transition::validate() const {
    if (!std::isfinite(t) || !std::isfinite(T) || !(t < T)) {
        throw ConfigError("transfer needs t < T");
    }
    if (t < 0.0) throw ConfigError("transfer time t must be >= 0");
    if (kind == TransitionKind::gbm && !(volatility > 0.0)) {
        throw ConfigError("gbm transfer needs volatility > 0");
    }
}

double Transition::log_sd() const {
    const double root = std::sqrt(T - t);
    return kind == TransitionKind::gbm ? volatility * root : root;
}

void TransferSpec::validate() const {
    transition.validate();
    if (static_cast<std::size_t>(coefficients.size()) != basis.dim()) {
        throw ConfigError("transfer coefficients must have length 2K");
    }
}

Eigen::VectorXd basis_condexp(const Transition& transition, const SieveBasis& basis, double state) {
    transition.validate();
    const std::size_t K = basis.K();
    Eigen::VectorXd out(static_cast<Eigen::Index>(2 * K));
    const double s = transition.log_sd();
    const auto& edges = basis.partition.edges;

    if (transition.kind == TransitionKind::brownian) {
        // U ~ N(state, s^2): P_k = Phi(beta) - Phi(alpha),
        // E[1_k (U - c)] = (mu - c) P_k + s (phi(alpha) - phi(beta)).
        const double mu = state;
        for (std::size_t k = 0; k < K; ++k) {
            const double alpha = (edges[k] - mu) / s;
            const double beta = (edges[k + 1] - mu) / s;
            const double P = normal::mass(alpha, beta);
            const double first = (mu - basis.centers[k]) * P + s * (normal::pdf(alpha) - normal::pdf(beta));
            out[static_cast<Eigen::Index>(2 * k)] = basis.norm0[k] * P;
            out[static_cast<Eigen::Index>(2 * k + 1)] = basis.norm1[k] * first;
        }
        return out;
    }

    if (!(state > 0.0)) throw ConfigError("gbm state must be positive");
    // log U ~ N(m, s^2), m = log(state) - s^2/2. On log-space edges:
    // P_k = Phi(beta) - Phi(alpha), E[1_k U] = state (Phi(beta - s) - Phi(alpha - s)).
    const double m = std::log(state) - 0.5 * s * s;
    auto log_edge = [&](double b) { return b <= 0.0 ? -INFINITY : (std::log(b) - m) / s; };
    for (std::size_t k = 0; k < K; ++k) {
        const double alpha = log_edge(edges[k]);
        const double beta = log_edge(edges[k + 1]);
        const double P = normal::mass(alpha, beta);
        const double partial = state * normal::mass(alpha - s, beta - s);
        out[static_cast<Eigen::Index>(2 * k)] = basis.norm0[k] * P;
        out[static_cast<Eigen::Index>(2 * k + 1)] = basis.norm1[k] * (partial - basis.centers[k] * P);
    }
    return out;
}

Eigen::VectorXd basis_condexp(const TransferSpec& spec, double state) {
    spec.validate();
    return basis_condexp(spec.transition, spec.basis, state);
}

double condexp_estimate(const TransferSpec& spec, double state) {
    return spec.coefficients.dot(basis_condexp(spec, state));
}

JensenResult jensen_check(const FitResult& fit, const Transition& transition, const SieveBasis& basis,
                          const std::function<double(double)>& conditional_truth,
                          const SampleSet& paired) {
    if (paired.dim() != 2) throw ConfigError("jensen_check needs (state, terminal) feature pairs");
    if (paired.payoffs.size() != paired.n()) throw ConfigError("jensen_check sample has no payoffs");
    if (paired.n() < 2) throw ConfigError("jensen_check needs at least two pairs");
    const TransferSpec spec{transition, basis, fit.coefficients};
    spec.validate();

    const auto N = static_cast<Eigen::Index>(paired.n());
    double sum_cond = 0.0;
    double sum_pay = 0.0;
    double sum_diff = 0.0;
    double sum_diff_sq = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
        const double state = paired.features(i, 0);
        const double terminal = paired.features(i, 1);
        const double cond_err = conditional_truth(state) - condexp_estimate(spec, state);
        const double pay_err = paired.payoffs[static_cast<std::size_t>(i)] - predict(fit, basis, terminal);
        const double a = cond_err * cond_err;
        const double b = pay_err * pay_err;
        sum_cond += a;
        sum_pay += b;
        sum_diff += b - a;
        sum_diff_sq += (b - a) * (b - a);
    }
    const double n = static_cast<double>(N);
    JensenResult out;
    out.mse_cond = sum_cond / n;
    out.mse_payoff = sum_pay / n;
    const double mean_diff = sum_diff / n;
    const double var_diff = std::max(0.0, (sum_diff_sq - n * mean_diff * mean_diff) / (n - 1.0));
    out.stderr_diff = std::sqrt(var_diff / n);
    out.holds = out.mse_cond <= out.mse_payoff + 3.0 * out.stderr_diff;
    return out;
}

} // namespace lsmc
