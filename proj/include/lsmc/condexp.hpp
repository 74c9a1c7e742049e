#pragma once

#include "lsmc/basis.hpp"
#include "lsmc/model.hpp"
#include "lsmc/regress.hpp"

#include <Eigen/Dense>

#include <functional>

namespace lsmc {

enum class TransitionKind { brownian, gbm };

// Law of the time-T feature given its time-t value:
//   brownian: state + sqrt(T - t) Z
//   gbm:      state * exp(-sigma^2 (T - t) / 2 + sigma sqrt(T - t) Z)
// The transition is untruncated even when the basis lives on a compact domain.
struct Transition {
    TransitionKind kind = TransitionKind::brownian;
    double t = 0.0;
    double T = 1.0;
    double volatility = 0.0;

    void validate() const;
    [[nodiscard]] double log_sd() const; // sd of the Gaussian driving the transition
};

struct TransferSpec {
    Transition transition;
    SieveBasis basis;
    Eigen::VectorXd coefficients;

    void validate() const;
};

// E[e_i(A_T) | A_t = state] for every basis function, in closed form.
Eigen::VectorXd basis_condexp(const Transition& transition, const SieveBasis& basis, double state);
Eigen::VectorXd basis_condexp(const TransferSpec& spec, double state);

// coefficients . basis_condexp(spec, state)
double condexp_estimate(const TransferSpec& spec, double state);

struct JensenResult {
    double mse_cond = 0.0;    // mean (g_{0,t}(state) - E[g_hat | state])^2
    double mse_payoff = 0.0;  // mean (X - g_hat(A_T))^2
    double stderr_diff = 0.0; // standard error of the paired difference
    bool holds = false;       // mse_cond <= mse_payoff + 3 stderr_diff
};

// `paired` holds time-t states in column 0, the matching time-T features in
// column 1, and X in payoffs.
JensenResult jensen_check(const FitResult& fit, const Transition& transition, const SieveBasis& basis,
                          const std::function<double(double)>& conditional_truth,
                          const SampleSet& paired);

} // namespace lsmc
