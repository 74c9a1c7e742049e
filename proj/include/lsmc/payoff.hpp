#pragma once

#include "lsmc/model.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lsmc {

enum class PayoffKind { call, basket_call, asian_call, tanh, square, identity };

struct PayoffSpec {
    PayoffKind kind = PayoffKind::identity;
    double strike = 0.0; // call variants only

    void validate() const;
    // basket_call accepts any positive dimension (it sums the components).
    [[nodiscard]] bool accepts_dim(std::size_t dim) const;
};

enum class OracleKind { closed_form, gauss_quadrature };

struct OracleSpec {
    OracleKind kind = OracleKind::closed_form;
    std::size_t quadrature_points = 128;
    double tolerance = 1e-9;

    void validate() const;
};

// Largest rule the quadrature oracle doubles up to before giving up.
inline constexpr std::size_t kMaxOraclePoints = 1024;

double eval_payoff(const PayoffSpec& spec, std::span<const double> feature);
double eval_payoff(const PayoffSpec& spec, double feature);

// Fills sample.payoffs with g applied to the given feature columns of each row
// (all columns when `columns` is empty).
void attach_payoffs(SampleSet& sample, const PayoffSpec& spec,
                    std::span<const Eigen::Index> columns = {});

// True conditional expectation E[g(Z(T)) | Z(t) = state].
//   identity, square, tanh under brownian; call under gbm.
// closed_form uses the analytic expression when one exists and falls back to
// quadrature otherwise; gauss_quadrature always integrates numerically, doubling
// the rule until successive estimates differ by less than the tolerance.
double oracle_conditional(const PayoffSpec& spec, const ProcessSpec& proc, double t, double state,
                          const OracleSpec& oracle = {});

bool has_closed_form(const PayoffSpec& spec, const ProcessSpec& proc);

// state -> oracle_conditional(spec, proc, t, state, oracle)
std::function<double(double)> conditional_function(const PayoffSpec& spec, const ProcessSpec& proc,
                                                   double t, const OracleSpec& oracle = {});

std::function<double(double)> payoff_function(const PayoffSpec& spec);

std::string to_string(PayoffKind kind);
PayoffKind payoff_kind_from_string(const std::string& name);

} // namespace lsmc
