#include "lsmc/payoff.hpp"

#include "lsmc/errors.hpp"
#include "lsmc/normal.hpp"
#include "lsmc/quadrature.hpp"

#include <cmath>
#include <numeric>

namespace lsmc {

namespace {

double call(double x, double strike) { return std::max(x - strike, 0.0); }

double scalar_payoff(const PayoffSpec& spec, double x) {
    switch (spec.kind) {
    case PayoffKind::call:
    case PayoffKind::basket_call:
    case PayoffKind::asian_call:
        return call(x, spec.strike);
    case PayoffKind::tanh:
        return std::tanh(x);
    case PayoffKind::square:
        return x * x;
    case PayoffKind::identity:
        return x;
    }
    return 0.0;
}

bool is_call(PayoffKind kind) {
    return kind == PayoffKind::call || kind == PayoffKind::basket_call ||
           kind == PayoffKind::asian_call;
}

void check_supported(const PayoffSpec& spec, const ProcessSpec& proc) {
    const bool brownian_ok = proc.kind == ProcessKind::brownian &&
                             (spec.kind == PayoffKind::identity || spec.kind == PayoffKind::square ||
                              spec.kind == PayoffKind::tanh);
    const bool gbm_ok = proc.kind == ProcessKind::gbm && spec.kind == PayoffKind::call;
    if (!brownian_ok && !gbm_ok) {
        throw UnsupportedOracleError("no conditional-expectation oracle for payoff '" +
                                     to_string(spec.kind) + "' under " + describe(proc));
    }
}

// Value of the terminal feature as a function of a standard normal shock.
struct Transition {
    ProcessKind kind;
    double state;
    double sd;   // sqrt(T - t) or sigma sqrt(T - t)
    double drift; // gbm log drift -sigma^2 (T - t) / 2

    [[nodiscard]] double at(double z) const {
        return kind == ProcessKind::gbm ? state * std::exp(drift + sd * z) : state + sd * z;
    }
};

double hermite_estimate(const PayoffSpec& spec, const Transition& tr, std::size_t n) {
    const QuadratureRule& rule = gauss_hermite_normal(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += rule.weights[i] * scalar_payoff(spec, tr.at(rule.nodes[i]));
    return sum;
}

// Kinked payoffs: integrate (g o transition) * phi over the in-the-money half-line
// with n Gauss-Legendre points on each of 16 panels of [z*, z* + 40].
double split_estimate(const PayoffSpec& spec, const Transition& tr, std::size_t n) {
    double kink;
    if (tr.kind == ProcessKind::gbm) {
        if (spec.strike <= 0.0) kink = -40.0;
        else kink = (std::log(spec.strike / tr.state) - tr.drift) / tr.sd;
    } else {
        kink = (spec.strike - tr.state) / tr.sd;
    }
    const double lo = std::max(kink, -40.0);
    const double hi = std::max(lo, std::max(tr.sd, 0.0)) + 40.0;
    constexpr int kPanels = 16;
    const double width = (hi - lo) / kPanels;
    double sum = 0.0;
    for (int p = 0; p < kPanels; ++p) {
        sum += integrate_fixed(
            [&](double z) { return scalar_payoff(spec, tr.at(z)) * normal::pdf(z); },
            lo + p * width, lo + (p + 1) * width, n);
    }
    return sum;
}

double closed_form(const PayoffSpec& spec, const Transition& tr) {
    switch (spec.kind) {
    case PayoffKind::identity:
        return tr.state;
    case PayoffKind::square:
        return tr.state * tr.state + tr.sd * tr.sd;
    case PayoffKind::call: {
        // Log-normal martingale transition.
        const double s = tr.state;
        const double v = tr.sd;
        if (spec.strike <= 0.0) return s - spec.strike;
        const double d1 = (std::log(s / spec.strike) + 0.5 * v * v) / v;
        return s * normal::cdf(d1) - spec.strike * normal::cdf(d1 - v);
    }
    default:
        throw UnsupportedOracleError("no closed form for payoff '" + to_string(spec.kind) + "'");
    }
}

} // namespace

void PayoffSpec::validate() const {
    if (!std::isfinite(strike)) throw ConfigError("payoff.strike must be finite");
}

bool PayoffSpec::accepts_dim(std::size_t dim) const {
    if (kind == PayoffKind::basket_call) return dim >= 1;
    return dim == 1;
}

void OracleSpec::validate() const {
    if (kind == OracleKind::gauss_quadrature && quadrature_points < 16) {
        throw ConfigError("oracle.quadrature_points must be >= 16 for gauss_quadrature");
    }
    if (!(tolerance > 0.0)) throw ConfigError("oracle.tolerance must be > 0");
}

double eval_payoff(const PayoffSpec& spec, std::span<const double> feature) {
    spec.validate();
    if (!spec.accepts_dim(feature.size())) {
        throw ConfigError("payoff '" + to_string(spec.kind) + "' cannot take a feature of dimension " +
                          std::to_string(feature.size()));
    }
    if (spec.kind == PayoffKind::basket_call) {
        return call(std::accumulate(feature.begin(), feature.end(), 0.0), spec.strike);
    }
    return scalar_payoff(spec, feature[0]);
}

double eval_payoff(const PayoffSpec& spec, double feature) {
    return eval_payoff(spec, std::span<const double>(&feature, 1));
}

void attach_payoffs(SampleSet& sample, const PayoffSpec& spec, std::span<const Eigen::Index> columns) {
    spec.validate();
    std::vector<Eigen::Index> cols(columns.begin(), columns.end());
    if (cols.empty()) {
        cols.resize(sample.dim());
        std::iota(cols.begin(), cols.end(), Eigen::Index{0});
    }
    for (Eigen::Index c : cols) {
        if (c < 0 || c >= sample.features.cols()) throw ConfigError("payoff column out of range");
    }
    std::vector<double> row(cols.size());
    sample.payoffs.resize(sample.n());
    for (Eigen::Index i = 0; i < sample.features.rows(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) row[j] = sample.features(i, cols[j]);
        sample.payoffs[static_cast<std::size_t>(i)] = eval_payoff(spec, row);
    }
}

bool has_closed_form(const PayoffSpec& spec, const ProcessSpec& proc) {
    return (proc.kind == ProcessKind::brownian &&
            (spec.kind == PayoffKind::identity || spec.kind == PayoffKind::square)) ||
           (proc.kind == ProcessKind::gbm && spec.kind == PayoffKind::call);
}

double oracle_conditional(const PayoffSpec& spec, const ProcessSpec& proc, double t, double state,
                          const OracleSpec& oracle) {
    spec.validate();
    proc.validate();
    oracle.validate();
    check_supported(spec, proc);
    if (!(t >= 0.0) || t > proc.horizon) throw ConfigError("oracle time must lie in [0, horizon]");
    if (proc.kind == ProcessKind::gbm && !(state > 0.0)) {
        throw ConfigError("gbm state must be positive");
    }
    const double tau = proc.horizon - t;
    if (tau == 0.0) return scalar_payoff(spec, state);

    Transition tr{proc.kind, state, std::sqrt(tau), 0.0};
    if (proc.kind == ProcessKind::gbm) {
        tr.sd = proc.volatility * std::sqrt(tau);
        tr.drift = -0.5 * tr.sd * tr.sd;
    }
    if (oracle.kind == OracleKind::closed_form && has_closed_form(spec, proc)) {
        return closed_form(spec, tr);
    }

    auto estimate = [&](std::size_t n) {
        return is_call(spec.kind) ? split_estimate(spec, tr, n) : hermite_estimate(spec, tr, n);
    };
    std::size_t n = std::max<std::size_t>(oracle.quadrature_points, 16);
    double previous = estimate(n);
    while (n < kMaxOraclePoints) {
        n *= 2;
        const double current = estimate(n);
        if (std::abs(current - previous) < oracle.tolerance) return current;
        previous = current;
    }
    throw NumericalError("quadrature oracle did not reach its tolerance within " +
                         std::to_string(kMaxOraclePoints) + " points");
}

std::function<double(double)> conditional_function(const PayoffSpec& spec, const ProcessSpec& proc,
                                                   double t, const OracleSpec& oracle) {
    check_supported(spec, proc);
    return [spec, proc, t, oracle](double state) {
        return oracle_conditional(spec, proc, t, state, oracle);
    };
}

std::function<double(double)> payoff_function(const PayoffSpec& spec) {
    return [spec](double x) { return scalar_payoff(spec, x); };
}

std::string to_string(PayoffKind kind) {
    switch (kind) {
    case PayoffKind::call: return "call";
    case PayoffKind::basket_call: return "basket_call";
    case PayoffKind::asian_call: return "asian_call";
    case PayoffKind::tanh: return "tanh";
    case PayoffKind::square: return "square";
    case PayoffKind::identity: return "identity";
    }
    return "unknown";
}

PayoffKind payoff_kind_from_string(const std::string& name) {
    for (PayoffKind k : {PayoffKind::call, PayoffKind::basket_call, PayoffKind::asian_call,
                         PayoffKind::tanh, PayoffKind::square, PayoffKind::identity}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown payoff kind '" + name + "'");
}

} // namespace lsmc
