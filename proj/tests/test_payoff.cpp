#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "lsmc/errors.hpp"
#include "lsmc/payoff.hpp"
#include "lsmc/rng.hpp"

using namespace lsmc;

namespace {

const ProcessSpec kW10{ProcessKind::brownian, 0.0, 10.0, 1, 1.0};
const ProcessSpec kGbm{ProcessKind::gbm, 0.2, 10.0, 1, 1.0};

const OracleSpec kQuad{OracleKind::gauss_quadrature, 128, 1e-10};

// E[g(state + sqrt(tau) Z)] by Gauss-Kronrod over z in [-12, 12].
double brownian_truth(const std::function<double(double)>& g, double tau, double state) {
    const double s = std::sqrt(tau);
    return oracle::gk([&](double z) { return g(state + s * z) * oracle::normal_pdf(z); }, -12.0, 12.0);
}

} // namespace

TEST_CASE("eval_payoff examples") {
    const PayoffSpec call{PayoffKind::call, 10.0};
    CHECK(eval_payoff(call, 22.0) == 12.0);
    CHECK(eval_payoff(call, 6.0) == 0.0);
    CHECK(eval_payoff(PayoffSpec{PayoffKind::tanh, 0.0}, 0.0) == 0.0);
    CHECK(eval_payoff(PayoffSpec{PayoffKind::square, 0.0}, -3.0) == 9.0);
    const std::vector<double> basket{14.0, 8.0};
    CHECK(eval_payoff(PayoffSpec{PayoffKind::basket_call, 10.0}, basket) == 12.0);
    CHECK_THROWS_AS(eval_payoff(call, basket), ConfigError);
    CHECK_THROWS_AS(eval_payoff(PayoffSpec{PayoffKind::call, NAN}, 1.0), ConfigError);
}

TEST_CASE("attach_payoffs fills one payoff per row") {
    SampleSet s;
    s.features = Eigen::MatrixXd(3, 2);
    s.features << 1, 2, 3, 4, 5, 6;
    const std::vector<Eigen::Index> second{1};
    attach_payoffs(s, PayoffSpec{PayoffKind::square, 0.0}, second);
    CHECK(s.payoffs == std::vector<double>{4.0, 16.0, 36.0});
    attach_payoffs(s, PayoffSpec{PayoffKind::basket_call, 4.0});
    CHECK(s.payoffs == std::vector<double>{0.0, 3.0, 7.0});
}

TEST_CASE("closed-form oracle examples") {
    const PayoffSpec sq{PayoffKind::square, 0.0};
    CHECK(oracle_conditional(sq, kW10, 0.0, 0.0) == doctest::Approx(10.0).epsilon(1e-14));
    for (double t : {0.0, 3.0, 9.9})
        for (double w : {-2.0, 0.0, 1.7})
            CHECK(oracle_conditional(PayoffSpec{PayoffKind::identity, 0.0}, kW10, t, w) == w);
    for (double w : {-1.0, 0.2, 3.0})
        CHECK(oracle_conditional(PayoffSpec{PayoffKind::tanh, 0.0}, kW10, 10.0, w) == std::tanh(w));
}

TEST_CASE("tanh oracle agrees with an independent integral") {
    const PayoffSpec th{PayoffKind::tanh, 0.0};
    const auto g = [](double x) { return std::tanh(x); };
    for (double t : {0.0, 5.0, 9.5})
        for (double w : {-4.0, -0.3, 0.0, 1.1, 6.0})
            CHECK(oracle_conditional(th, kW10, t, w) == doctest::Approx(brownian_truth(g, 10.0 - t, w)).epsilon(1e-9));
}

TEST_CASE("doubling the quadrature rule moves the result less than the tolerance") {
    const PayoffSpec th{PayoffKind::tanh, 0.0};
    for (double w : {-2.0, 0.5, 3.0}) {
        const double a = oracle_conditional(th, kW10, 1.0, w, OracleSpec{OracleKind::gauss_quadrature, 128, 1e-9});
        const double b = oracle_conditional(th, kW10, 1.0, w, OracleSpec{OracleKind::gauss_quadrature, 256, 1e-9});
        CHECK(std::abs(a - b) < 1e-9);
    }
}

TEST_CASE("closed form and quadrature agree on 100 (t, state) pairs") {
    const CounterRng rng(derive_key(2024, {}));
    const PayoffSpec sq{PayoffKind::square, 0.0};
    const PayoffSpec id{PayoffKind::identity, 0.0};
    const PayoffSpec call{PayoffKind::call, 1.0};
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const double t = 9.9 * rng.uniform(3 * i);
        const double w = -5.0 + 10.0 * rng.uniform(3 * i + 1);
        const double s = 0.3 + 2.7 * rng.uniform(3 * i + 2);
        for (const auto& [spec, proc, state] :
             {std::tuple{sq, kW10, w}, std::tuple{id, kW10, w}, std::tuple{call, kGbm, s}}) {
            const double closed = oracle_conditional(spec, proc, t, state);
            const double quad = oracle_conditional(spec, proc, t, state, kQuad);
            worst = std::max(worst, std::abs(closed - quad));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("gbm call closed form matches an independent log-normal integral") {
    const PayoffSpec call{PayoffKind::call, 1.2};
    for (double s : {0.5, 1.0, 2.0}) {
        const double v = 0.2 * std::sqrt(10.0 - 4.0);
        const double z0 = (std::log(1.2 / s) + 0.5 * v * v) / v;
        const double truth = oracle::gk(
            [&](double z) { return (s * std::exp(-0.5 * v * v + v * z) - 1.2) * oracle::normal_pdf(z); }, z0, 15.0);
        CHECK(oracle_conditional(call, kGbm, 4.0, s) == doctest::Approx(truth).epsilon(1e-10));
    }
}

TEST_CASE("call payoffs are nonnegative and midpoint convex") {
    const CounterRng rng(derive_key(5, {}));
    for (PayoffKind kind : {PayoffKind::call, PayoffKind::basket_call, PayoffKind::asian_call}) {
        const PayoffSpec spec{kind, 3.0};
        for (std::uint64_t i = 0; i < 1000; ++i) {
            const double x = 10.0 * rng.uniform(2 * i) - 2.0;
            const double y = 10.0 * rng.uniform(2 * i + 1) - 2.0;
            const double gx = eval_payoff(spec, x);
            const double gy = eval_payoff(spec, y);
            REQUIRE(gx >= 0.0);
            REQUIRE(eval_payoff(spec, 0.5 * (x + y)) <= 0.5 * (gx + gy) + 1e-15);
        }
    }
}

TEST_CASE("unsupported pairs and bad inputs raise") {
    CHECK_THROWS_AS(oracle_conditional(PayoffSpec{PayoffKind::call, 1.0}, kW10, 0.0, 0.0), UnsupportedOracleError);
    CHECK_THROWS_AS(oracle_conditional(PayoffSpec{PayoffKind::tanh, 0.0}, kGbm, 0.0, 1.0), UnsupportedOracleError);
    CHECK_THROWS_AS(oracle_conditional(PayoffSpec{PayoffKind::tanh, 0.0}, kW10, 11.0, 0.0), ConfigError);
    CHECK_THROWS_AS(oracle_conditional(PayoffSpec{PayoffKind::call, 1.0}, kGbm, 0.0, -1.0), ConfigError);
    CHECK_THROWS_AS(OracleSpec({OracleKind::gauss_quadrature, 8, 1e-9}).validate(), ConfigError);
    CHECK_THROWS_AS(payoff_kind_from_string("put"), ConfigError);
    CHECK(payoff_kind_from_string(to_string(PayoffKind::asian_call)) == PayoffKind::asian_call);
    CHECK(has_closed_form(PayoffSpec{PayoffKind::square, 0.0}, kW10));
    CHECK_FALSE(has_closed_form(PayoffSpec{PayoffKind::tanh, 0.0}, kW10));
}
