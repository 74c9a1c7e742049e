#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "lsmc/errors.hpp"
#include "lsmc/harness.hpp"
#include "lsmc/rng.hpp"

#include <sstream>

using namespace lsmc;

namespace {

ExperimentConfig base_config(PayoffKind payoff, double T) {
    ExperimentConfig c;
    c.process = ProcessSpec{ProcessKind::brownian, 0.0, T, 1, 1.0};
    c.payoff = PayoffSpec{payoff, 0.0};
    c.feature = FeatureSpec{FeatureKind::terminal, T, 0.0};
    c.seed = 42;
    c.threads = 2;
    return c;
}

} // namespace

TEST_CASE("slope fit examples") {
    std::vector<double> K, y, c;
    for (double k = 4; k <= 40; k += 4) {
        K.push_back(k);
        y.push_back(std::pow(k, -4.0));
        c.push_back(0.3);
    }
    const SlopeFit exact = fit_loglog_slope(K, y);
    CHECK(std::abs(exact.slope + 4.0) < 1e-9);
    CHECK(exact.points == 10);
    CHECK(std::abs(fit_loglog_slope(K, c).slope) < 1e-12);

    const CounterRng rng(derive_key(8, {}));
    std::vector<double> noisy;
    for (std::size_t i = 0; i < K.size(); ++i) noisy.push_back(y[i] * (1.0 + 0.1 * (rng.uniform(i) - 0.5)));
    const SlopeFit n = fit_loglog_slope(K, noisy);
    CHECK(n.slope == doctest::Approx(oracle::loglog_slope(K, noisy)).epsilon(1e-12));
    CHECK(n.slope >= -4.3);
    CHECK(n.slope <= -3.7);
    CHECK(n.ci_low < n.slope);
    CHECK(n.ci_high > n.slope);
}

TEST_CASE("slope fit drops nonpositive values and needs three points") {
    const SlopeFit f = fit_loglog_slope({1, 2, 3, 4}, {1.0, 0.0, 1.0 / 9.0, 1.0 / 16.0});
    CHECK(f.points == 3);
    CHECK(!f.warnings.empty());
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK_THROWS_AS(fit_loglog_slope({1, 2, 3}, {1.0, -1.0, 0.5}), NumericalError);
    CHECK_THROWS_AS(fit_loglog_slope({1, 2, 3}, {1.0, NAN, 0.5}), NumericalError);
}

TEST_CASE("N rule and sweep points") {
    CHECK(NRule{}(30) == static_cast<std::size_t>(std::llround(100.0 * std::pow(30.0, 2.01))));
    ExperimentConfig c = base_config(PayoffKind::tanh, 10.0);
    c.K_list = {4, 6};
    c.n_rule = NRule{};
    const auto pts = c.points();
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].first == 6);
    CHECK(pts[1].second == NRule{}(6));
}

TEST_CASE("config validation rejects bad sweeps") {
    ExperimentConfig c = base_config(PayoffKind::tanh, 10.0);
    c.K_list = {4, 8};
    c.n_rule = NRule{};
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.K_list = {8, 4};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.n_rule = NRule{1.0, 1.0}; // N = K < 2K + 1
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.repetitions = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.sweep = SweepKind::fixed_K;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.estimator = EstimatorKind::compare;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.payoff = PayoffSpec{PayoffKind::call, 1.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("in-span payoff has no error floor") {
    ExperimentConfig c = base_config(PayoffKind::identity, 1.0);
    c.K_list = {2, 4, 8};
    c.n_rule = NRule{20.0, 1.5};
    c.repetitions = 10;
    const auto r = run_growing_K(c);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[1].K == 4);
    CHECK(r.rows[1].mse_mean < 1e-10);
    for (const auto& row : r.rows) CHECK(row.approx_l2 < 1e-12);

    c.sweep = SweepKind::fixed_K;
    c.K_list = {5};
    c.n_rule.reset();
    c.N_list = {100, 1000, 10000};
    const auto f = run_fixed_K(c);
    for (const auto& row : f.rows) CHECK(row.mse_mean < 1e-9);
}

TEST_CASE("fixed K: stderr falls with N and the plateau sits on the floor") {
    ExperimentConfig c = base_config(PayoffKind::tanh, 10.0);
    c.sweep = SweepKind::fixed_K;
    c.K_list = {5};
    c.N_list = {1000, 10000, 100000};
    c.repetitions = 20;
    const auto r = run_fixed_K(c);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[1].mse_stderr < r.rows[0].mse_stderr);
    CHECK(r.rows[2].mse_stderr < r.rows[1].mse_stderr);
    REQUIRE(r.plateau.has_value());
    CHECK(*r.plateau >= 1.0);
    CHECK(*r.plateau <= 1.5);
    CHECK(r.slope_axis == "N");
}

TEST_CASE("report rows respect the deterministic floor") {
    ExperimentConfig c = base_config(PayoffKind::tanh, 10.0);
    c.K_list = {2, 3, 4, 6};
    c.n_rule = NRule{50.0, 2.01};
    c.repetitions = 16;
    const auto r = run_growing_K(c);
    for (const auto& row : r.rows) {
        CHECK(row.mse_mean >= std::max(0.0, row.approx_l2 - 3.0 * row.mse_stderr));
        CHECK(row.h_tilde * static_cast<double>(row.N) / static_cast<double>(row.K * row.K) <= 10.0);
        CHECK(row.reps == 16);
        CHECK(row.failures == 0);
    }
    REQUIRE(r.rep_mse.size() == 4);
    CHECK(r.rep_mse[0].size() == 16);
    double m = 0.0;
    for (double v : r.rep_mse[2]) m += v;
    CHECK(r.rows[2].mse_mean == doctest::Approx(m / 16.0).epsilon(1e-14));
}

TEST_CASE("reports are identical across runs and thread counts") {
    ExperimentConfig c = base_config(PayoffKind::tanh, 10.0);
    c.K_list = {2, 3, 4};
    c.n_rule = NRule{50.0, 2.01};
    c.repetitions = 8;
    c.threads = 1;
    const std::string one = rows_to_csv(run_experiment(c).rows);
    c.threads = 8;
    const std::string eight = rows_to_csv(run_experiment(c).rows);
    const std::string again = rows_to_csv(run_experiment(c).rows);
    CHECK(one == eight);
    CHECK(eight == again);
    c.seed = 43;
    CHECK(rows_to_csv(run_experiment(c).rows) != one);
}

TEST_CASE("fresh-sample evaluation agrees with quadrature") {
    ExperimentConfig c = base_config(PayoffKind::tanh, 10.0);
    c.K_list = {3, 5};
    c.n_rule = NRule{100.0, 2.01};
    c.repetitions = 10;
    const auto q = run_growing_K(c);
    c.eval = EvalMethod::fresh_sample;
    const auto s = run_growing_K(c);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(s.rows[i].approx_l2 == q.rows[i].approx_l2);
        CHECK(s.rows[i].mse_mean == doctest::Approx(q.rows[i].mse_mean).epsilon(0.1));
    }
}

TEST_CASE("CSV and JSON output") {
    ReportRow a{4, 1625, 100, 1.5e-5, 2e-7, 1.4e-5, 0.0123, 0};
    ReportRow b{6, 3665, 99, NAN, 0.0, 3e-6, 0.01, 1};
    const std::string csv = rows_to_csv({a, b});
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == kCsvHeader);
    std::getline(in, line);
    CHECK(line == "4,1625,100,1.5e-05,2e-07,1.4e-05,0.0123");
    std::getline(in, line);
    CHECK(line.find("nan") != std::string::npos);

    ExperimentConfig c = base_config(PayoffKind::tanh, 10.0);
    c.K_list = {2, 3, 4};
    c.n_rule = NRule{50.0, 2.01};
    c.repetitions = 4;
    const auto r = run_experiment(c);
    const auto doc = report_to_json(r);
    CHECK(doc.contains("slope"));
    CHECK(doc.at("rows").size() == 3);
    CHECK(doc.dump().find("ci") != std::string::npos);
}

TEST_CASE("compare run on a small sweep") {
    ExperimentConfig c = base_config(PayoffKind::square, 10.0);
    c.estimator = EstimatorKind::compare;
    c.condition_time = 0.1;
    c.domain_epsilon = 1e-8;
    c.K_list = {4, 6, 8};
    c.n_rule = NRule{100.0, 2.01};
    c.repetitions = 6;
    const auto r = now_vs_later_compare(c);
    CHECK(r.rows.size() == 3);
    CHECK(r.now_rows.size() == 3);
    CHECK(r.later_batch_slopes.size() == 6);
    CHECK(r.jensen_checks == 18);
    CHECK(r.jensen_violations == 0);
    CHECK(r.later_steeper_fraction >= 0.0);
    CHECK(r.later_steeper_fraction <= 1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r.rows[i].N == r.now_rows[i].N);
}
