#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "lsmc/basis.hpp"
#include "lsmc/errors.hpp"
#include "lsmc/regress.hpp"
#include "lsmc/rng.hpp"

#include <numeric>

using namespace lsmc;

namespace {

const ProcessSpec kW10{ProcessKind::brownian, 0.0, 10.0, 1, 1.0};
const FeatureSpec kAtT{FeatureKind::terminal, 10.0, 0.0};

DistSpec tn10() { return DistSpec::central_normal(0.0, 10.0, 1e-4); }

// Regress-Later sample: W(10) on the central domain with payoff g(W(10)).
SampleSet later_sample(const std::function<double(double)>& g, std::size_t n, std::uint64_t seed) {
    SampleSet s = simulate_conditional(kW10, kAtT, tn10().domain(), n, seed);
    s.payoffs.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.payoffs[i] = g(s.features(static_cast<Eigen::Index>(i), 0));
    return s;
}

// Regress-Now sample: features W(t), payoff W(T)^2, with W(t) on the central domain of its law.
constexpr double kT = 2.0;
constexpr double kt = 1.0;
const ProcessSpec kW2{ProcessKind::brownian, 0.0, kT, 1, 1.0};

DistSpec law_t() { return DistSpec::central_normal(0.0, kt, 1e-4); }

SampleSet now_sample(std::size_t n, std::uint64_t seed) {
    const FeatureSpec pair{FeatureKind::pair_u_T, kT, kt};
    const SampleSet raw = simulate_conditional(kW2, pair, law_t().domain(), n, seed);
    SampleSet s;
    s.features = raw.features.col(0);
    s.payoffs.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.payoffs[i] = std::pow(raw.features(static_cast<Eigen::Index>(i), 1), 2);
    return s;
}

double now_truth(double w) { return w * w + (kT - kt); }

// E[(truth - fit)^2] over the regressor law.
double mse(const FitResult& fit, const SieveBasis& b, const DistSpec& d, const std::function<double(double)>& truth) {
    return expect_piecewise(d, b.partition.edges, [&](double u) { return std::pow(truth(u) - predict(fit, b, u), 2); });
}

Eigen::MatrixXd random_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    const CounterRng rng(derive_key(seed, {}));
    Eigen::MatrixXd E(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) E(i, j) = rng.uniform(static_cast<std::uint64_t>(i * p + j)) - 0.5;
    return E;
}

} // namespace

TEST_CASE("ols on a constant column returns the sample mean") {
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(11, -3.0, 7.0);
    const FitResult f = ols_fit(Eigen::MatrixXd::Ones(11, 1), x);
    CHECK(f.coefficients(0) == doctest::Approx(x.mean()).epsilon(1e-14));
    CHECK(f.rank == 1);
}

TEST_CASE("ols recovers exact coefficients") {
    const Eigen::MatrixXd E = random_design(200, 6, 1);
    Eigen::VectorXd alpha(6);
    alpha << 1.5, -2.0, 0.25, 3.0, -0.75, 10.0;
    const FitResult f = ols_fit(E, E * alpha);
    CHECK(((f.coefficients - alpha).norm() / alpha.norm()) < 1e-8);
    CHECK(f.residual_l2 < 1e-10);
}

TEST_CASE("duplicate and empty columns are dropped") {
    const Eigen::MatrixXd E = random_design(100, 4, 2);
    const Eigen::VectorXd x = random_design(100, 1, 3).col(0);
    const FitResult base = ols_fit(E, x);
    Eigen::MatrixXd dup(100, 6);
    dup << E, E.col(1), Eigen::VectorXd::Zero(100);
    const FitResult f = ols_fit(dup, x);
    CHECK(f.rank == 4);
    CHECK(f.dropped_columns.size() == 2);
    CHECK(std::find(f.dropped_columns.begin(), f.dropped_columns.end(), 5u) != f.dropped_columns.end());
    for (std::size_t j : f.dropped_columns) CHECK(f.coefficients(static_cast<Eigen::Index>(j)) == 0.0);
    CHECK(((dup * f.coefficients) - (E * base.coefficients)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_THROWS_AS(ols_fit(Eigen::MatrixXd::Zero(10, 3), x.head(10)), NumericalError);
}

TEST_CASE("residual is orthogonal to the design and fits are permutation invariant") {
    const DistSpec d = tn10();
    const auto b = build_basis(d, 12);
    const SampleSet s = later_sample([](double u) { return std::tanh(u) + 0.1 * u * u; }, 5000, 4);
    std::vector<double> u(s.features.data(), s.features.data() + s.n());
    const Eigen::MatrixXd E = design_matrix(b, u);
    const Eigen::Map<const Eigen::VectorXd> X(s.payoffs.data(), static_cast<Eigen::Index>(s.n()));
    const FitResult f = ols_fit(E, X);
    const Eigen::VectorXd r = X - E * f.coefficients;
    CHECK((E.transpose() * r).cwiseAbs().maxCoeff() <= 1e-8 * X.norm());

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(E.cols()));
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[3], perm[10]);
    Eigen::MatrixXd P(E.rows(), E.cols());
    for (Eigen::Index j = 0; j < E.cols(); ++j) P.col(j) = E.col(perm[static_cast<std::size_t>(j)]);
    const FitResult g = ols_fit(P, X);
    CHECK(((E * f.coefficients) - (P * g.coefficients)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("regress later recovers a basis function") {
    const DistSpec d = tn10();
    const auto b = build_basis(d, 6);
    const SampleSet s = later_sample([&](double u) { return eval_basis(b, u)(0); }, 3000, 5);
    const FitResult f = regress_later_fit(s, b);
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(12);
    unit(0) = 1.0;
    CHECK((f.coefficients - unit).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(f.mode == FitMode::later);
    CHECK(coefficient_error(f, b, [&](double u) { return eval_basis(b, u)(0); }, d) < 1e-12);
}

TEST_CASE("piecewise-linear payoff on the bin edges is fitted exactly") {
    const DistSpec d = tn10();
    const std::size_t K = 10;
    const auto b = build_basis(d, K);
    const auto& e = b.partition.edges;
    const auto g = [&](double u) {
        const std::size_t k = *b.locate(u);
        return (k % 3) - 0.5 * (u - e[k]) * static_cast<double>(k);
    };
    const SampleSet s = later_sample(g, 50 * K, 6);
    const FitResult f = regress_later_fit(s, b);
    CHECK(f.residual_l2 / std::sqrt(static_cast<double>(s.n())) < 1e-8);
}

TEST_CASE("regress later out-of-sample error is close to the approximation error") {
    const DistSpec d = tn10();
    const auto b = build_basis(d, 5);
    const auto g = [](double u) { return std::tanh(u); };
    const double approx = approx_error_moments(g, b, d).l2;
    const FitResult f = regress_later_fit(later_sample(g, 10000, 7), b);
    const double m = mse(f, b, d, g);
    CHECK(m >= 0.5 * approx);
    CHECK(m <= 2.0 * approx);
}

TEST_CASE("regress later in-sample error is monotone under refinement") {
    const DistSpec d = tn10();
    const auto g = [](double u) { return std::tanh(u); };
    const SampleSet s = later_sample(g, 20000, 8);
    for (std::size_t K : {2u, 4u, 8u, 16u}) {
        const double coarse = regress_later_fit(s, build_basis(d, K)).residual_l2;
        const double fine = regress_later_fit(s, build_basis(d, 2 * K)).residual_l2;
        CHECK(fine <= coarse * (1.0 + 1e-12));
    }
}

TEST_CASE("regress later residual variance vanishes as K and N grow") {
    const DistSpec d = tn10();
    const auto g = [](double u) { return std::tanh(u); };
    const FitResult small = regress_later_fit(later_sample(g, 1000, 9), build_basis(d, 4));
    const FitResult big = regress_later_fit(later_sample(g, 100000, 10), build_basis(d, 32));
    const double vs = small.residual_l2 * small.residual_l2 / 1000.0;
    const double vb = big.residual_l2 * big.residual_l2 / 100000.0;
    CHECK(vb < 0.1 * vs);
}

TEST_CASE("regress now: identity payoff is odd around zero") {
    const auto b = build_basis(law_t(), 6);
    std::vector<double> at0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const FeatureSpec pair{FeatureKind::pair_u_T, kT, kt};
        const SampleSet raw = simulate_conditional(kW2, pair, law_t().domain(), 4000, 100 + seed);
        SampleSet s;
        s.features = raw.features.col(0);
        s.payoffs.assign(raw.features.col(1).begin(), raw.features.col(1).end());
        at0.push_back(predict(regress_now_fit(s, b).first, b, 0.0));
    }
    const double sd = std::sqrt(oracle::variance(at0));
    CHECK(std::abs(at0.front()) < 4.0 * sd);
    CHECK(std::abs(oracle::mean(at0)) < 4.0 * sd / std::sqrt(40.0));
}

TEST_CASE("regress now: error against the oracle shrinks with N") {
    const DistSpec d = law_t();
    const auto b = build_basis(d, 8);
    int better = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto [small, ds] = regress_now_fit(now_sample(1000, derive_key(11, {seed, 0})), b);
        const auto [big, db] = regress_now_fit(now_sample(100000, derive_key(11, {seed, 1})), b);
        better += mse(big, b, d, now_truth) < mse(small, b, d, now_truth);
        CHECK(db.projection_error_present);
        CHECK(big.mode == FitMode::now);
    }
    CHECK(better >= 95);
}

TEST_CASE("regress now: a time-t measurable payoff has no projection error") {
    const auto b = build_basis(law_t(), 5);
    SampleSet s = now_sample(2000, 12);
    for (std::size_t i = 0; i < s.n(); ++i) s.payoffs[i] = eval_basis(b, s.features(static_cast<Eigen::Index>(i), 0))(0);
    const auto [fit, diag] = regress_now_fit(s, b);
    CHECK(diag.residual_variance_estimate < 1e-8);
    CHECK_FALSE(diag.projection_error_present);
}

TEST_CASE("coefficient error shrinks with N") {
    const DistSpec d = tn10();
    const auto b = build_basis(d, 5);
    const auto g = [](double u) { return std::tanh(u); };
    std::vector<double> small, big;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        small.push_back(coefficient_error(regress_later_fit(later_sample(g, 1000, derive_key(13, {seed, 0})), b), b, g, d));
        big.push_back(coefficient_error(regress_later_fit(later_sample(g, 100000, derive_key(13, {seed, 1})), b), b, g, d));
    }
    CHECK(oracle::median(big) < oracle::median(small));

    // Regress-Now coefficients against the projection of the conditional truth.
    const DistSpec dt = law_t();
    const auto bt = build_basis(dt, 8);
    std::vector<double> Ns, errs;
    for (std::size_t N : {1000u, 10000u, 100000u}) {
        std::vector<double> e;
        for (std::uint64_t seed = 0; seed < 50; ++seed)
            e.push_back(coefficient_error(regress_now_fit(now_sample(N, derive_key(14, {seed, N})), bt).first, bt, now_truth, dt));
        Ns.push_back(static_cast<double>(N));
        errs.push_back(oracle::mean(e));
    }
    const double slope = oracle::loglog_slope(Ns, errs);
    MESSAGE("regress-now coefficient error slope " << slope);
    CHECK(slope >= -1.3);
    CHECK(slope <= -0.7);
}

TEST_CASE("regress input validation") {
    const auto b = build_basis(tn10(), 3);
    SampleSet s = later_sample([](double u) { return u; }, 50, 15);
    s.payoffs.clear();
    CHECK_THROWS_AS(regress_later_fit(s, b), ConfigError);
    SampleSet two;
    two.features = Eigen::MatrixXd::Zero(5, 2);
    two.payoffs.assign(5, 0.0);
    CHECK_THROWS_AS(regress_later_fit(two, b), ConfigError);
    const FitResult f = ols_fit(Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(3));
    CHECK(fit_to_json(f).at("rank") == 1);
    CHECK_THROWS_AS(coefficient_error(f, b, [](double) { return 0.0; }, tn10()), ConfigError);
}
