#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "oracles/finite_difference.hpp"
#include "pdgeo/score_field.hpp"
#include "support/benchmarks.hpp"

using namespace pdgeo;
using bench::vec;

namespace {

GaussianMixture skewed_mixture() {
    MatrixXd c0(2, 2), c1(2, 2), c2(2, 2);
    c0 << 0.5, 0.2, 0.2, 0.3;
    c1 << 0.8, -0.1, -0.1, 0.4;
    c2 << 0.25, 0.0, 0.0, 0.6;
    return GaussianMixture({0.2, 0.5, 0.3}, {vec({-1, 0.5}), vec({1, -0.2}), vec({0.3, 1.4})}, {c0, c1, c2});
}

GridField gaussian_grid(double h, double half_width) {
    const int n = static_cast<int>(std::lround(2 * half_width / h)) + 1;
    std::vector<double> values;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = -half_width + i * h, y = -half_width + j * h;
            values.push_back(-std::log(2 * M_PI) - 0.5 * (x * x + y * y));
        }
    return GridField(vec({-half_width, -half_width}), vec({h, h}), {n, n}, values);
}

VectorXd random_point(std::mt19937_64& rng, double lo, double hi, int dim = 2) {
    std::uniform_real_distribution<double> u(lo, hi);
    VectorXd x(dim);
    for (int k = 0; k < dim; ++k) x[k] = u(rng);
    return x;
}

}  // namespace

TEST_SUITE("density") {

TEST_CASE("standard normal log-density and score") {
    auto m = GaussianMixture::isotropic({1.0}, {VectorXd::Zero(2)}, 1.0);
    CHECK(mixture_log_density(m, vec({0, 0})) == doctest::Approx(-std::log(2 * M_PI)).epsilon(1e-15));
    CHECK(mixture_log_density(m, vec({1, 0})) == doctest::Approx(-std::log(2 * M_PI) - 0.5).epsilon(1e-15));
    CHECK((mixture_score(m, vec({3, -2})) - vec({-3, 2})).norm() < 1e-14);
}

TEST_CASE("mixture log-density against direct summation") {
    auto m = bench::two_gaussians();
    auto normal = [](const VectorXd& x, const VectorXd& mu, double s) {
        return std::exp(-0.5 * (x - mu).squaredNorm() / (s * s)) / (2 * M_PI * s * s);
    };
    for (VectorXd x : {vec({-1.5, 0}), vec({0.3, 0.7}), vec({4, -2})}) {
        const double direct = std::log(0.5 * normal(x, vec({-1.5, 0}), 0.5) + 0.5 * normal(x, vec({1.5, 0}), 0.5));
        CHECK(mixture_log_density(m, x) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("log-sum-exp stays finite far from every mode") {
    auto m = bench::two_gaussians();
    const double lp = mixture_log_density(m, vec({60, 0}));
    CHECK(std::isfinite(lp));
    CHECK((mixture_score(m, vec({60, 0})) - vec({-(60 - 1.5) / 0.25, 0})).norm() < 1e-9);
}

TEST_CASE("score is zero at a stationary point") {
    auto m = bench::two_gaussians();
    CHECK(mixture_score(m, vec({0, 0})).norm() < 1e-14);
}

TEST_CASE("analytic scores match central differences of the log-density") {
    std::mt19937_64 rng(2024);
    auto m = skewed_mixture();
    ConditionalMixturePair pair(bench::two_gaussians(), skewed_mixture());
    for (int i = 0; i < 100; ++i) {
        VectorXd x = random_point(rng, -2.5, 2.5);
        auto fd = oracles::central_gradient([&](const VectorXd& y) { return mixture_log_density(m, y); }, x, 1e-5);
        CHECK((mixture_score(m, x) - fd).cwiseAbs().maxCoeff() <= 1e-6);

        const double z = std::uniform_real_distribution<double>(0, 1)(rng);
        auto fdz = oracles::central_gradient([&](const VectorXd& y) { return conditional_score(pair, y, z).log_density; },
                                             x, 1e-5);
        CHECK((conditional_score(pair, x, z).score - fdz).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("log-density is invariant under component permutation") {
    auto m = skewed_mixture();
    GaussianMixture p({m.weight(2), m.weight(0), m.weight(1)}, {m.mean(2), m.mean(0), m.mean(1)},
                      {m.covariance(2), m.covariance(0), m.covariance(1)});
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        VectorXd x = random_point(rng, -3, 3);
        const double a = mixture_log_density(m, x), b = mixture_log_density(p, x);
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
}

TEST_CASE("conditional blend at its boundaries") {
    ConditionalMixturePair pair(bench::two_gaussians(), skewed_mixture());
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        VectorXd x = random_point(rng, -2, 2);
        auto s0 = conditional_score(pair, x, 0.0);
        auto s1 = conditional_score(pair, x, 1.0);
        CHECK((s0.score - mixture_score(pair.mixture_0(), x)).norm() <= 1e-12 * s0.score.norm());
        CHECK((s1.score - mixture_score(pair.mixture_1(), x)).norm() <= 1e-12 * s1.score.norm());
        CHECK(s0.log_density == doctest::Approx(mixture_log_density(pair.mixture_0(), x)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(conditional_score(pair, vec({0, 0}), 1.5), DomainError);
    CHECK_THROWS_AS(ConditionalMixturePair(bench::two_gaussians(), bench::sphere_modes()), ConfigError);
}

TEST_CASE("grid sampled from a Gaussian") {
    auto g = gaussian_grid(0.05, 2.0);
    auto s = grid_score(g, vec({0.2, -0.3}));
    CHECK(std::abs(s.log_density - (-std::log(2 * M_PI) - 0.5 * 0.13)) <= 1e-3);
    CHECK((s.score - vec({-0.2, 0.3})).cwiseAbs().maxCoeff() <= 5e-2);
    CHECK(g.interpolate(vec({0.5, 1.0})) == doctest::Approx(g.node({50, 60})).epsilon(1e-14));
}

TEST_CASE("grid scores against finite differences of the interpolant") {
    auto g = gaussian_grid(0.05, 2.0);
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        VectorXd x = random_point(rng, -1.8, 1.8);
        auto fd = oracles::central_gradient([&](const VectorXd& y) { return g.interpolate(y); }, x, 0.025);
        CHECK((grid_score(g, x).score - fd).cwiseAbs().maxCoeff() <= 5e-2);
    }
}

TEST_CASE("flat grid has zero score") {
    GridField g(vec({0, 0, 0}), vec({1, 1, 1}), {5, 5, 5}, std::vector<double>(125, -2.0));
    CHECK(grid_score(g, vec({2.1, 1.9, 2.2})).score.norm() == 0.0);
}

TEST_CASE("grid queries outside the interior box fail") {
    auto g = gaussian_grid(0.5, 1.0);
    CHECK_THROWS_AS(grid_score(g, vec({0.9, 0})), DomainError);
    CHECK_THROWS_AS(g.interpolate(vec({1.2, 0})), DomainError);
    CHECK_THROWS_AS(GridField(vec({0, 0}), vec({1, 0}), {2, 2}, std::vector<double>(4)), ConfigError);
    CHECK_THROWS_AS(GridField(vec({0, 0}), vec({1, 1}), {2, 2}, std::vector<double>(5)), ConfigError);
}

TEST_CASE("mixture validation") {
    CHECK_THROWS_AS(GaussianMixture::isotropic({0.5, 0.4}, {vec({0, 0}), vec({1, 1})}, 1.0), ConfigError);
    CHECK_THROWS_AS(GaussianMixture::isotropic({1.0}, {vec({0, 0})}, 0.0), ConfigError);
    MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(GaussianMixture({1.0}, {vec({0, 0})}, {bad}), ConfigError);
    CHECK_THROWS_AS(GaussianMixture::diagonal({1.0}, {vec({0, 0})}, {vec({1, -1})}), ConfigError);
    CHECK_THROWS_AS(mixture_score(bench::two_gaussians(), vec({1, 2, 3})), ConfigError);
}

TEST_CASE("conditioning schedule") {
    ConditioningSchedule s(vec({0, 0}), vec({2, 4}));
    CHECK(condition_at(s, 0.0) == vec({0, 0}));
    CHECK(condition_at(s, 1.0) == vec({2, 4}));
    CHECK((condition_at(s, 0.25) - vec({0.5, 1})).norm() < 1e-15);
    CHECK_THROWS_AS(ConditioningSchedule(vec({0}), vec({1, 2})), ConfigError);
    CHECK_THROWS_AS(ScoreScale(0.0), ConfigError);
}

TEST_CASE("uniform density") {
    UniformDensity u(3);
    ScoreQuery q{MatrixXd::Random(3, 5), std::nullopt, std::nullopt};
    auto r = u.score(q);
    CHECK(r.scores.norm() == 0.0);
    CHECK(r.log_density->norm() == 0.0);
}

TEST_CASE("score field applies beta and the schedule") {
    ConditionalMixturePair pair(bench::two_gaussians(), skewed_mixture());
    ScoreField field(pair, ConditioningSchedule(vec({0.0}), vec({1.0})), ScoreScale(0.5));
    MatrixXd pts(2, 3);
    pts << 0.1, -0.4, 1.0, 0.2, 0.5, -0.3;
    auto sample = field.evaluate(pts, vec({0.0, 0.5, 1.0}));
    for (int j = 0; j < 3; ++j) {
        auto ref = conditional_score(pair, pts.col(j), 0.5 * j);
        CHECK((sample.scores.col(j) - 0.5 * ref.score).norm() < 1e-14);
        CHECK((*sample.log_density)[j] == doctest::Approx(0.5 * ref.log_density));
    }
    CHECK_THROWS_AS(ScoreField{pair}, ConfigError);
    auto m = bench::two_gaussians();
    CHECK_THROWS_AS(ScoreField(m, ConditioningSchedule(vec({0.0}), vec({1.0}))), ConfigError);
}

TEST_CASE("query validation") {
    auto m = bench::two_gaussians();
    ScoreQuery q{MatrixXd::Zero(2, 3), std::nullopt, VectorXd::Zero(2)};
    CHECK_THROWS_AS(m.score(q), ConfigError);
    ScoreQuery wrong{MatrixXd::Zero(3, 1), std::nullopt, std::nullopt};
    CHECK_THROWS_AS(m.score(wrong), ConfigError);
}

TEST_CASE("concurrent evaluation of an immutable provider") {
    auto m = skewed_mixture();
    MatrixXd pts = MatrixXd::Random(2, 200);
    ScoreQuery q{pts, std::nullopt, std::nullopt};
    const MatrixXd expected = m.score(q).scores;
    std::vector<std::thread> threads;
    std::vector<int> ok(4, 0);
    for (int i = 0; i < 4; ++i)
        threads.emplace_back([&, i] { ok[i] = m.score(q).scores == expected; });
    for (auto& t : threads) t.join();
    CHECK(std::all_of(ok.begin(), ok.end(), [](int v) { return v == 1; }));
}

}
