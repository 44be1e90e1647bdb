#include <doctest.h>

#include <random>

#include "pdgeo/geometry.hpp"
#include "support/benchmarks.hpp"

using namespace pdgeo;
using bench::vec;

TEST_SUITE("geometry") {

TEST_CASE("tangent projection on the sphere") {
    auto s = AmbientSpace::sphere(2, 1.0);
    CHECK((project_to_tangent(s, vec({1, 0}), vec({1, 1})) - vec({0, 1})).norm() < 1e-15);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> n;
    auto s4 = AmbientSpace::sphere(4, 3.0);
    for (int i = 0; i < 100; ++i) {
        VectorXd x(4), v(4);
        for (int k = 0; k < 4; ++k) x[k] = n(rng), v[k] = n(rng);
        x *= 3.0 / x.norm();
        VectorXd p = project_to_tangent(s4, x, v);
        CHECK(std::abs(p.dot(x)) <= 1e-12 * x.norm() * v.norm());
        CHECK((project_to_tangent(s4, x, p) - p).norm() <= 1e-12 * p.norm());
    }
}

TEST_CASE("tangent projection is the identity on flat space") {
    auto e = AmbientSpace::euclidean(3);
    CHECK(project_to_tangent(e, vec({1, 2, 3}), vec({4, 5, 6})) == vec({4, 5, 6}));
}

TEST_CASE("projection at the origin of a sphere fails") {
    auto s = AmbientSpace::sphere(2, 1.0);
    CHECK_THROWS_AS(project_to_tangent(s, vec({0, 0}), vec({1, 0})), DomainError);
}

TEST_CASE("retraction keeps the radius") {
    auto s = AmbientSpace::sphere(3, 2.5);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    for (int i = 0; i < 100; ++i) {
        VectorXd x(3), step(3);
        for (int k = 0; k < 3; ++k) x[k] = n(rng), step[k] = 0.5 * n(rng);
        x *= 2.5 / x.norm();
        VectorXd y = retract(s, x, step);
        CHECK(std::abs(y.norm() - 2.5) <= 1e-12 * 2.5);
    }
    CHECK(retract(AmbientSpace::euclidean(2), vec({1, 1}), vec({0.5, -1})) == vec({0.5, 2}));
    CHECK_THROWS_AS(retract(s, vec({1, 0, 0}), vec({1, 0, 0})), DegenerateError);
}

TEST_CASE("interpolation endpoints and midpoints") {
    auto e = AmbientSpace::euclidean(2);
    auto s = AmbientSpace::sphere(2, 1.0);
    CHECK(geodesic_interpolate(e, vec({0, 0}), vec({2, 4}), 0.0) == vec({0, 0}));
    CHECK(geodesic_interpolate(s, vec({1, 0}), vec({0, 1}), 1.0) == vec({0, 1}));
    CHECK((geodesic_interpolate(e, vec({0, 0}), vec({2, 4}), 0.25) - vec({0.5, 1})).norm() < 1e-15);
    const double r = 1 / std::sqrt(2.0);
    CHECK((geodesic_interpolate(s, vec({1, 0}), vec({0, 1}), 0.5) - vec({r, r})).norm() < 1e-15);
}

TEST_CASE("great-circle interpolation advances at a constant angular rate") {
    auto s = AmbientSpace::sphere(3, 4.0);
    VectorXd a = 4.0 * vec({1, 2, -0.5}).normalized();
    VectorXd b = 4.0 * vec({-1, 0.3, 2}).normalized();
    const double total = angle_between(a, b);
    for (double t : {0.1, 0.33, 0.5, 0.77, 0.9}) {
        VectorXd x = geodesic_interpolate(s, a, b, t);
        CHECK(std::abs(angle_between(x, a) - t * total) <= 1e-9);
        CHECK(on_space(s, x));
    }
}

TEST_CASE("antipodal endpoints are ambiguous") {
    auto s = AmbientSpace::sphere(2, 1.0);
    CHECK_THROWS_AS(geodesic_interpolate(s, vec({1, 0}), vec({-1, 0}), 0.5), DegenerateError);
    CHECK_NOTHROW(geodesic_interpolate(s, vec({1, 0}), vec({-1, 1e-3}), 0.5));
}

TEST_CASE("angle between nearly parallel vectors") {
    CHECK(angle_between(vec({1, 0}), vec({1, 1e-10})) == doctest::Approx(1e-10).epsilon(1e-6));
    CHECK(angle_between(vec({1, 0}), vec({-1, 0})) == doctest::Approx(M_PI));
}

TEST_CASE("sphere through two endpoints") {
    auto s = AmbientSpace::sphere_through(vec({3, 4}), vec({0, 5.02}));
    CHECK(s.radius() == 5.0);
    CHECK_THROWS_AS(AmbientSpace::sphere_through(vec({3, 4}), vec({0, 5.2})), ConfigError);
    CHECK_THROWS_AS(AmbientSpace::euclidean(1), ConfigError);
    CHECK_THROWS_AS(AmbientSpace::sphere(3, 0.0), ConfigError);
}

TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(project_to_tangent(AmbientSpace::euclidean(2), vec({1, 2}), vec({1, 2, 3})), ConfigError);
}

}
