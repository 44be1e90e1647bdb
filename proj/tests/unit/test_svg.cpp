#include <doctest.h>

#include <cmath>

#include "pdgeo/errors.hpp"
#include "pdgeo/svg.hpp"

using namespace pdgeo;

namespace {

bool balanced(const std::string& svg, const std::string& tag) {
    std::size_t open = 0, close = 0, pos = 0;
    while ((pos = svg.find("<" + tag, pos)) != std::string::npos) ++open, ++pos;
    pos = 0;
    while ((pos = svg.find("</" + tag + ">", pos)) != std::string::npos) ++close, ++pos;
    return open == close;
}

void check_document(const std::string& svg) {
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg.find("inf") == std::string::npos);
    CHECK(balanced(svg, "text"));
    CHECK(balanced(svg, "svg"));
}

}  // namespace

TEST_SUITE("svg") {

TEST_CASE("line chart") {
    svg::Series a{"mean <grad> & co", {0, 1, 2, 3}, {4, 2, 1, 0.5}};
    svg::Series b{"flat", {0, 3}, {1, 1}};
    auto doc = svg::line_chart({a, b}, {"trace", "iter", "value"});
    check_document(doc);
    CHECK(doc.find("mean &lt;grad&gt; &amp; co") != std::string::npos);
    CHECK(doc.find("<polyline") != std::string::npos);
}

TEST_CASE("degenerate charts") {
    check_document(svg::line_chart({{"c", {0, 1, 2}, {5, 5, 5}}}, {}));
    check_document(svg::line_chart({{"p", {1}, {2}}}, {}));
    CHECK_THROWS_AS(svg::line_chart({}, {}), ConfigError);
    CHECK_THROWS_AS(svg::line_chart({{"e", {}, {}}}, {}), ConfigError);
    CHECK_THROWS_AS(svg::line_chart({{"m", {1, 2}, {1}}}, {}), ConfigError);
}

TEST_CASE("iso segments of a linear field") {
    VectorXd xs = VectorXd::LinSpaced(5, 0, 1);
    VectorXd ys = VectorXd::LinSpaced(4, 0, 1);
    MatrixXd values(4, 5);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) values(i, j) = xs[j];
    auto segs = svg::iso_segments(xs, ys, values, 0.3);
    CHECK(segs.size() == 3);
    for (const auto& s : segs) {
        CHECK(s[0] == doctest::Approx(0.3));
        CHECK(s[2] == doctest::Approx(0.3));
    }
    CHECK(svg::iso_segments(xs, ys, values, 2.0).empty());
}

TEST_CASE("iso segments of a radial field lie near the circle") {
    const int n = 81;
    VectorXd xs = VectorXd::LinSpaced(n, -2, 2);
    MatrixXd values(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) values(i, j) = xs[i] * xs[i] + xs[j] * xs[j];
    auto segs = svg::iso_segments(xs, xs, values, 1.0);
    CHECK(segs.size() > 50);
    const double h = 4.0 / (n - 1);
    for (const auto& s : segs) {
        CHECK(std::abs(std::hypot(s[0], s[1]) - 1.0) < h * h);
        CHECK(std::abs(std::hypot(s[2], s[3]) - 1.0) < h * h);
    }
}

TEST_CASE("contour plot") {
    VectorXd xs = VectorXd::LinSpaced(21, -1, 1);
    MatrixXd values(21, 21);
    for (int i = 0; i < 21; ++i)
        for (int j = 0; j < 21; ++j) values(i, j) = -(xs[i] * xs[i] + xs[j] * xs[j]);
    MatrixXd path(2, 3);
    path << -1, 0, 1, 0, 0.5, 0;
    auto doc = svg::contour_plot(xs, xs, values, 6, {{"geodesic", path}}, {"log p", "x0", "x1"});
    check_document(doc);
    CHECK(doc.find("geodesic") != std::string::npos);
    check_document(svg::contour_plot(xs, xs, MatrixXd::Zero(21, 21), 6, {}, {}));
    CHECK_THROWS_AS(svg::contour_plot(xs, xs, MatrixXd::Zero(3, 3), 6, {}, {}), ConfigError);
    CHECK_THROWS_AS(svg::contour_plot(xs, xs, values, 0, {}, {}), ConfigError);
    CHECK_THROWS_AS(svg::contour_plot(xs, xs, values, 4, {{"bad", MatrixXd::Zero(3, 2)}}, {}), ConfigError);
}

}
