#pragma once

#include <array>
#include <string>
#include <vector>

#include "pdgeo/geometry.hpp"

namespace pdgeo::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 720;
    int height = 480;
};

// Line chart with axes, ticks and a legend. Throws ConfigError when there is nothing to draw.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);

struct Overlay {
    std::string label;
    MatrixXd points;  // 2 x N
};

// Filled-free contour plot of a scalar field sampled on a regular grid
// (values(i, j) at (xs[j], ys[i])) with path overlays.
std::string contour_plot(const VectorXd& xs, const VectorXd& ys, const MatrixXd& values, int levels,
                         const std::vector<Overlay>& overlays, const ChartOptions& options);

// Line segments of the iso-line values == level by marching squares, as
// (x0, y0, x1, y1) rows.
std::vector<std::array<double, 4>> iso_segments(const VectorXd& xs, const VectorXd& ys, const MatrixXd& values,
                                                double level);

}  // namespace pdgeo::svg
