#pragma once

#include "pdgeo/geometry.hpp"

namespace pdgeo {

// Ordered samples (t, point) with t strictly increasing from exactly 0 to exactly 1.
// Points are stored column-wise.
class DiscretePath {
public:
    DiscretePath(AmbientSpace space, VectorXd t, MatrixXd points);

    // Samples at uniform parameters i / (n - 1).
    static DiscretePath uniform(AmbientSpace space, MatrixXd points);

    const AmbientSpace& space() const { return space_; }
    const VectorXd& t() const { return t_; }
    const MatrixXd& points() const { return points_; }

    Eigen::Index size() const { return t_.size(); }
    Eigen::Index interior_count() const { return size() - 2; }
    int dim() const { return space_.dim(); }

    VectorXd point(Eigen::Index i) const { return points_.col(i); }
    VectorXd start() const { return points_.col(0); }
    VectorXd end() const { return points_.col(size() - 1); }

    // Same parameters, new sample positions (validated).
    DiscretePath with_points(MatrixXd points) const { return DiscretePath(space_, t_, std::move(points)); }

private:
    AmbientSpace space_;
    VectorXd t_;
    MatrixXd points_;
};

}  // namespace pdgeo
