#include "pdgeo/path.hpp"

#include <string>

namespace pdgeo {

DiscretePath::DiscretePath(AmbientSpace space, VectorXd t, MatrixXd points)
    : space_(space), t_(std::move(t)), points_(std::move(points)) {
    if (t_.size() < 2) throw ConfigError("a path needs at least two samples");
    if (points_.cols() != t_.size()) throw ConfigError("path parameter/point count mismatch");
    if (points_.rows() != space_.dim())
        throw ConfigError("path points have dimension " + std::to_string(points_.rows()) + ", space has " +
                          std::to_string(space_.dim()));
    if (t_[0] != 0.0 || t_[t_.size() - 1] != 1.0)
        throw ConfigError("path parameters must start at 0 and end at 1");
    for (Eigen::Index i = 1; i < t_.size(); ++i) {
        if (!(t_[i] > t_[i - 1]))
            throw ConfigError("path parameters must be strictly increasing (index " + std::to_string(i) + ")");
    }
    if (!points_.allFinite()) throw ConfigError("path contains non-finite coordinates");
    for (Eigen::Index i = 0; i < t_.size(); ++i) {
        if (!on_space(space_, points_.col(i)))
            throw DomainError("path sample " + std::to_string(i) + " is off the sphere of radius " +
                              std::to_string(space_.radius()));
    }
}

DiscretePath DiscretePath::uniform(AmbientSpace space, MatrixXd points) {
    const Eigen::Index n = points.cols();
    if (n < 2) throw ConfigError("a path needs at least two samples");
    VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) t[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    t[n - 1] = 1.0;
    return DiscretePath(space, std::move(t), std::move(points));
}

}  // namespace pdgeo
