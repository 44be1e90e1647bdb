#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "pdgeo/errors.hpp"

namespace pdgeo {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

enum class SpaceKind { Euclidean, Sphere };

// The ambient space the paths live in: flat R^d, or the origin-centred sphere
// of a given radius embedded in R^d.
class AmbientSpace {
public:
    static AmbientSpace euclidean(int dim) { return AmbientSpace(SpaceKind::Euclidean, dim, 0.0); }
    static AmbientSpace sphere(int dim, double radius) {
        return AmbientSpace(SpaceKind::Sphere, dim, radius);
    }

    // Sphere through the start point; the end point must have the same norm within 1%.
    template <typename DA, typename DB>
    static AmbientSpace sphere_through(const Eigen::MatrixBase<DA>& a,
                                       const Eigen::MatrixBase<DB>& b) {
        const double ra = static_cast<double>(a.norm());
        const double rb = static_cast<double>(b.norm());
        if (!(ra > 0.0)) throw DomainError("sphere endpoint at the origin");
        if (std::abs(rb - ra) > 0.01 * ra) {
            throw ConfigError("endpoint norms differ by more than 1% (" + std::to_string(ra) +
                              " vs " + std::to_string(rb) + "); not on a common sphere");
        }
        return sphere(static_cast<int>(a.size()), ra);
    }

    SpaceKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    double radius() const noexcept { return radius_; }
    bool is_sphere() const noexcept { return kind_ == SpaceKind::Sphere; }

    bool operator==(const AmbientSpace&) const = default;

private:
    AmbientSpace(SpaceKind kind, int dim, double radius) : kind_(kind), dim_(dim), radius_(radius) {
        if (dim < 2) throw ConfigError("ambient dimension must be at least 2");
        if (kind == SpaceKind::Sphere && !(radius > 0.0))
            throw ConfigError("sphere radius must be positive");
    }

    SpaceKind kind_;
    int dim_;
    double radius_;
};

inline std::string to_string(SpaceKind kind) {
    return kind == SpaceKind::Sphere ? "sphere" : "euclidean";
}

namespace detail {

template <typename Derived>
void check_dim(const AmbientSpace& space, const Eigen::MatrixBase<Derived>& v, const char* what) {
    if (v.size() != space.dim()) {
        throw ConfigError(std::string(what) + " has dimension " + std::to_string(v.size()) +
                          ", expected " + std::to_string(space.dim()));
    }
}

}  // namespace detail

// (I - x̂x̂ᵀ) v on the sphere, v itself on flat space.
template <typename DX, typename DV>
Vector<typename DV::Scalar> project_to_tangent(const AmbientSpace& space,
                                               const Eigen::MatrixBase<DX>& x,
                                               const Eigen::MatrixBase<DV>& v) {
    using Scalar = typename DV::Scalar;
    detail::check_dim(space, v, "vector");
    if (!space.is_sphere()) return v;
    detail::check_dim(space, x, "base point");
    const Scalar norm = x.norm();
    if (!(norm > Scalar(0))) throw DomainError("tangent projection at the origin of a sphere");
    const Vector<Scalar> unit = x / norm;
    return v - unit * unit.dot(v);
}

// Moves x by -step and, on the sphere, rescales the result back to ‖x‖.
template <typename DX, typename DS>
Vector<typename DX::Scalar> retract(const AmbientSpace& space, const Eigen::MatrixBase<DX>& x,
                                    const Eigen::MatrixBase<DS>& step) {
    using Scalar = typename DX::Scalar;
    detail::check_dim(space, x, "point");
    detail::check_dim(space, step, "step");
    Vector<Scalar> moved = x - step;
    if (!space.is_sphere()) return moved;
    const Scalar target = x.norm();
    const Scalar norm = moved.norm();
    if (!(norm > std::numeric_limits<Scalar>::epsilon() * target)) {
        throw DegenerateError("retraction step passes through the origin");
    }
    return moved * (target / norm);
}

// Angle between two nonzero vectors, accurate for nearly (anti)parallel inputs.
template <typename DA, typename DB>
typename DA::Scalar angle_between(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    using Scalar = typename DA::Scalar;
    const Vector<Scalar> ua = a.normalized();
    const Vector<Scalar> ub = b.normalized();
    return Scalar(2) * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

inline constexpr double kAntipodalTolerance = 1e-6;

// Constant-rate interpolation along the segment (flat) or the great-circle arc (sphere).
template <typename DA, typename DB>
Vector<typename DA::Scalar> geodesic_interpolate(const AmbientSpace& space,
                                                 const Eigen::MatrixBase<DA>& a,
                                                 const Eigen::MatrixBase<DB>& b,
                                                 typename DA::Scalar t) {
    using Scalar = typename DA::Scalar;
    detail::check_dim(space, a, "start point");
    detail::check_dim(space, b, "end point");
    if (t == Scalar(0)) return a;
    if (t == Scalar(1)) return b;
    if (!space.is_sphere()) return (Scalar(1) - t) * a + t * b;

    if (!(a.norm() > Scalar(0)) || !(b.norm() > Scalar(0)))
        throw DomainError("great-circle interpolation through the origin");
    const Scalar omega = angle_between(a, b);
    if (Scalar(M_PI) - omega < Scalar(kAntipodalTolerance))
        throw DegenerateError("antipodal endpoints: great-circle arc is ambiguous");
    const Vector<Scalar> ua = a.normalized();
    const Vector<Scalar> ub = b.normalized();
    const Scalar radius = Scalar(space.radius());
    if (omega < Scalar(1e-12)) {
        const Vector<Scalar> mix = (Scalar(1) - t) * ua + t * ub;
        return radius * mix.normalized();
    }
    const Scalar s = std::sin(omega);
    const Vector<Scalar> mix = (std::sin((Scalar(1) - t) * omega) / s) * ua + (std::sin(t * omega) / s) * ub;
    return radius * mix.normalized();
}

// Point invariant: on the sphere the norm matches the radius within 1e-9 relative.
template <typename DX>
bool on_space(const AmbientSpace& space, const Eigen::MatrixBase<DX>& x, double rel_tol = 1e-9) {
    if (x.size() != space.dim()) return false;
    if (!space.is_sphere()) return x.allFinite();
    return std::abs(static_cast<double>(x.norm()) - space.radius()) <= rel_tol * space.radius();
}

}  // namespace pdgeo
