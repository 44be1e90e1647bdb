#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <string>
#include <vector>

#include "pdgeo/errors.hpp"
#include "pdgeo/geometry.hpp"

namespace pdgeo {

// Vector-valued natural cubic spline: one cubic per coordinate and knot interval,
// C2 across knots, zero second derivative at both boundary knots.
//
// Values are stored column-wise (dim x knots). With two knots the spline is the
// linear interpolant.
template <typename Scalar>
class NaturalCubicSpline {
public:
    struct Jet {
        Vector<Scalar> position;
        Vector<Scalar> velocity;
        Vector<Scalar> acceleration;
    };

    NaturalCubicSpline(Vector<Scalar> knots, Matrix<Scalar> values)
        : knots_(std::move(knots)), values_(std::move(values)) {
        const Eigen::Index n = knots_.size();
        if (n < 2) throw ConfigError("spline needs at least two knots");
        if (values_.cols() != n) throw ConfigError("spline knot/value count mismatch");
        for (Eigen::Index i = 1; i < n; ++i) {
            if (!(knots_[i] > knots_[i - 1]))
                throw ConfigError("spline knots must be strictly increasing (duplicate or unordered knot at index " +
                                  std::to_string(i) + ")");
        }
        solve_moments();
    }

    int dim() const { return static_cast<int>(values_.rows()); }
    const Vector<Scalar>& knots() const { return knots_; }
    const Matrix<Scalar>& values() const { return values_; }
    // Second derivatives at the knots.
    const Matrix<Scalar>& moments() const { return moments_; }

    Jet jet(Scalar t) const {
        const Eigen::Index i = segment(t);
        const Scalar h = knots_[i + 1] - knots_[i];
        const Scalar left = knots_[i + 1] - t;
        const Scalar right = t - knots_[i];
        const auto m0 = moments_.col(i);
        const auto m1 = moments_.col(i + 1);
        const auto y0 = values_.col(i);
        const auto y1 = values_.col(i + 1);
        Jet out;
        out.position = m0 * (left * left * left / (6 * h)) + m1 * (right * right * right / (6 * h)) +
                       (y0 / h - m0 * (h / 6)) * left + (y1 / h - m1 * (h / 6)) * right;
        out.velocity = -m0 * (left * left / (2 * h)) + m1 * (right * right / (2 * h)) + (y1 - y0) / h -
                       (m1 - m0) * (h / 6);
        out.acceleration = m0 * (left / h) + m1 * (right / h);
        return out;
    }

    Vector<Scalar> operator()(Scalar t) const { return jet(t).position; }
    Vector<Scalar> derivative(Scalar t) const { return jet(t).velocity; }
    Vector<Scalar> second_derivative(Scalar t) const { return jet(t).acceleration; }

private:
    Eigen::Index segment(Scalar t) const {
        const Eigen::Index n = knots_.size();
        const Scalar* begin = knots_.data();
        const Scalar* it = std::upper_bound(begin, begin + n, t);
        Eigen::Index i = static_cast<Eigen::Index>(it - begin) - 1;
        return std::clamp<Eigen::Index>(i, 0, n - 2);
    }

    // Thomas algorithm on the symmetric tridiagonal moment system, shared by all coordinates.
    void solve_moments() {
        const Eigen::Index n = knots_.size();
        moments_ = Matrix<Scalar>::Zero(values_.rows(), n);
        if (n < 3) return;
        const Eigen::Index m = n - 2;
        std::vector<Scalar> diag(m), upper(m);
        Matrix<Scalar> rhs(values_.rows(), m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::Index i = k + 1;
            const Scalar h0 = knots_[i] - knots_[i - 1];
            const Scalar h1 = knots_[i + 1] - knots_[i];
            diag[k] = 2 * (h0 + h1);
            upper[k] = h1;
            rhs.col(k) = 6 * ((values_.col(i + 1) - values_.col(i)) / h1 -
                              (values_.col(i) - values_.col(i - 1)) / h0);
        }
        for (Eigen::Index k = 1; k < m; ++k) {
            const Scalar lower = upper[k - 1];
            const Scalar w = lower / diag[k - 1];
            diag[k] -= w * upper[k - 1];
            rhs.col(k) -= w * rhs.col(k - 1);
        }
        moments_.col(m) = rhs.col(m - 1) / diag[m - 1];
        for (Eigen::Index k = m - 2; k >= 0; --k) {
            moments_.col(k + 1) = (rhs.col(k) - upper[k] * moments_.col(k + 2)) / diag[k];
        }
    }

    Vector<Scalar> knots_;
    Matrix<Scalar> values_;
    Matrix<Scalar> moments_;
};

}  // namespace pdgeo
