#pragma once

#include <functional>
#include <optional>

#include "pdgeo/path.hpp"
#include "pdgeo/score_field.hpp"
#include "pdgeo/spline.hpp"

namespace pdgeo {

using SplineFit = NaturalCubicSpline<double>;

// Natural cubic spline through the path samples; supplies γ, γ̇, γ̈ on [0, 1].
SplineFit fit_spline(const DiscretePath& path);

// Exact: the functional derivative of the path length under the metric p⁻²I.
// Direction: the same vector without the positive factor 1/(p‖γ̇‖); usable
// with score-only providers.
enum class DerivativeMode { Exact, Direction };

// ConstantSpeed: the form that assumes ‖γ̇‖ is constant, so γ̈ enters unprojected
// and also acts on the parameterisation. General: both terms are projected
// orthogonally to γ̇. Auto picks ConstantSpeed on flat space and General on the
// sphere, where spline errors of great-circle samples would otherwise drift
// points along the arc.
enum class Parameterization { Auto, ConstantSpeed, General };

Parameterization resolve(Parameterization form, const AmbientSpace& space);

// Weighted-length functional derivative
//   w/‖v‖ · ( P_v ∇log w − a/‖v‖² )      (ConstantSpeed)
//   w/‖v‖ · P_v ( ∇log w − a/‖v‖² )      (General)
// with P_v = I - v̂v̂ᵀ.
VectorXd weighted_functional_derivative(const VectorXd& grad_log_weight, double weight, const VectorXd& velocity,
                                        const VectorXd& acceleration,
                                        Parameterization form = Parameterization::ConstantSpeed);

// δS/δγ for w = 1/p:  -1/(p‖v‖) · ( P_v s + a/‖v‖² ), or its Direction-mode
// counterpart -( P_v s + a/‖v‖² ). `log_p` is required in Exact mode.
VectorXd functional_derivative(const VectorXd& score, const VectorXd& velocity, const VectorXd& acceleration,
                               std::optional<double> log_p, DerivativeMode mode,
                               Parameterization form = Parameterization::ConstantSpeed);

// n + 1 equally spaced parameters i/n.
VectorXd quadrature_grid(int n);

// Cumulative composite rules on equally spaced samples f(0), ..., f(n) with
// spacing h; entry i approximates ∫₀^{t_i} f.
VectorXd cumulative_trapezoid(const VectorXd& f, double h);
// Even-indexed entries are composite Simpson; odd entries close the last
// interval with the three-point (5, 8, -1)/12 rule. Requires an even interval count.
VectorXd cumulative_simpson(const VectorXd& f, double h);

enum class QuadratureRule { Trapezoid, Simpson };

// Spline jets and field values at n + 1 uniform parameters; the common input of
// every analytic below. One batched provider request.
struct PathSamples {
    VectorXd t;
    MatrixXd position;
    MatrixXd velocity;
    MatrixXd acceleration;
    MatrixXd score;
    std::optional<VectorXd> log_density;
};

PathSamples sample_path(const DiscretePath& path, const ScoreField& field, int n);

// γ̈ + ‖γ̇‖² (I - v̂v̂ᵀ) ∇log p at n + 1 uniform parameters (columns).
MatrixXd el_residual(const DiscretePath& path, const ScoreField& field, int n);

// log p̃ₐ(γ(tᵢ)) by integrating γ̇ᵀ∇log p; entry 0 is exactly 0.
VectorXd relative_log_probability(const DiscretePath& path, const ScoreField& field, int n,
                                  QuadratureRule rule = QuadratureRule::Trapezoid);
VectorXd relative_log_probability(const PathSamples& samples, QuadratureRule rule = QuadratureRule::Trapezoid);

// Cumulative d̃ₐ(tᵢ) = ∫ ‖γ̇‖ / p̃ₐ(γ) by the trapezoid rule.
VectorXd relative_geodesic_distance(const DiscretePath& path, const ScoreField& field, int n,
                                    QuadratureRule rule = QuadratureRule::Trapezoid);
VectorXd relative_geodesic_distance(const PathSamples& samples, const VectorXd& rel_log_p);

// d(a, b) = d̃ₐ(b) / p(γ(a)).
double absolute_geodesic_distance(double relative_distance, double log_p_start);
double absolute_geodesic_distance(const DiscretePath& path, const ScoreField& field, int n,
                                  QuadratureRule rule = QuadratureRule::Trapezoid);

// Weight of a weighted path length. InverseDensity evaluates w = 1/p through a
// score field (requires log-density); Custom wraps user callables of (x, t).
class WeightFunction {
public:
    enum class Mode { InverseDensity, Custom };
    using WeightFn = std::function<double(const VectorXd&, double)>;
    using GradLogFn = std::function<VectorXd(const VectorXd&, double)>;

    static WeightFunction inverse_density(const ScoreField& field);
    static WeightFunction custom(WeightFn weight, GradLogFn grad_log_weight = {});
    static WeightFunction constant(double value);

    Mode mode() const { return mode_; }
    // Weights at the columns of `points` with parameters `ts`.
    VectorXd weights(const MatrixXd& points, const VectorXd& ts) const;
    // ∇log w at the columns of `points`.
    MatrixXd grad_log_weights(const MatrixXd& points, const VectorXd& ts) const;

private:
    Mode mode_ = Mode::Custom;
    const ScoreField* field_ = nullptr;
    WeightFn weight_;
    GradLogFn grad_log_weight_;
};

// S[γ] = ∫ ‖γ̇‖ w(γ) dt by the trapezoid rule on n intervals.
double path_length_weighted(const DiscretePath& path, const WeightFunction& weight, int n);

// Resamples to `samples` points equally spaced in arc length along the spline
// (uniform parameters). Endpoints are copied exactly; sphere samples are
// projected back to the sphere.
DiscretePath reparameterize_constant_speed(const DiscretePath& path, int samples);

// Functional derivative at n + 1 uniform parameters, projected to the sphere's
// tangent space on spherical paths (columns).
MatrixXd functional_derivative_profile(const DiscretePath& path, const ScoreField& field, int n,
                                       DerivativeMode mode, Parameterization form = Parameterization::Auto);

struct PathAnalytics {
    VectorXd t;
    VectorXd rel_log_p;
    VectorXd rel_distance;
    VectorXd grad_norm;
    std::optional<double> abs_distance;
    std::optional<double> log_p_start;
};

PathAnalytics compute_analytics(const DiscretePath& path, const ScoreField& field, int n,
                                QuadratureRule rule = QuadratureRule::Trapezoid,
                                DerivativeMode mode = DerivativeMode::Direction);

inline constexpr int kDefaultQuadratureIntervals = 1024;

}  // namespace pdgeo
