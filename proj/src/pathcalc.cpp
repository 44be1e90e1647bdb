#include "pdgeo/pathcalc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace pdgeo {

SplineFit fit_spline(const DiscretePath& path) { return SplineFit(path.t(), path.points()); }

Parameterization resolve(Parameterization form, const AmbientSpace& space) {
    if (form != Parameterization::Auto) return form;
    return space.is_sphere() ? Parameterization::General : Parameterization::ConstantSpeed;
}

namespace {

constexpr double kMinSpeed = 1e-300;

double checked_speed(const VectorXd& velocity) {
    const double speed = velocity.norm();
    if (!(speed > kMinSpeed)) throw DegenerateError("zero velocity: path parameterisation is degenerate");
    return speed;
}

VectorXd project_off(const VectorXd& v, const VectorXd& unit) { return v - unit * unit.dot(v); }

}  // namespace

VectorXd weighted_functional_derivative(const VectorXd& grad_log_weight, double weight, const VectorXd& velocity,
                                        const VectorXd& acceleration, Parameterization form) {
    const double speed = checked_speed(velocity);
    const VectorXd unit = velocity / speed;
    const VectorXd curvature = acceleration / (speed * speed);
    VectorXd bracket = form == Parameterization::General
                           ? project_off(grad_log_weight - curvature, unit)
                           : VectorXd(project_off(grad_log_weight, unit) - curvature);
    return (weight / speed) * bracket;
}

VectorXd functional_derivative(const VectorXd& score, const VectorXd& velocity, const VectorXd& acceleration,
                               std::optional<double> log_p, DerivativeMode mode, Parameterization form) {
    const double speed = checked_speed(velocity);
    const VectorXd unit = velocity / speed;
    const VectorXd curvature = acceleration / (speed * speed);
    VectorXd bracket = form == Parameterization::General ? project_off(score + curvature, unit)
                                                         : VectorXd(project_off(score, unit) + curvature);
    if (mode == DerivativeMode::Direction) return -bracket;
    if (!log_p)
        throw ProviderError(ProviderError::Kind::Capability, "exact functional derivative needs log-density");
    return -(std::exp(-*log_p) / speed) * bracket;
}

VectorXd quadrature_grid(int n) {
    if (n < 1) throw ConfigError("quadrature needs at least one interval");
    VectorXd t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = static_cast<double>(i) / n;
    return t;
}

VectorXd cumulative_trapezoid(const VectorXd& f, double h) {
    VectorXd out = VectorXd::Zero(f.size());
    for (Eigen::Index i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
}

VectorXd cumulative_simpson(const VectorXd& f, double h) {
    const Eigen::Index n = f.size() - 1;
    if (n < 2 || n % 2 != 0) throw ConfigError("Simpson's rule needs an even number of intervals");
    VectorXd out = VectorXd::Zero(f.size());
    for (Eigen::Index i = 2; i <= n; i += 2) out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    for (Eigen::Index i = 1; i < n; i += 2)
        out[i] = out[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
    return out;
}

PathSamples sample_path(const DiscretePath& path, const ScoreField& field, int n) {
    if (field.dim() != path.dim())
        throw ConfigError("provider dimension " + std::to_string(field.dim()) + " does not match path dimension " +
                          std::to_string(path.dim()));
    const SplineFit spline = fit_spline(path);
    PathSamples s;
    s.t = quadrature_grid(n);
    s.position.resize(path.dim(), n + 1);
    s.velocity.resize(path.dim(), n + 1);
    s.acceleration.resize(path.dim(), n + 1);
    for (int i = 0; i <= n; ++i) {
        auto jet = spline.jet(s.t[i]);
        s.position.col(i) = jet.position;
        s.velocity.col(i) = jet.velocity;
        s.acceleration.col(i) = jet.acceleration;
    }
    // The spline reproduces the knots only to rounding; pin the endpoints.
    s.position.col(0) = path.start();
    s.position.col(n) = path.end();
    ScoreField::Sample eval = field.evaluate(s.position, s.t);
    s.score = std::move(eval.scores);
    s.log_density = std::move(eval.log_density);
    return s;
}

MatrixXd el_residual(const DiscretePath& path, const ScoreField& field, int n) {
    const PathSamples s = sample_path(path, field, n);
    MatrixXd out(path.dim(), n + 1);
    for (int i = 0; i <= n; ++i) {
        const VectorXd v = s.velocity.col(i);
        const double speed = checked_speed(v);
        out.col(i) = s.acceleration.col(i) + speed * speed * project_off(s.score.col(i), v / speed);
    }
    return out;
}

VectorXd relative_log_probability(const PathSamples& s, QuadratureRule rule) {
    const Eigen::Index count = s.t.size();
    VectorXd integrand(count);
    for (Eigen::Index i = 0; i < count; ++i) integrand[i] = s.velocity.col(i).dot(s.score.col(i));
    const double h = 1.0 / static_cast<double>(count - 1);
    return rule == QuadratureRule::Simpson ? cumulative_simpson(integrand, h) : cumulative_trapezoid(integrand, h);
}

VectorXd relative_log_probability(const DiscretePath& path, const ScoreField& field, int n, QuadratureRule rule) {
    if (rule == QuadratureRule::Simpson && n % 2 != 0)
        throw ConfigError("Simpson's rule needs an even number of intervals");
    return relative_log_probability(sample_path(path, field, n), rule);
}

VectorXd relative_geodesic_distance(const PathSamples& s, const VectorXd& rel_log_p) {
    const Eigen::Index count = s.t.size();
    VectorXd integrand(count);
    for (Eigen::Index i = 0; i < count; ++i) integrand[i] = s.velocity.col(i).norm() * std::exp(-rel_log_p[i]);
    return cumulative_trapezoid(integrand, 1.0 / static_cast<double>(count - 1));
}

VectorXd relative_geodesic_distance(const DiscretePath& path, const ScoreField& field, int n, QuadratureRule rule) {
    if (rule == QuadratureRule::Simpson && n % 2 != 0)
        throw ConfigError("Simpson's rule needs an even number of intervals");
    const PathSamples s = sample_path(path, field, n);
    return relative_geodesic_distance(s, relative_log_probability(s, rule));
}

double absolute_geodesic_distance(double relative_distance, double log_p_start) {
    return relative_distance * std::exp(-log_p_start);
}

double absolute_geodesic_distance(const DiscretePath& path, const ScoreField& field, int n, QuadratureRule rule) {
    if (!field.has_log_density())
        throw ProviderError(ProviderError::Kind::Capability, "absolute distance needs log-density");
    const PathSamples s = sample_path(path, field, n);
    const VectorXd rel = relative_geodesic_distance(s, relative_log_probability(s, rule));
    return absolute_geodesic_distance(rel[rel.size() - 1], (*s.log_density)[0]);
}

// ---------------------------------------------------------------------------

WeightFunction WeightFunction::inverse_density(const ScoreField& field) {
    if (!field.has_log_density())
        throw ProviderError(ProviderError::Kind::Capability, "inverse-density weight needs log-density");
    WeightFunction w;
    w.mode_ = Mode::InverseDensity;
    w.field_ = &field;
    return w;
}

WeightFunction WeightFunction::custom(WeightFn weight, GradLogFn grad_log_weight) {
    if (!weight) throw ConfigError("custom weight function is empty");
    WeightFunction w;
    w.mode_ = Mode::Custom;
    w.weight_ = std::move(weight);
    w.grad_log_weight_ = std::move(grad_log_weight);
    return w;
}

WeightFunction WeightFunction::constant(double value) {
    return custom([value](const VectorXd&, double) { return value; },
                  [](const VectorXd& x, double) { return VectorXd::Zero(x.size()).eval(); });
}

VectorXd WeightFunction::weights(const MatrixXd& points, const VectorXd& ts) const {
    VectorXd w(points.cols());
    if (mode_ == Mode::InverseDensity) {
        const auto eval = field_->evaluate(points, ts);
        if (!eval.log_density)
            throw ProviderError(ProviderError::Kind::Capability, "provider returned no log-density");
        w = (-eval.log_density->array()).exp().matrix();
    } else {
        for (Eigen::Index j = 0; j < points.cols(); ++j) w[j] = weight_(points.col(j), ts[j]);
    }
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (!(w[j] > 0.0)) throw DomainError("weight function is not positive at sample " + std::to_string(j));
    }
    return w;
}

MatrixXd WeightFunction::grad_log_weights(const MatrixXd& points, const VectorXd& ts) const {
    if (mode_ == Mode::InverseDensity) return -field_->evaluate(points, ts).scores;
    if (!grad_log_weight_) throw ConfigError("custom weight has no log-gradient");
    MatrixXd out(points.rows(), points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) out.col(j) = grad_log_weight_(points.col(j), ts[j]);
    return out;
}

double path_length_weighted(const DiscretePath& path, const WeightFunction& weight, int n) {
    const SplineFit spline = fit_spline(path);
    const VectorXd t = quadrature_grid(n);
    MatrixXd positions(path.dim(), n + 1);
    VectorXd speed(n + 1);
    for (int i = 0; i <= n; ++i) {
        auto jet = spline.jet(t[i]);
        positions.col(i) = jet.position;
        speed[i] = jet.velocity.norm();
    }
    positions.col(0) = path.start();
    positions.col(n) = path.end();
    const VectorXd w = weight.weights(positions, t);
    const VectorXd integrand = speed.cwiseProduct(w);
    const VectorXd cumulative = cumulative_trapezoid(integrand, 1.0 / n);
    return cumulative[n];
}

// ---------------------------------------------------------------------------

namespace {

// Five-point Gauss-Legendre arc length of the spline over [a, b].
double arc_length(const SplineFit& spline, double a, double b) {
    static constexpr std::array<double, 5> nodes = {0.0, -0.5384693101056831, 0.5384693101056831,
                                                    -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> weights = {0.5688888888888889, 0.4786286704993665,
                                                      0.4786286704993665, 0.2369268850561891,
                                                      0.2369268850561891};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * spline.derivative(mid + half * nodes[k]).norm();
    return half * sum;
}

}  // namespace

DiscretePath reparameterize_constant_speed(const DiscretePath& path, int samples) {
    if (samples < 2) throw ConfigError("constant-speed resampling needs at least two samples");
    const SplineFit spline = fit_spline(path);

    const int cells = std::max<int>(2048, 64 * static_cast<int>(path.size() - 1));
    VectorXd grid(cells + 1);
    VectorXd cumulative(cells + 1);
    grid[0] = 0.0;
    cumulative[0] = 0.0;
    for (int i = 1; i <= cells; ++i) {
        grid[i] = static_cast<double>(i) / cells;
        cumulative[i] = cumulative[i - 1] + arc_length(spline, grid[i - 1], grid[i]);
    }
    const double total = cumulative[cells];
    if (!(total > 0.0)) throw DegenerateError("cannot reparameterise a zero-length path");

    MatrixXd points(path.dim(), samples);
    points.col(0) = path.start();
    points.col(samples - 1) = path.end();
    for (int j = 1; j < samples - 1; ++j) {
        const double target = total * j / (samples - 1);
        const auto it = std::upper_bound(cumulative.data(), cumulative.data() + cells + 1, target);
        const int cell = std::clamp(static_cast<int>(it - cumulative.data()) - 1, 0, cells - 1);
        const double span = cumulative[cell + 1] - cumulative[cell];
        double t = grid[cell] + (span > 0.0 ? (target - cumulative[cell]) / span : 0.0) / cells;
        for (int iter = 0; iter < 4; ++iter) {
            const double speed = spline.derivative(t).norm();
            if (!(speed > 0.0)) break;
            const double error = cumulative[cell] + arc_length(spline, grid[cell], t) - target;
            t = std::clamp(t - error / speed, grid[cell], grid[cell + 1]);
        }
        VectorXd x = spline(t);
        if (path.space().is_sphere()) x *= path.space().radius() / x.norm();
        points.col(j) = x;
    }
    return DiscretePath::uniform(path.space(), std::move(points));
}

// ---------------------------------------------------------------------------

namespace {

MatrixXd derivatives_from_samples(const PathSamples& s, const AmbientSpace& space, DerivativeMode mode,
                                  Parameterization form) {
    const Parameterization resolved = resolve(form, space);
    if (mode == DerivativeMode::Exact && !s.log_density)
        throw ProviderError(ProviderError::Kind::Capability, "exact functional derivative needs log-density");
    MatrixXd out(s.position.rows(), s.t.size());
    for (Eigen::Index i = 0; i < s.t.size(); ++i) {
        const VectorXd x = s.position.col(i);
        const VectorXd v = project_to_tangent(space, x, VectorXd(s.velocity.col(i)));
        std::optional<double> log_p;
        if (s.log_density) log_p = (*s.log_density)[i];
        const VectorXd g =
            functional_derivative(s.score.col(i), v, s.acceleration.col(i), log_p, mode, resolved);
        out.col(i) = project_to_tangent(space, x, g);
    }
    return out;
}

}  // namespace

MatrixXd functional_derivative_profile(const DiscretePath& path, const ScoreField& field, int n, DerivativeMode mode,
                                       Parameterization form) {
    return derivatives_from_samples(sample_path(path, field, n), path.space(), mode, form);
}

PathAnalytics compute_analytics(const DiscretePath& path, const ScoreField& field, int n, QuadratureRule rule,
                                DerivativeMode mode) {
    if (rule == QuadratureRule::Simpson && n % 2 != 0)
        throw ConfigError("Simpson's rule needs an even number of intervals");
    const PathSamples s = sample_path(path, field, n);
    PathAnalytics out;
    out.t = s.t;
    out.rel_log_p = relative_log_probability(s, rule);
    out.rel_distance = relative_geodesic_distance(s, out.rel_log_p);
    out.grad_norm = derivatives_from_samples(s, path.space(), mode, Parameterization::Auto).colwise().norm().transpose();
    if (s.log_density) {
        out.log_p_start = (*s.log_density)[0];
        out.abs_distance = absolute_geodesic_distance(out.rel_distance[n], *out.log_p_start);
    }
    return out;
}

}  // namespace pdgeo
