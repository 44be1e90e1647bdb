#include "pdgeo/bvp.hpp"

#include <ostream>
#include <string>

#include "pdgeo/io.hpp"
#include "pdgeo/pathcalc.hpp"

namespace pdgeo {

void BvpConfig::validate() const {
    if (steps < 1) throw ConfigError("bvp.steps must be positive");
    if (!(lr0 > 0.0)) throw ConfigError("bvp.lr0 must be positive");
    if (bisection_levels.empty()) throw ConfigError("bvp.levels must not be empty");
    if (bisection_levels.front() < 1) throw ConfigError("bvp.levels must start with at least one control point");
    for (std::size_t i = 1; i < bisection_levels.size(); ++i) {
        if (bisection_levels[i] != 2 * bisection_levels[i - 1] + 1)
            throw ConfigError("bvp.levels: each level must hold 2k + 1 points of the previous (" +
                              std::to_string(bisection_levels[i]) + " after " +
                              std::to_string(bisection_levels[i - 1]) + ")");
    }
    if (refine_every < 1) throw ConfigError("bvp.refine_every must be positive");
    if (steps < refine_every * static_cast<int>(bisection_levels.size() - 1))
        throw ConfigError("bvp.steps is too small to visit every level");
    if (quad_n < 2) throw ConfigError("analytics quadrature needs at least two intervals");
    if (convergence_tol && !(*convergence_tol > 0.0)) throw ConfigError("bvp.convergence_tol must be positive");
    if (snapshot_every < 0) throw ConfigError("bvp.snapshot_every must be non-negative");
}

double BvpConfig::learning_rate(int iteration) const {
    if (lr_schedule == LrSchedule::Constant) return lr0;
    return lr0 * (1.0 - static_cast<double>(iteration) / steps);
}

void write_trace_csv(std::ostream& out, const BvpTrace& trace) {
    out << "iter,lr,k,mean_grad_norm,rel_distance\n";
    for (const auto& r : trace.rows) {
        out << r.iter << ',' << format_double(r.lr) << ',' << r.k << ',' << format_double(r.mean_grad_norm) << ','
            << format_double(r.rel_distance) << '\n';
    }
}

DiscretePath init_path(const AmbientSpace& space, const VectorXd& a, const VectorXd& b, int k) {
    if (k < 0) throw ConfigError("control-point count must be non-negative");
    if (a.size() != space.dim() || b.size() != space.dim())
        throw ConfigError("endpoint dimension does not match the space (" + std::to_string(space.dim()) + ")");
    if (a == b) throw ConfigError("endpoints coincide");
    MatrixXd points(space.dim(), k + 2);
    points.col(0) = a;
    points.col(k + 1) = b;
    for (int i = 1; i <= k; ++i) points.col(i) = geodesic_interpolate(space, a, b, static_cast<double>(i) / (k + 1));
    return DiscretePath::uniform(space, std::move(points));
}

DiscretePath bisect(const DiscretePath& path) {
    const AmbientSpace& space = path.space();
    std::optional<SplineFit> spline;
    if (!space.is_sphere()) spline = fit_spline(path);
    const Eigen::Index n = path.size();
    VectorXd t(2 * n - 1);
    MatrixXd points(path.dim(), 2 * n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        t[2 * i] = path.t()[i];
        points.col(2 * i) = path.points().col(i);
        if (i + 1 < n) {
            t[2 * i + 1] = 0.5 * (path.t()[i] + path.t()[i + 1]);
            points.col(2 * i + 1) = spline ? (*spline)(t[2 * i + 1])
                                           : geodesic_interpolate(space, path.points().col(i),
                                                                  path.points().col(i + 1), 0.5);
        }
    }
    return DiscretePath(space, std::move(t), std::move(points));
}

MatrixXd bvp_gradient(const DiscretePath& path, const ScoreField& field, DerivativeMode mode,
                      Parameterization form) {
    const Eigen::Index k = path.interior_count();
    if (k == 0) return MatrixXd(path.dim(), 0);
    if (field.dim() != path.dim()) throw ConfigError("provider dimension does not match the path");
    if (mode == DerivativeMode::Exact && !field.has_log_density())
        throw ProviderError(ProviderError::Kind::Capability, "exact functional derivative needs log-density");

    const SplineFit spline = fit_spline(path);
    const Parameterization resolved = resolve(form, path.space());
    const MatrixXd interior = path.points().middleCols(1, k);
    const VectorXd ts = path.t().segment(1, k);
    const ScoreField::Sample sample = field.evaluate(interior, ts);

    MatrixXd g(path.dim(), k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto jet = spline.jet(ts[i]);
        const VectorXd x = interior.col(i);
        const VectorXd v = project_to_tangent(path.space(), x, jet.velocity);
        std::optional<double> log_p;
        if (sample.log_density) log_p = (*sample.log_density)[i];
        const VectorXd d = functional_derivative(sample.scores.col(i), v, jet.acceleration, log_p, mode, resolved);
        g.col(i) = project_to_tangent(path.space(), x, d);
    }
    return g;
}

namespace {

DiscretePath apply_step(const DiscretePath& path, const MatrixXd& g, double lr) {
    MatrixXd points = path.points();
    for (Eigen::Index i = 0; i < g.cols(); ++i)
        points.col(i + 1) = retract(path.space(), path.points().col(i + 1), VectorXd(lr * g.col(i)));
    return path.with_points(std::move(points));
}

double mean_column_norm(const MatrixXd& g) {
    if (g.cols() == 0) return 0.0;
    return g.colwise().norm().mean();
}

double end_distance(const DiscretePath& path, const ScoreField& field, int n) {
    const VectorXd d = relative_geodesic_distance(path, field, n);
    return d[d.size() - 1];
}

}  // namespace

DiscretePath bvp_step(const DiscretePath& path, const ScoreField& field, const BvpConfig& config, double lr) {
    if (lr == 0.0) return path;
    return apply_step(path, bvp_gradient(path, field, config.derivative_mode, config.parameterization), lr);
}

BvpResult solve_bvp(const AmbientSpace& space, const VectorXd& a, const VectorXd& b, const ScoreField& field,
                    const BvpConfig& config) {
    config.validate();
    if (field.dim() != space.dim())
        throw ConfigError("provider dimension " + std::to_string(field.dim()) + " does not match endpoint dimension " +
                          std::to_string(space.dim()));
    if (config.derivative_mode == DerivativeMode::Exact && !field.has_log_density())
        throw ProviderError(ProviderError::Kind::Capability, "exact functional derivative needs log-density");

    VectorXd end = b;
    if (space.is_sphere() && !on_space(space, end)) {
        // The sphere is fixed by the start point; the end point may sit within 1% of it.
        end *= space.radius() / end.norm();
    }
    DiscretePath initial = init_path(space, a, end, config.bisection_levels.front());
    BvpResult result{initial, initial, {}, nullptr};
    BvpTrace& trace = result.trace;

    const int last_level = static_cast<int>(config.bisection_levels.size()) - 1;
    int level = 0;
    int level_start = 0;
    try {
        trace.initial_rel_distance = end_distance(initial, field, config.quad_n);
        for (int i = 0; i < config.steps; ++i) {
            if (level < last_level && i - level_start >= config.refine_every) {
                if (config.snapshot_every == 0) trace.snapshots.push_back({i, config.bisection_levels[level], result.path});
                result.path = bisect(result.path);
                ++level;
                level_start = i;
            }
            const double lr = config.learning_rate(i);
            const MatrixXd g = bvp_gradient(result.path, field, config.derivative_mode, config.parameterization);
            const double mean_norm = mean_column_norm(g);
            DiscretePath next = apply_step(result.path, g, lr);
            const double distance = end_distance(next, field, config.quad_n);
            result.path = std::move(next);
            trace.rows.push_back({i + 1, lr, config.bisection_levels[level], mean_norm, distance});
            if (config.snapshot_every > 0 && (i + 1) % config.snapshot_every == 0)
                trace.snapshots.push_back({i + 1, config.bisection_levels[level], result.path});

            if (config.convergence_tol && mean_norm < *config.convergence_tol) {
                if (level == last_level) break;
                level_start = i + 1 - config.refine_every;
            }
        }
        if (config.snapshot_every == 0)
            trace.snapshots.push_back({trace.rows.empty() ? 0 : trace.rows.back().iter, config.bisection_levels[level],
                                       result.path});
    } catch (const ProviderError&) {
        result.error = std::current_exception();
    } catch (const NumericalError&) {
        result.error = std::current_exception();
    }
    return result;
}

BvpResult solve_bvp(const AmbientSpace& space, const VectorXd& a, const VectorXd& b, const ScoreProvider& provider,
                    const std::optional<ConditioningSchedule>& schedule, const BvpConfig& config) {
    const ScoreField field(provider, schedule, config.beta, config.provider_t);
    return solve_bvp(space, a, b, field, config);
}

}  // namespace pdgeo
