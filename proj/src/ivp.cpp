#include "pdgeo/ivp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdgeo/io.hpp"

namespace pdgeo {

void IvpConfig::validate() const {
    if (steps < 1) throw ConfigError("ivp.steps must be positive");
    if (!(speed > 0.0)) throw ConfigError("ivp.speed must be positive");
    if (record_every < 1) throw ConfigError("ivp.record_every must be positive");
}

VectorXd ivp_acceleration(const AmbientSpace& space, const VectorXd& x, const VectorXd& v, const VectorXd& score) {
    const double speed = v.norm();
    if (!(speed > 0.0)) throw DegenerateError("zero velocity in the geodesic equation");
    const VectorXd unit = v / speed;
    const VectorXd across = score - unit * unit.dot(score);
    return -(speed * speed) * project_to_tangent(space, x, across);
}

VectorXd ivp_rhs(const AmbientSpace& space, const IvpState& state, const ScoreField& field) {
    return ivp_acceleration(space, state.x, state.v, field.at(state.x, state.t).first);
}

VectorXd init_velocity(const AmbientSpace& space, const VectorXd& x, const VectorXd& direction, double speed) {
    if (!(speed > 0.0)) throw ConfigError("initial speed must be positive");
    const VectorXd v = project_to_tangent(space, x, direction);
    const double norm = v.norm();
    if (!(norm > 1e-12 * std::max(1.0, direction.norm())))
        throw ConfigError("initial direction vanishes after projection to the tangent space");
    return v * (speed / norm);
}

double IvpResult::max_speed_drift() const {
    if (speeds.empty()) return 0.0;
    double worst = 0.0;
    for (double s : speeds) worst = std::max(worst, std::abs(s - speeds.front()) / speeds.front());
    return worst;
}

namespace {

struct Derivative {
    VectorXd dx;
    VectorXd dv;
};

Derivative system(const AmbientSpace& space, const VectorXd& x, const VectorXd& v, double t, const ScoreField& field,
                  double* accel_norm = nullptr) {
    const VectorXd a = ivp_acceleration(space, x, v, field.at(x, t).first);
    if (accel_norm) *accel_norm = a.norm();
    Derivative d{v, a};
    if (space.is_sphere()) d.dv -= (v.squaredNorm() / x.squaredNorm()) * x;
    return d;
}

}  // namespace

IvpResult solve_ivp(const AmbientSpace& space, const VectorXd& x0, const VectorXd& v0, const ScoreField& field,
                    const IvpConfig& config) {
    config.validate();
    if (x0.size() != space.dim() || v0.size() != space.dim())
        throw ConfigError("initial state dimension does not match the space");
    if (field.dim() != space.dim()) throw ConfigError("provider dimension does not match the initial state");
    if (!on_space(space, x0)) throw DomainError("start point is off the sphere");
    if (!(v0.norm() > 0.0)) throw ConfigError("initial velocity is zero");
    if (space.is_sphere() && std::abs(v0.dot(x0)) > 1e-6 * v0.norm() * x0.norm())
        throw ConfigError("initial velocity is not tangent to the sphere");

    const int n = config.steps;
    const double h = 1.0 / n;
    IvpResult result;
    result.t.resize(n + 1);
    result.points.resize(space.dim(), n + 1);

    VectorXd x = x0;
    VectorXd v = project_to_tangent(space, x0, v0);
    int done = 0;
    auto record = [&](int i) {
        result.t[i] = i == n ? 1.0 : i * h;
        result.points.col(i) = x;
        result.speeds.push_back(v.norm());
        if (i % config.record_every == 0 || i == n) result.snapshots.push_back({x, v, result.t[i]});
    };
    record(0);
    try {
        for (int i = 0; i < n; ++i) {
            const double t = i * h;
            double accel = 0.0;
            const Derivative k1 = system(space, x, v, t, field, &accel);
            const Derivative k2 = system(space, x + 0.5 * h * k1.dx, v + 0.5 * h * k1.dv, t + 0.5 * h, field);
            const Derivative k3 = system(space, x + 0.5 * h * k2.dx, v + 0.5 * h * k2.dv, t + 0.5 * h, field);
            const Derivative k4 = system(space, x + h * k3.dx, v + h * k3.dv, t + h, field);
            VectorXd x_next = x + (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
            VectorXd v_next = v + (h / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
            if (space.is_sphere()) {
                x_next *= space.radius() / x_next.norm();
                v_next = project_to_tangent(space, x_next, v_next);
            }
            if (!x_next.allFinite() || !v_next.allFinite()) throw NumericalError("integration diverged");
            x = std::move(x_next);
            v = std::move(v_next);
            result.accel_norms.push_back(accel);
            record(i + 1);
            done = i + 1;
        }
        result.path = DiscretePath(space, result.t, result.points);
    } catch (const ProviderError&) {
        result.error = std::current_exception();
    } catch (const NumericalError&) {
        result.error = std::current_exception();
    }
    if (!result.path) {
        result.t.conservativeResize(done + 1);
        result.points.conservativeResize(Eigen::NoChange, done + 1);
    }
    return result;
}

IvpResult solve_ivp(const AmbientSpace& space, const VectorXd& x0, const VectorXd& v0, const ScoreProvider& provider,
                    const std::optional<ConditioningSchedule>& schedule, const IvpConfig& config) {
    const ScoreField field(provider, schedule, config.beta, config.provider_t);
    return solve_ivp(space, x0, v0, field, config);
}

nlohmann::json ivp_summary(const IvpResult& result, const AmbientSpace& space) {
    const Eigen::Index last = result.points.cols() - 1;
    nlohmann::json out;
    out["complete"] = static_cast<bool>(result.path);
    out["steps_completed"] = last;
    out["space"] = to_string(space.kind());
    if (space.is_sphere()) out["radius"] = space.radius();
    out["start"] = vector_to_json(result.points.col(0));
    out["endpoint"] = vector_to_json(result.points.col(last));
    out["speed_initial"] = result.speeds.front();
    out["speed_final"] = result.speeds.back();
    out["max_relative_speed_drift"] = result.max_speed_drift();
    out["accel_norms"] = result.accel_norms;
    return out;
}

}  // namespace pdgeo
