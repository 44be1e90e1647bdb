#pragma once

#include <exception>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdgeo/path.hpp"
#include "pdgeo/score_field.hpp"

namespace pdgeo {

struct IvpConfig {
    int steps = 200;
    ScoreScale beta;
    std::optional<double> provider_t;
    double speed = 1.0;
    int record_every = 1;

    void validate() const;
};

struct IvpState {
    VectorXd x;
    VectorXd v;
    double t = 0.0;
};

// γ̈ = -‖v‖² (I - x̂x̂ᵀ)(I - v̂v̂ᵀ) s(x, t); the sphere projector is dropped on flat space.
VectorXd ivp_rhs(const AmbientSpace& space, const IvpState& state, const ScoreField& field);
// The same acceleration for a precomputed score.
VectorXd ivp_acceleration(const AmbientSpace& space, const VectorXd& x, const VectorXd& v, const VectorXd& score);

// Tangent projection of `direction` at x rescaled to `speed`.
VectorXd init_velocity(const AmbientSpace& space, const VectorXd& x, const VectorXd& direction, double speed);

struct IvpResult {
    std::vector<IvpState> snapshots;  // every `record_every` steps plus the final state
    VectorXd t;                       // parameters reached, i/n
    MatrixXd points;                  // positions at those parameters
    std::vector<double> speeds;       // ‖v‖ at those parameters
    std::vector<double> accel_norms;  // ‖γ̈‖ at the start of each completed step
    std::optional<DiscretePath> path; // present when all steps completed
    std::exception_ptr error;

    bool ok() const { return !error; }
    double max_speed_drift() const;
};

// n classical RK4 steps of size 1/n on the coupled system (x, v). On the sphere the
// system carries the centripetal term -‖v‖²x/‖x‖², and after every step x is
// rescaled to the radius and v re-projected to the tangent space.
IvpResult solve_ivp(const AmbientSpace& space, const VectorXd& x0, const VectorXd& v0, const ScoreField& field,
                    const IvpConfig& config);
IvpResult solve_ivp(const AmbientSpace& space, const VectorXd& x0, const VectorXd& v0, const ScoreProvider& provider,
                    const std::optional<ConditioningSchedule>& schedule, const IvpConfig& config);

nlohmann::json ivp_summary(const IvpResult& result, const AmbientSpace& space);

}  // namespace pdgeo
