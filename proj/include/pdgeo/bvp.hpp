#pragma once

#include <exception>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pdgeo/pathcalc.hpp"

namespace pdgeo {

enum class LrSchedule { Linear, Constant };

struct BvpConfig {
    int steps = 400;
    double lr0 = 0.1;
    LrSchedule lr_schedule = LrSchedule::Linear;
    std::vector<int> bisection_levels{1, 3, 7, 15};
    int refine_every = 100;
    ScoreScale beta;
    std::optional<double> provider_t;
    DerivativeMode derivative_mode = DerivativeMode::Direction;
    Parameterization parameterization = Parameterization::Auto;
    int quad_n = kDefaultQuadratureIntervals;
    std::optional<double> convergence_tol;
    // 0: one snapshot at the end of each level; otherwise also every N iterations.
    int snapshot_every = 0;

    void validate() const;
    // lr0 (1 - i/steps) for 0-based iteration i, or lr0 when constant.
    double learning_rate(int iteration) const;
};

struct BvpTrace {
    struct Row {
        int iter;
        double lr;
        int k;
        double mean_grad_norm;
        double rel_distance;
    };
    struct Snapshot {
        int iter;
        int k;
        DiscretePath path;
    };

    double initial_rel_distance = 0.0;
    std::vector<Row> rows;
    std::vector<Snapshot> snapshots;
};

// `iter,lr,k,mean_grad_norm,rel_distance`, one row per iteration.
void write_trace_csv(std::ostream& out, const BvpTrace& trace);

// k interior points at parameters i/(k+1) along the segment or great-circle arc.
DiscretePath init_path(const AmbientSpace& space, const VectorXd& a, const VectorXd& b, int k);

// Inserts a midpoint between every pair of neighbours: k -> 2k + 1 interior points.
// Euclidean: the natural spline's midpoint, so the interpolated curve is unchanged.
// Sphere: the great-circle midpoint, which keeps every sample on the sphere.
DiscretePath bisect(const DiscretePath& path);

// Tangent-projected functional derivative at the interior samples (columns),
// with derivatives from the natural spline through all samples. One batched query.
MatrixXd bvp_gradient(const DiscretePath& path, const ScoreField& field, DerivativeMode mode,
                      Parameterization form = Parameterization::Auto);

// One simultaneous update of every interior point; endpoints are copied.
DiscretePath bvp_step(const DiscretePath& path, const ScoreField& field, const BvpConfig& config, double lr);

struct BvpResult {
    DiscretePath initial;
    DiscretePath path;
    BvpTrace trace;
    // Set when the solve stopped early on a provider or numerical failure;
    // `path` and `trace` then hold the last completed iteration.
    std::exception_ptr error;

    bool ok() const { return !error; }
};

// Coarse-to-fine projected gradient descent between fixed endpoints. The field's
// own score scale is used; `config.beta` is applied by the overload below.
BvpResult solve_bvp(const AmbientSpace& space, const VectorXd& a, const VectorXd& b, const ScoreField& field,
                    const BvpConfig& config);
BvpResult solve_bvp(const AmbientSpace& space, const VectorXd& a, const VectorXd& b, const ScoreProvider& provider,
                    const std::optional<ConditioningSchedule>& schedule, const BvpConfig& config);

}  // namespace pdgeo
