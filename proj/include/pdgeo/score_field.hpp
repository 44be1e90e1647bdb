#pragma once

#include <optional>

#include "pdgeo/density.hpp"

namespace pdgeo {

// A provider bound to the conditioning schedule, the score scale β, and the
// opaque per-query parameter forwarded to external providers. Every solver and
// analytic talks to densities through this view.
//
// The effective density is p^β: scores and log-densities are both scaled by β.
class ScoreField {
public:
    struct Sample {
        MatrixXd scores;
        std::optional<VectorXd> log_density;
    };

    explicit ScoreField(const ScoreProvider& provider,
                        std::optional<ConditioningSchedule> schedule = std::nullopt,
                        ScoreScale scale = ScoreScale(), std::optional<double> provider_t = std::nullopt);

    const ScoreProvider& provider() const { return *provider_; }
    const std::optional<ConditioningSchedule>& schedule() const { return schedule_; }
    double beta() const { return scale_.beta(); }
    int dim() const { return provider_->dim(); }
    bool has_log_density() const { return provider_->has_log_density(); }

    // One batched provider request: column j of `points` is evaluated with the
    // condition ζ(ts[j]).
    Sample evaluate(const MatrixXd& points, const VectorXd& ts) const;

    // Convenience single-point query.
    std::pair<VectorXd, std::optional<double>> at(const VectorXd& x, double t) const;

private:
    const ScoreProvider* provider_;
    std::optional<ConditioningSchedule> schedule_;
    ScoreScale scale_;
    std::optional<double> provider_t_;
};

}  // namespace pdgeo
