#include "pdgeo/score_field.hpp"

#include <string>

namespace pdgeo {

ScoreField::ScoreField(const ScoreProvider& provider, std::optional<ConditioningSchedule> schedule,
                       ScoreScale scale, std::optional<double> provider_t)
    : provider_(&provider), schedule_(std::move(schedule)), scale_(scale), provider_t_(provider_t) {
    const auto cond_dim = provider.cond_dim();
    if (cond_dim && !schedule_)
        throw ConfigError("conditional provider requires a conditioning schedule");
    if (!cond_dim && schedule_)
        throw ConfigError("conditioning schedule given for an unconditional provider");
    if (cond_dim && schedule_->dim() != *cond_dim)
        throw ConfigError("conditioning schedule has dimension " + std::to_string(schedule_->dim()) +
                          ", provider expects " + std::to_string(*cond_dim));
}

ScoreField::Sample ScoreField::evaluate(const MatrixXd& points, const VectorXd& ts) const {
    if (ts.size() != points.cols()) throw ConfigError("score field: one parameter per point required");
    ScoreQuery query{points, std::nullopt, std::nullopt};
    if (schedule_) {
        MatrixXd cond(schedule_->dim(), points.cols());
        for (Eigen::Index j = 0; j < points.cols(); ++j) cond.col(j) = (*schedule_)(ts[j]);
        query.cond = std::move(cond);
    }
    if (provider_t_) query.t = VectorXd::Constant(points.cols(), *provider_t_);

    ScoreResult result = provider_->score(query);
    if (result.scores.rows() != points.rows() || result.scores.cols() != points.cols())
        throw ProviderError(ProviderError::Kind::DimensionMismatch, "score batch has the wrong shape");
    if (!result.scores.allFinite()) throw NumericalError("provider returned non-finite scores");

    Sample out{scale_.beta() * result.scores, std::nullopt};
    if (result.log_density) out.log_density = scale_.beta() * *result.log_density;
    return out;
}

std::pair<VectorXd, std::optional<double>> ScoreField::at(const VectorXd& x, double t) const {
    Sample s = evaluate(x, VectorXd::Constant(1, t));
    std::optional<double> log_p;
    if (s.log_density) log_p = (*s.log_density)[0];
    return {s.scores.col(0), log_p};
}

}  // namespace pdgeo
