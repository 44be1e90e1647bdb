#include "pdgeo/density.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace pdgeo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

std::string dims(Eigen::Index got, Eigen::Index want) {
    return std::to_string(got) + " vs " + std::to_string(want);
}

}  // namespace

void ScoreQuery::validate() const {
    if (cond && cond->cols() != points.cols())
        throw ConfigError("condition batch length does not match point batch (" +
                          dims(cond->cols(), points.cols()) + ")");
    if (t && t->size() != points.cols())
        throw ConfigError("t batch length does not match point batch (" +
                          dims(t->size(), points.cols()) + ")");
}

void ScoreProvider::check_query(const ScoreQuery& query) const {
    query.validate();
    if (query.dim() != dim())
        throw ConfigError("query dimension mismatch (" + dims(query.dim(), dim()) + ")");
    if (cond_dim()) {
        if (!query.cond) throw ConfigError("conditional provider queried without conditions");
        if (query.cond->rows() != *cond_dim())
            throw ConfigError("condition dimension mismatch (" + dims(query.cond->rows(), *cond_dim()) + ")");
    }
}

// ---------------------------------------------------------------------------

UniformDensity::UniformDensity(int dim) : dim_(dim) {
    if (dim < 1) throw ConfigError("uniform density needs a positive dimension");
}

ScoreResult UniformDensity::score(const ScoreQuery& query) const {
    check_query(query);
    return {MatrixXd::Zero(dim_, query.size()), VectorXd::Zero(query.size())};
}

// ---------------------------------------------------------------------------

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<VectorXd> means,
                                 std::vector<MatrixXd> covariances) {
    if (weights.empty()) throw ConfigError("mixture needs at least one component");
    if (means.size() != weights.size() || covariances.size() != weights.size())
        throw ConfigError("mixture weights, means and covariances differ in length");
    dim_ = static_cast<int>(means.front().size());
    if (dim_ < 1) throw ConfigError("mixture dimension must be positive");

    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw ConfigError("mixture weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");

    components_.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (means[i].size() != dim_ || covariances[i].rows() != dim_ || covariances[i].cols() != dim_)
            throw ConfigError("mixture component " + std::to_string(i) + " has inconsistent dimension");
        if (!covariances[i].isApprox(covariances[i].transpose(), 1e-12))
            throw ConfigError("covariance " + std::to_string(i) + " is not symmetric");
        Eigen::LLT<MatrixXd> llt(covariances[i]);
        if (llt.info() != Eigen::Success)
            throw ConfigError("covariance " + std::to_string(i) + " is not positive definite");
        const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const double log_norm = std::log(weights[i]) - 0.5 * (dim_ * kLog2Pi + log_det);
        components_.push_back({weights[i], std::move(means[i]), std::move(covariances[i]),
                               std::move(llt), log_norm});
    }
}

GaussianMixture GaussianMixture::diagonal(std::vector<double> weights, std::vector<VectorXd> means,
                                          const std::vector<VectorXd>& variances) {
    std::vector<MatrixXd> covs;
    covs.reserve(variances.size());
    for (const auto& v : variances) {
        if ((v.array() <= 0.0).any()) throw ConfigError("diagonal variances must be positive");
        covs.push_back(v.asDiagonal());
    }
    return GaussianMixture(std::move(weights), std::move(means), std::move(covs));
}

GaussianMixture GaussianMixture::isotropic(std::vector<double> weights, std::vector<VectorXd> means,
                                           double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("isotropic sigma must be positive");
    std::vector<MatrixXd> covs;
    for (const auto& m : means)
        covs.push_back(MatrixXd::Identity(m.size(), m.size()) * (sigma * sigma));
    return GaussianMixture(std::move(weights), std::move(means), std::move(covs));
}

std::pair<double, VectorXd> GaussianMixture::evaluate(const Eigen::Ref<const VectorXd>& x) const {
    if (x.size() != dim_) throw ConfigError("mixture query dimension mismatch (" + dims(x.size(), dim_) + ")");
    const std::size_t n = components_.size();
    VectorXd log_terms(static_cast<Eigen::Index>(n));
    std::vector<VectorXd> pulls(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Component& c = components_[i];
        const VectorXd diff = x - c.mean;
        const VectorXd whitened = c.cholesky.matrixL().solve(diff);
        log_terms[static_cast<Eigen::Index>(i)] = c.log_normaliser - 0.5 * whitened.squaredNorm();
        pulls[i] = -c.cholesky.matrixU().solve(whitened);  // Σ⁻¹(μ - x)
    }
    const double peak = log_terms.maxCoeff();
    const VectorXd shifted = (log_terms.array() - peak).exp().matrix();
    const double sum = shifted.sum();
    const double log_p = peak + std::log(sum);
    VectorXd grad = VectorXd::Zero(dim_);
    for (std::size_t i = 0; i < n; ++i) grad += (shifted[static_cast<Eigen::Index>(i)] / sum) * pulls[i];
    return {log_p, std::move(grad)};
}

ScoreResult GaussianMixture::score(const ScoreQuery& query) const {
    check_query(query);
    ScoreResult out{MatrixXd(dim_, query.size()), VectorXd(query.size())};
    for (Eigen::Index j = 0; j < query.size(); ++j) {
        auto [log_p, grad] = evaluate(query.points.col(j));
        out.scores.col(j) = grad;
        (*out.log_density)[j] = log_p;
    }
    return out;
}

double mixture_log_density(const GaussianMixture& m, const Eigen::Ref<const VectorXd>& x) {
    return m.evaluate(x).first;
}

VectorXd mixture_score(const GaussianMixture& m, const Eigen::Ref<const VectorXd>& x) {
    return m.evaluate(x).second;
}

// ---------------------------------------------------------------------------

ConditionalMixturePair::ConditionalMixturePair(GaussianMixture mixture_0, GaussianMixture mixture_1)
    : mixture_0_(std::move(mixture_0)), mixture_1_(std::move(mixture_1)) {
    if (mixture_0_.dim() != mixture_1_.dim())
        throw ConfigError("conditional mixtures differ in dimension");
}

std::pair<double, VectorXd> ConditionalMixturePair::evaluate(const Eigen::Ref<const VectorXd>& x,
                                                             double z) const {
    if (!(z >= 0.0 && z <= 1.0)) throw DomainError("condition z outside [0, 1]");
    if (z == 0.0) return mixture_0_.evaluate(x);
    if (z == 1.0) return mixture_1_.evaluate(x);
    auto [l0, s0] = mixture_0_.evaluate(x);
    auto [l1, s1] = mixture_1_.evaluate(x);
    const double a = std::log1p(-z) + l0;
    const double b = std::log(z) + l1;
    const double peak = std::max(a, b);
    const double ea = std::exp(a - peak);
    const double eb = std::exp(b - peak);
    const double log_p = peak + std::log(ea + eb);
    return {log_p, (ea * s0 + eb * s1) / (ea + eb)};
}

ScoreResult ConditionalMixturePair::score(const ScoreQuery& query) const {
    check_query(query);
    ScoreResult out{MatrixXd(dim(), query.size()), VectorXd(query.size())};
    for (Eigen::Index j = 0; j < query.size(); ++j) {
        auto [log_p, grad] = evaluate(query.points.col(j), (*query.cond)(0, j));
        out.scores.col(j) = grad;
        (*out.log_density)[j] = log_p;
    }
    return out;
}

ConditionalSample conditional_score(const ConditionalMixturePair& pair,
                                    const Eigen::Ref<const VectorXd>& x, double z) {
    auto [log_p, grad] = pair.evaluate(x, z);
    return {std::move(grad), log_p};
}

// ---------------------------------------------------------------------------

GridField::GridField(VectorXd origin, VectorXd spacing, std::vector<int> shape, std::vector<double> values)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), shape_(std::move(shape)),
      values_(std::move(values)) {
    const auto d = static_cast<Eigen::Index>(shape_.size());
    if (d != 2 && d != 3) throw ConfigError("grid fields must be 2D or 3D");
    if (origin_.size() != d || spacing_.size() != d)
        throw ConfigError("grid origin/spacing dimension does not match shape");
    if ((spacing_.array() <= 0.0).any()) throw ConfigError("grid spacing must be positive");
    std::size_t count = 1;
    for (int n : shape_) {
        if (n < 2) throw ConfigError("grid extents must be at least 2 per axis");
        count *= static_cast<std::size_t>(n);
    }
    if (values_.size() != count)
        throw ConfigError("grid holds " + std::to_string(values_.size()) + " values, shape needs " +
                          std::to_string(count));
}

double GridField::node(const std::vector<int>& index) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) flat = flat * shape_[k] + index[k];
    return values_[flat];
}

double GridField::interpolate(const Eigen::Ref<const VectorXd>& x) const {
    const std::size_t d = shape_.size();
    std::array<int, 3> base{};
    std::array<double, 3> frac{};
    for (std::size_t k = 0; k < d; ++k) {
        const double u = (x[static_cast<Eigen::Index>(k)] - origin_[static_cast<Eigen::Index>(k)]) /
                         spacing_[static_cast<Eigen::Index>(k)];
        if (!(u >= 0.0 && u <= shape_[k] - 1)) throw DomainError("grid query outside the grid");
        int i = static_cast<int>(std::floor(u));
        i = std::min(i, shape_[k] - 2);
        base[k] = i;
        frac[k] = u - i;
    }
    double value = 0.0;
    std::vector<int> index(d);
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
        double w = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            const bool up = (corner >> k) & 1u;
            index[k] = base[k] + (up ? 1 : 0);
            w *= up ? frac[k] : 1.0 - frac[k];
        }
        if (w != 0.0) value += w * node(index);
    }
    return value;
}

std::pair<double, VectorXd> GridField::evaluate(const Eigen::Ref<const VectorXd>& x) const {
    if (x.size() != dim()) throw ConfigError("grid query dimension mismatch (" + dims(x.size(), dim()) + ")");
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double lo = origin_[k] + spacing_[k];
        const double hi = origin_[k] + (shape_[static_cast<std::size_t>(k)] - 2) * spacing_[k];
        if (!(x[k] >= lo && x[k] <= hi))
            throw DomainError("grid query outside the interior box on axis " + std::to_string(k));
    }
    const double log_p = interpolate(x);
    VectorXd grad(x.size());
    VectorXd probe = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = 0.5 * spacing_[k];
        probe[k] = x[k] + h;
        const double up = interpolate(probe);
        probe[k] = x[k] - h;
        const double down = interpolate(probe);
        probe[k] = x[k];
        grad[k] = (up - down) / (2.0 * h);
    }
    return {log_p, std::move(grad)};
}

ScoreResult GridField::score(const ScoreQuery& query) const {
    check_query(query);
    ScoreResult out{MatrixXd(dim(), query.size()), VectorXd(query.size())};
    for (Eigen::Index j = 0; j < query.size(); ++j) {
        auto [log_p, grad] = evaluate(query.points.col(j));
        out.scores.col(j) = grad;
        (*out.log_density)[j] = log_p;
    }
    return out;
}

GridSample grid_score(const GridField& g, const Eigen::Ref<const VectorXd>& x) {
    auto [log_p, grad] = g.evaluate(x);
    return {std::move(grad), log_p};
}

// ---------------------------------------------------------------------------

ConditioningSchedule::ConditioningSchedule(VectorXd z0, VectorXd z1) : z0_(std::move(z0)), z1_(std::move(z1)) {
    if (z0_.size() != z1_.size()) throw ConfigError("conditioning endpoints differ in dimension");
    if (z0_.size() == 0) throw ConfigError("conditioning vectors must be non-empty");
}

ScoreScale::ScoreScale(double beta) : beta_(beta) {
    if (!(beta > 0.0)) throw ConfigError("score scale beta must be positive");
}

}  // namespace pdgeo
