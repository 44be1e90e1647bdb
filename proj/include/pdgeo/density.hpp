#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "pdgeo/geometry.hpp"

namespace pdgeo {

// A batch of score queries. Points, conditions and opaque parameters are stored
// column-wise: column j of `points` pairs with column j of `cond` and entry j of `t`.
struct ScoreQuery {
    MatrixXd points;
    std::optional<MatrixXd> cond;
    std::optional<VectorXd> t;

    Eigen::Index size() const { return points.cols(); }
    int dim() const { return static_cast<int>(points.rows()); }
    void validate() const;
};

struct ScoreResult {
    MatrixXd scores;  // ∇log p(x | cond), one column per query point
    std::optional<VectorXd> log_density;
};

// Anything that answers ∇log p(x | cond) for a batch of points.
class ScoreProvider {
public:
    virtual ~ScoreProvider() = default;

    virtual int dim() const = 0;
    virtual std::optional<int> cond_dim() const { return std::nullopt; }
    virtual bool has_log_density() const = 0;
    virtual ScoreResult score(const ScoreQuery& query) const = 0;

protected:
    void check_query(const ScoreQuery& query) const;
};

// p ≡ 1 (unnormalised); zero score everywhere.
class UniformDensity final : public ScoreProvider {
public:
    explicit UniformDensity(int dim);

    int dim() const override { return dim_; }
    bool has_log_density() const override { return true; }
    ScoreResult score(const ScoreQuery& query) const override;

private:
    int dim_;
};

class GaussianMixture final : public ScoreProvider {
public:
    GaussianMixture(std::vector<double> weights, std::vector<VectorXd> means,
                    std::vector<MatrixXd> covariances);

    static GaussianMixture diagonal(std::vector<double> weights, std::vector<VectorXd> means,
                                    const std::vector<VectorXd>& variances);
    static GaussianMixture isotropic(std::vector<double> weights, std::vector<VectorXd> means,
                                     double sigma);

    int dim() const override { return dim_; }
    bool has_log_density() const override { return true; }
    ScoreResult score(const ScoreQuery& query) const override;

    std::size_t size() const { return components_.size(); }
    double weight(std::size_t i) const { return components_[i].weight; }
    const VectorXd& mean(std::size_t i) const { return components_[i].mean; }
    const MatrixXd& covariance(std::size_t i) const { return components_[i].covariance; }

    // log Σ wᵢ N(x; μᵢ, Σᵢ) together with its gradient.
    std::pair<double, VectorXd> evaluate(const Eigen::Ref<const VectorXd>& x) const;

private:
    struct Component {
        double weight;
        VectorXd mean;
        MatrixXd covariance;
        Eigen::LLT<MatrixXd> cholesky;
        double log_normaliser;  // log wᵢ - ½(d log 2π + log det Σᵢ)
    };

    int dim_;
    std::vector<Component> components_;
};

double mixture_log_density(const GaussianMixture& m, const Eigen::Ref<const VectorXd>& x);
VectorXd mixture_score(const GaussianMixture& m, const Eigen::Ref<const VectorXd>& x);

// p(x | z) = (1 - z) p₀(x) + z p₁(x) with scalar condition z ∈ [0, 1].
class ConditionalMixturePair final : public ScoreProvider {
public:
    ConditionalMixturePair(GaussianMixture mixture_0, GaussianMixture mixture_1);

    int dim() const override { return mixture_0_.dim(); }
    std::optional<int> cond_dim() const override { return 1; }
    bool has_log_density() const override { return true; }
    ScoreResult score(const ScoreQuery& query) const override;

    const GaussianMixture& mixture_0() const { return mixture_0_; }
    const GaussianMixture& mixture_1() const { return mixture_1_; }

    std::pair<double, VectorXd> evaluate(const Eigen::Ref<const VectorXd>& x, double z) const;

private:
    GaussianMixture mixture_0_;
    GaussianMixture mixture_1_;
};

struct ConditionalSample {
    VectorXd score;
    double log_density;
};

ConditionalSample conditional_score(const ConditionalMixturePair& pair,
                                    const Eigen::Ref<const VectorXd>& x, double z);

// Log-density samples on a regular 2D or 3D grid. Values are stored in C order
// (last axis fastest). Log-density is multilinear; the score is the central
// difference of the interpolant with half the grid spacing as step.
class GridField final : public ScoreProvider {
public:
    GridField(VectorXd origin, VectorXd spacing, std::vector<int> shape, std::vector<double> values);

    int dim() const override { return static_cast<int>(shape_.size()); }
    bool has_log_density() const override { return true; }
    ScoreResult score(const ScoreQuery& query) const override;

    const VectorXd& origin() const { return origin_; }
    const VectorXd& spacing() const { return spacing_; }
    const std::vector<int>& shape() const { return shape_; }
    const std::vector<double>& values() const { return values_; }
    double node(const std::vector<int>& index) const;

    // Multilinear interpolant; the point may be anywhere inside the full grid box.
    double interpolate(const Eigen::Ref<const VectorXd>& x) const;
    std::pair<double, VectorXd> evaluate(const Eigen::Ref<const VectorXd>& x) const;

private:
    VectorXd origin_;
    VectorXd spacing_;
    std::vector<int> shape_;
    std::vector<double> values_;
};

struct GridSample {
    VectorXd score;
    double log_density;
};

GridSample grid_score(const GridField& g, const Eigen::Ref<const VectorXd>& x);

// ζ(t) = (1 - t) z₀ + t z₁.
class ConditioningSchedule {
public:
    ConditioningSchedule(VectorXd z0, VectorXd z1);

    const VectorXd& z0() const { return z0_; }
    const VectorXd& z1() const { return z1_; }
    int dim() const { return static_cast<int>(z0_.size()); }

    VectorXd operator()(double t) const { return (1.0 - t) * z0_ + t * z1_; }

private:
    VectorXd z0_;
    VectorXd z1_;
};

inline VectorXd condition_at(const ConditioningSchedule& s, double t) { return s(t); }

// Multiplier β applied by consumers to provider scores.
class ScoreScale {
public:
    ScoreScale() = default;
    explicit ScoreScale(double beta);
    double beta() const { return beta_; }

    // Suggested β for distillation-style external providers.
    static constexpr double kDistillationDefault = 0.002;

private:
    double beta_ = 1.0;
};

}  // namespace pdgeo
