#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdgeo/bvp.hpp"

namespace pdgeo {

// Named paths sharing one ambient space.
class TrajectorySet {
public:
    struct Entry {
        std::string name;
        DiscretePath path;
    };

    explicit TrajectorySet(AmbientSpace space) : space_(space) {}

    void add(std::string name, DiscretePath path);

    const AmbientSpace& space() const { return space_; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    AmbientSpace space_;
    std::vector<Entry> entries_;
};

// Every `*.csv` in `dir`, in name order, as a path in `space`. On the sphere,
// samples within 1% of the radius are rescaled onto it.
TrajectorySet load_trajectory_set(const std::filesystem::path& dir, const AmbientSpace& space);

enum class PerturbMode { Literal, EndpointPreserving };

// Literal: x_j += δ sin(π x_j) on every coordinate of every sample.
// EndpointPreserving: γ(t) += δ sin(πt) u for a unit vector u drawn from `seed`;
// endpoints are left untouched. Sphere samples are rescaled to the radius.
DiscretePath perturb_path(const DiscretePath& path, double delta, PerturbMode mode, std::uint64_t seed);

// Unit vector of dimension `dim` derived deterministically from `seed`.
VectorXd seeded_direction(int dim, std::uint64_t seed);

// Per-coordinate cubic smoothing spline minimising
//   s Σ (yᵢ - g(tᵢ))² + (1 - s) ∫ g''²
// with the end samples held fixed: s = 1 interpolates, s = 0 gives the chord.
DiscretePath smooth_path(const DiscretePath& path, double smoothing);

// ‖δS/δγ‖ at n + 1 uniform parameters after constant-speed resampling.
VectorXd gradient_norm_profile(const DiscretePath& path, const ScoreField& field, int n,
                               DerivativeMode mode = DerivativeMode::Direction);

struct AnalysisConfig {
    int n = kDefaultQuadratureIntervals;
    DerivativeMode mode = DerivativeMode::Direction;
    std::vector<double> deltas{0.1};
    PerturbMode perturb_mode = PerturbMode::EndpointPreserving;
    std::uint64_t seed = 0;
    bool optimize = true;
    bool smooth = true;
    double smoothing = 0.9999;
    BvpConfig bvp;

    void validate() const;
};

struct VariantResult {
    std::optional<double> mean_grad_norm;
    std::optional<std::string> error;
    VectorXd profile;
};

struct ComparisonReport {
    struct PathEntry {
        std::string name;
        std::map<std::string, VariantResult> variants;
    };

    std::vector<std::string> variant_names;  // report order
    std::vector<PathEntry> paths;
    VectorXd t;                              // profile parameters

    // Arithmetic mean of the per-path means that succeeded.
    std::optional<double> dataset_mean(const std::string& variant) const;

    nlohmann::json to_json() const;
    // `path,variant,mean_grad_norm`; failed entries carry `failed`.
    void write_csv(std::ostream& out) const;
};

std::string perturbed_variant_name(double delta);

ComparisonReport compare_trajectories(const TrajectorySet& set, const ScoreField& field,
                                      const AnalysisConfig& config);

}  // namespace pdgeo
