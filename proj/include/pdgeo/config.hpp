#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdgeo/analysis.hpp"
#include "pdgeo/bvp.hpp"
#include "pdgeo/ivp.hpp"

namespace pdgeo {

// Environment variable naming the default configuration file.
inline constexpr const char* kConfigEnvVar = "PDGEO_CONFIG";

struct SpaceSpec {
    SpaceKind kind = SpaceKind::Euclidean;
    std::optional<double> radius;  // empty: taken from the start point
};

struct ProviderSpec {
    enum class Type { Mixture, Grid, Conditional, Uniform, External };

    Type type = Type::Mixture;
    std::optional<GaussianMixture> mixture;
    std::optional<GaussianMixture> mixture_1;  // second mixture of a conditional pair
    std::optional<GridField> grid;
    int dim = 0;                               // uniform
    std::vector<std::string> command;          // external, child process
    std::string address;                       // external, TCP
    double timeout = 0.0;

    std::string type_name() const;
};

struct AnalyticsSpec {
    int n = kDefaultQuadratureIntervals;
    QuadratureRule rule = QuadratureRule::Trapezoid;
};

struct OutputSpec {
    std::filesystem::path dir = "pdgeo-out";
    bool snapshots = false;
};

// Parsed configuration file. Sections: space, provider, conditioning, score,
// bvp, ivp, analytics, analysis, output, seed. Unknown keys are rejected.
struct RunConfig {
    SpaceSpec space;
    ProviderSpec provider;
    std::optional<ConditioningSchedule> conditioning;
    ScoreScale beta;
    std::optional<double> provider_t;
    BvpConfig bvp;
    IvpConfig ivp;
    AnalyticsSpec analytics;
    AnalysisConfig analysis;
    OutputSpec output;
    std::uint64_t seed = 0;
};

// Relative file names inside the document resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

// `key.path=value`: value is read as JSON when it parses, otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Builds the provider; external providers are spawned or connected here.
std::unique_ptr<ScoreProvider> make_provider(const ProviderSpec& spec);

// The space a run lives in, given its start point (and end point, when there is one).
AmbientSpace resolve_space(const SpaceSpec& spec, const VectorXd& start, const VectorXd* end = nullptr);

}  // namespace pdgeo
