#include "pdgeo/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

#include "pdgeo/io.hpp"
#include "pdgeo/protocol.hpp"

namespace pdgeo {

using nlohmann::json;

std::string ProviderSpec::type_name() const {
    switch (type) {
        case Type::Mixture: return "mixture";
        case Type::Grid: return "grid";
        case Type::Conditional: return "conditional";
        case Type::Uniform: return "uniform";
        case Type::External: return "external";
    }
    return "unknown";
}

namespace {

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("'" + section + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError("unknown key '" + section + "." + key + "'");
    }
}

double get_number(const json& obj, const char* key, const std::string& section, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("'" + section + "." + key + "' must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, const std::string& section, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ConfigError("'" + section + "." + key + "' must be an integer");
    const auto v = obj[key].get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError("'" + section + "." + key + "' is out of range");
    return static_cast<int>(v);
}

bool get_bool(const json& obj, const char* key, const std::string& section, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw ConfigError("'" + section + "." + key + "' must be true or false");
    return obj[key].get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& section, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) throw ConfigError("'" + section + "." + key + "' must be a string");
    return obj[key].get<std::string>();
}

template <typename Enum>
Enum get_choice(const json& obj, const char* key, const std::string& section, Enum fallback,
                std::initializer_list<std::pair<const char*, Enum>> choices) {
    if (!obj.contains(key)) return fallback;
    const std::string value = get_string(obj, key, section, "");
    for (const auto& [name, e] : choices) {
        if (value == name) return e;
    }
    std::string names;
    for (const auto& [name, e] : choices) names += std::string(names.empty() ? "" : ", ") + name;
    throw ConfigError("'" + section + "." + key + "' must be one of: " + names);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
    std::filesystem::path p(file);
    return p.is_absolute() || base.empty() ? p : base / p;
}

GaussianMixture mixture_entry(const json& value, const std::filesystem::path& base) {
    if (value.is_string()) return mixture_from_json(read_json_file(resolve(base, value.get<std::string>())));
    return mixture_from_json(value);
}

ProviderSpec parse_provider(const json& j, const std::filesystem::path& base) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError("'provider' must be an object with a 'type'");
    ProviderSpec p;
    const std::string type = get_string(j, "type", "provider", "");
    if (type == "mixture") {
        check_keys(j, "provider", {"type", "mixture", "file"});
        if (j.contains("mixture") == j.contains("file"))
            throw ConfigError("mixture provider needs exactly one of 'mixture' or 'file'");
        p.type = ProviderSpec::Type::Mixture;
        p.mixture = j.contains("mixture") ? mixture_entry(j["mixture"], base)
                                          : mixture_entry(j["file"], base);
    } else if (type == "grid") {
        check_keys(j, "provider", {"type", "file", "grid"});
        if (j.contains("grid") == j.contains("file"))
            throw ConfigError("grid provider needs exactly one of 'grid' or 'file'");
        p.type = ProviderSpec::Type::Grid;
        p.grid = j.contains("grid") ? grid_from_json(j["grid"])
                                    : grid_from_json(read_json_file(resolve(base, get_string(j, "file", "provider", ""))));
    } else if (type == "conditional") {
        check_keys(j, "provider", {"type", "mixture_0", "mixture_1"});
        if (!j.contains("mixture_0") || !j.contains("mixture_1"))
            throw ConfigError("conditional provider needs 'mixture_0' and 'mixture_1'");
        p.type = ProviderSpec::Type::Conditional;
        p.mixture = mixture_entry(j["mixture_0"], base);
        p.mixture_1 = mixture_entry(j["mixture_1"], base);
        ConditionalMixturePair check(*p.mixture, *p.mixture_1);
    } else if (type == "uniform") {
        check_keys(j, "provider", {"type", "dim"});
        p.type = ProviderSpec::Type::Uniform;
        p.dim = get_int(j, "dim", "provider", 0);
        if (p.dim < 2) throw ConfigError("uniform provider needs 'dim' of at least 2");
    } else if (type == "external") {
        check_keys(j, "provider", {"type", "command", "address", "timeout"});
        if (j.contains("command") == j.contains("address"))
            throw ConfigError("external provider needs exactly one of 'command' or 'address'");
        p.type = ProviderSpec::Type::External;
        if (j.contains("command")) {
            const json& c = j["command"];
            if (c.is_string()) {
                p.command = {c.get<std::string>()};
            } else if (c.is_array()) {
                for (const auto& a : c) {
                    if (!a.is_string()) throw ConfigError("'provider.command' must hold strings");
                    p.command.push_back(a.get<std::string>());
                }
            } else {
                throw ConfigError("'provider.command' must be a string or a list of strings");
            }
            if (p.command.empty() || p.command.front().empty())
                throw ConfigError("'provider.command' is empty");
        } else {
            p.address = get_string(j, "address", "provider", "");
            parse_address(p.address);
        }
        p.timeout = get_number(j, "timeout", "provider", 0.0);
        if (!(p.timeout >= 0.0)) throw ConfigError("'provider.timeout' must be non-negative");
    } else {
        throw ConfigError("unknown provider type '" + type + "'");
    }
    return p;
}

std::vector<double> number_list(const json& j, const std::string& what) {
    const VectorXd v = vector_from_json(j, what);
    return {v.data(), v.data() + v.size()};
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc, "config",
               {"space", "provider", "conditioning", "score", "bvp", "ivp", "analytics", "analysis", "output", "seed"});
    RunConfig c;

    if (doc.contains("space")) {
        const json& s = doc["space"];
        check_keys(s, "space", {"kind", "radius"});
        c.space.kind = get_choice(s, "kind", "space", SpaceKind::Euclidean,
                                  {{"euclidean", SpaceKind::Euclidean}, {"sphere", SpaceKind::Sphere}});
        if (s.contains("radius") && !(s["radius"].is_string() && s["radius"] == "auto")) {
            c.space.radius = get_number(s, "radius", "space", 0.0);
            if (!(*c.space.radius > 0.0)) throw ConfigError("'space.radius' must be positive or \"auto\"");
        }
        if (c.space.radius && c.space.kind != SpaceKind::Sphere)
            throw ConfigError("'space.radius' only applies to the sphere");
    }

    if (!doc.contains("provider")) throw ConfigError("configuration has no 'provider' section");
    c.provider = parse_provider(doc["provider"], base_dir);

    if (doc.contains("conditioning") && !doc["conditioning"].is_null()) {
        const json& z = doc["conditioning"];
        check_keys(z, "conditioning", {"z0", "z1"});
        if (!z.contains("z0") || !z.contains("z1")) throw ConfigError("'conditioning' needs 'z0' and 'z1'");
        const VectorXd z0 = vector_from_json(z["z0"], "conditioning.z0");
        const VectorXd z1 = vector_from_json(z["z1"], "conditioning.z1");
        if (z0.size() != z1.size() || z0.size() == 0)
            throw ConfigError("'conditioning.z0' and 'z1' must be non-empty and of equal length");
        c.conditioning = ConditioningSchedule(z0, z1);
    }
    using PT = ProviderSpec::Type;
    if (c.provider.type == PT::Conditional && (!c.conditioning || c.conditioning->dim() != 1))
        throw ConfigError("conditional provider needs a one-dimensional 'conditioning' schedule");
    if (c.provider.type != PT::Conditional && c.provider.type != PT::External && c.conditioning)
        throw ConfigError("'conditioning' given for an unconditional provider");

    if (doc.contains("score")) {
        const json& s = doc["score"];
        check_keys(s, "score", {"beta", "t"});
        const double beta = get_number(s, "beta", "score", 1.0);
        if (!(beta > 0.0)) throw ConfigError("'score.beta' must be positive");
        c.beta = ScoreScale(beta);
        if (s.contains("t") && !s["t"].is_null()) c.provider_t = get_number(s, "t", "score", 0.0);
    }

    if (doc.contains("analytics")) {
        const json& a = doc["analytics"];
        check_keys(a, "analytics", {"n", "rule"});
        c.analytics.n = get_int(a, "n", "analytics", c.analytics.n);
        c.analytics.rule = get_choice(a, "rule", "analytics", QuadratureRule::Trapezoid,
                                      {{"trapezoid", QuadratureRule::Trapezoid}, {"simpson", QuadratureRule::Simpson}});
    }
    if (c.analytics.n < 2) throw ConfigError("'analytics.n' must be at least 2");
    if (c.analytics.rule == QuadratureRule::Simpson && c.analytics.n % 2 != 0)
        throw ConfigError("'analytics.n' must be even for Simpson's rule");

    const std::initializer_list<std::pair<const char*, DerivativeMode>> modes = {
        {"direction", DerivativeMode::Direction}, {"exact", DerivativeMode::Exact}};

    BvpConfig& b = c.bvp;
    if (doc.contains("bvp")) {
        const json& j = doc["bvp"];
        check_keys(j, "bvp",
                   {"steps", "lr0", "lr_schedule", "levels", "refine_every", "derivative_mode", "parameterization",
                    "convergence_tol", "snapshot_every"});
        b.steps = get_int(j, "steps", "bvp", b.steps);
        b.lr0 = get_number(j, "lr0", "bvp", b.lr0);
        b.lr_schedule = get_choice(j, "lr_schedule", "bvp", b.lr_schedule,
                                   {{"linear", LrSchedule::Linear}, {"constant", LrSchedule::Constant}});
        if (j.contains("levels")) {
            b.bisection_levels.clear();
            if (!j["levels"].is_array()) throw ConfigError("'bvp.levels' must be a list of integers");
            for (const auto& k : j["levels"]) {
                if (!k.is_number_integer()) throw ConfigError("'bvp.levels' must be a list of integers");
                b.bisection_levels.push_back(k.get<int>());
            }
        }
        b.refine_every = get_int(j, "refine_every", "bvp", b.refine_every);
        b.derivative_mode = get_choice(j, "derivative_mode", "bvp", b.derivative_mode, modes);
        b.parameterization = get_choice(j, "parameterization", "bvp", b.parameterization,
                                        {{"auto", Parameterization::Auto},
                                         {"constant_speed", Parameterization::ConstantSpeed},
                                         {"general", Parameterization::General}});
        if (j.contains("convergence_tol") && !j["convergence_tol"].is_null())
            b.convergence_tol = get_number(j, "convergence_tol", "bvp", 0.0);
        b.snapshot_every = get_int(j, "snapshot_every", "bvp", b.snapshot_every);
    }
    b.beta = c.beta;
    b.provider_t = c.provider_t;
    b.quad_n = c.analytics.n;
    b.validate();

    IvpConfig& v = c.ivp;
    if (doc.contains("ivp")) {
        const json& j = doc["ivp"];
        check_keys(j, "ivp", {"steps", "speed", "record_every"});
        v.steps = get_int(j, "steps", "ivp", v.steps);
        v.speed = get_number(j, "speed", "ivp", v.speed);
        v.record_every = get_int(j, "record_every", "ivp", v.record_every);
    }
    v.beta = c.beta;
    v.provider_t = c.provider_t;
    v.validate();

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
        c.seed = doc["seed"].get<std::uint64_t>();
    }

    AnalysisConfig& a = c.analysis;
    if (doc.contains("analysis")) {
        const json& j = doc["analysis"];
        check_keys(j, "analysis",
                   {"n", "derivative_mode", "deltas", "perturb_mode", "optimize", "smooth", "smoothing"});
        a.n = get_int(j, "n", "analysis", a.n);
        a.mode = get_choice(j, "derivative_mode", "analysis", a.mode, modes);
        if (j.contains("deltas")) a.deltas = number_list(j["deltas"], "analysis.deltas");
        a.perturb_mode = get_choice(j, "perturb_mode", "analysis", a.perturb_mode,
                                    {{"endpoint_preserving", PerturbMode::EndpointPreserving},
                                     {"literal", PerturbMode::Literal}});
        a.optimize = get_bool(j, "optimize", "analysis", a.optimize);
        a.smooth = get_bool(j, "smooth", "analysis", a.smooth);
        a.smoothing = get_number(j, "smoothing", "analysis", a.smoothing);
    }
    a.seed = c.seed;
    a.bvp = c.bvp;
    a.validate();

    if (doc.contains("output")) {
        const json& o = doc["output"];
        check_keys(o, "output", {"dir", "snapshots"});
        const std::string dir = get_string(o, "dir", "output", "");
        if (!dir.empty()) c.output.dir = dir;
        c.output.snapshots = get_bool(o, "snapshots", "output", c.output.snapshots);
    }
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("empty component in override key '" + key + "'");
        if (!node->is_object()) {
            if (!node->is_null()) throw ConfigError("override '" + key + "' descends into a non-object");
            *node = json::object();
        }
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = std::move(value);
}

std::unique_ptr<ScoreProvider> make_provider(const ProviderSpec& spec) {
    using PT = ProviderSpec::Type;
    switch (spec.type) {
        case PT::Mixture: return std::make_unique<GaussianMixture>(*spec.mixture);
        case PT::Grid: return std::make_unique<GridField>(*spec.grid);
        case PT::Conditional: return std::make_unique<ConditionalMixturePair>(*spec.mixture, *spec.mixture_1);
        case PT::Uniform: return std::make_unique<UniformDensity>(spec.dim);
        case PT::External: {
            std::unique_ptr<Transport> transport;
            if (!spec.command.empty()) {
                transport = std::make_unique<ChildProcessTransport>(spec.command, spec.timeout);
            } else {
                const auto [host, port] = parse_address(spec.address);
                transport = std::make_unique<TcpTransport>(host, port, spec.timeout);
            }
            return std::make_unique<ExternalScoreProvider>(std::move(transport));
        }
    }
    throw ConfigError("unknown provider type");
}

AmbientSpace resolve_space(const SpaceSpec& spec, const VectorXd& start, const VectorXd* end) {
    const int dim = static_cast<int>(start.size());
    if (end && end->size() != dim)
        throw ConfigError("endpoint dimensions differ (" + std::to_string(dim) + " vs " +
                          std::to_string(end->size()) + ")");
    if (spec.kind == SpaceKind::Euclidean) return AmbientSpace::euclidean(dim);
    if (!spec.radius) return end ? AmbientSpace::sphere_through(start, *end) : AmbientSpace::sphere(dim, start.norm());
    const double r = *spec.radius;
    for (const VectorXd* p : {&start, end}) {
        if (p && std::abs(p->norm() - r) > 1e-9 * r)
            throw ConfigError("point of norm " + std::to_string(p->norm()) + " is not on the sphere of radius " +
                              std::to_string(r));
    }
    return AmbientSpace::sphere(dim, r);
}

}  // namespace pdgeo
