#include "pdgeo/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "pdgeo/config.hpp"
#include "pdgeo/io.hpp"
#include "pdgeo/svg.hpp"

namespace pdgeo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool overwrite = false;
};

RunConfig load_config(const CommonOptions& opts) {
    std::string file = opts.config;
    if (file.empty()) {
        if (const char* env = std::getenv(kConfigEnvVar)) file = env;
    }
    if (file.empty()) throw ConfigError(std::string("no configuration: pass --config or set ") + kConfigEnvVar);
    json doc = read_json_file(file);
    for (const auto& o : opts.overrides) apply_override(doc, o);
    if (!opts.out.empty()) doc["output"]["dir"] = opts.out;
    if (opts.seed) doc["seed"] = *opts.seed;
    return parse_run_config(doc, fs::path(file).parent_path());
}

VectorXd read_point(const std::string& file) {
    const PathTable table = read_path_csv(fs::path(file));
    if (table.points.cols() != 1) throw ConfigError(file + ": expected exactly one sample row");
    return table.points.col(0);
}

// In-process providers know their dimension before anything is spawned.
void check_provider_dim(const ProviderSpec& spec, int dim) {
    std::optional<int> provider_dim;
    switch (spec.type) {
        case ProviderSpec::Type::Mixture:
        case ProviderSpec::Type::Conditional: provider_dim = spec.mixture->dim(); break;
        case ProviderSpec::Type::Grid: provider_dim = spec.grid->dim(); break;
        case ProviderSpec::Type::Uniform: provider_dim = spec.dim; break;
        case ProviderSpec::Type::External: break;
    }
    if (provider_dim && *provider_dim != dim)
        throw ConfigError("provider dimension " + std::to_string(*provider_dim) + " does not match input dimension " +
                          std::to_string(dim));
}

// Files are staged in a hidden sibling directory and renamed into place on
// success; on failure the staged files end up in `<dir>/failed/`.
class OutputStage {
public:
    OutputStage(fs::path dir, bool overwrite) : final_(std::move(dir)) {
        if (fs::exists(final_) && !overwrite && !fs::is_empty(final_))
            throw ConfigError("output directory " + final_.string() + " exists; pass --overwrite to replace it");
        fs::path parent = final_.parent_path();
        if (parent.empty()) parent = ".";
        fs::create_directories(parent);
        staging_ = parent / ("." + final_.filename().string() + ".partial");
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }
    ~OutputStage() {
        if (!done_) {
            try {
                fail();
            } catch (...) {
            }
        }
    }

    fs::path file(const std::string& name) const { return staging_ / name; }

    void commit() {
        if (fs::exists(final_)) fs::remove_all(final_);
        fs::rename(staging_, final_);
        done_ = true;
    }
    void fail() {
        done_ = true;
        fs::create_directories(final_);
        fs::remove_all(final_ / "failed");
        fs::rename(staging_, final_ / "failed");
    }

private:
    fs::path final_;
    fs::path staging_;
    bool done_ = false;
};

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    out << text;
    if (!out) throw Error("failed writing " + file.string());
}

void write_json(const fs::path& file, const json& j) { write_text(file, j.dump(2) + "\n"); }

// Single-file outputs are written next to the target and renamed.
void write_file_atomic(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    const fs::path tmp = file.string() + ".partial";
    write_text(tmp, text);
    fs::rename(tmp, file);
}

json vector_json(const VectorXd& v) { return vector_to_json(v); }

json analytics_json(const PathAnalytics& a) {
    json j;
    j["t"] = vector_json(a.t);
    j["rel_log_p"] = vector_json(a.rel_log_p);
    j["rel_distance"] = vector_json(a.rel_distance);
    j["grad_norm"] = vector_json(a.grad_norm);
    j["final_rel_distance"] = a.rel_distance[a.rel_distance.size() - 1];
    j["min_rel_log_p"] = a.rel_log_p.minCoeff();
    j["mean_grad_norm"] = a.grad_norm.mean();
    j["abs_distance"] = a.abs_distance ? json(*a.abs_distance) : json(nullptr);
    j["log_p_start"] = a.log_p_start ? json(*a.log_p_start) : json(nullptr);
    return j;
}

std::string mode_name(DerivativeMode m) { return m == DerivativeMode::Exact ? "exact" : "direction"; }

json space_json(const AmbientSpace& space) {
    json j{{"kind", to_string(space.kind())}, {"dim", space.dim()}};
    if (space.is_sphere()) j["radius"] = space.radius();
    return j;
}

std::string path_csv(const DiscretePath& path) {
    std::ostringstream s;
    write_path_csv(s, path);
    return s.str();
}

// ---------------------------------------------------------------------------

int cmd_solve_bvp(const CommonOptions& opts, const std::string& a_file, const std::string& b_file, std::ostream& out) {
    const RunConfig cfg = load_config(opts);
    const VectorXd a = read_point(a_file);
    const VectorXd b = read_point(b_file);
    const AmbientSpace space = resolve_space(cfg.space, a, &b);
    check_provider_dim(cfg.provider, space.dim());
    init_path(space, a, b, 0);

    const auto provider = make_provider(cfg.provider);
    const ScoreField field(*provider, cfg.conditioning, cfg.beta, cfg.provider_t);
    if (field.dim() != space.dim()) throw ConfigError("provider dimension does not match the endpoints");

    OutputStage stage(cfg.output.dir, opts.overwrite);
    const BvpResult result = solve_bvp(space, a, b, field, cfg.bvp);

    write_text(stage.file("initial.csv"), path_csv(result.initial));
    write_text(stage.file("path.csv"), path_csv(result.path));
    {
        std::ostringstream s;
        write_trace_csv(s, result.trace);
        write_text(stage.file("trace.csv"), s.str());
    }
    if (cfg.output.snapshots) {
        fs::create_directories(stage.file("snapshots"));
        for (const auto& snap : result.trace.snapshots) {
            write_text(stage.file("snapshots") /
                           ("iter_" + std::to_string(snap.iter) + "_k" + std::to_string(snap.k) + ".csv"),
                       path_csv(snap.path));
        }
    }

    json summary;
    summary["complete"] = result.ok();
    summary["space"] = space_json(space);
    summary["provider"] = cfg.provider.type_name();
    summary["beta"] = cfg.beta.beta();
    summary["steps"] = cfg.bvp.steps;
    summary["iterations_run"] = result.trace.rows.size();
    summary["levels"] = cfg.bvp.bisection_levels;
    summary["lr0"] = cfg.bvp.lr0;
    summary["derivative_mode"] = mode_name(cfg.bvp.derivative_mode);
    summary["initial_rel_distance"] = result.trace.initial_rel_distance;
    if (!result.trace.rows.empty()) {
        summary["final_rel_distance"] = result.trace.rows.back().rel_distance;
        summary["rel_distance_ratio"] = result.trace.rows.back().rel_distance / result.trace.initial_rel_distance;
    }
    if (!result.ok()) {
        try {
            std::rethrow_exception(result.error);
        } catch (const std::exception& e) {
            summary["error"] = e.what();
        }
        write_json(stage.file("summary.json"), summary);
        stage.fail();
        std::rethrow_exception(result.error);
    }

    const PathAnalytics initial =
        compute_analytics(result.initial, field, cfg.analytics.n, cfg.analytics.rule, cfg.bvp.derivative_mode);
    const PathAnalytics final =
        compute_analytics(result.path, field, cfg.analytics.n, cfg.analytics.rule, cfg.bvp.derivative_mode);
    json analytics;
    analytics["initial"] = analytics_json(initial);
    analytics["result"] = analytics_json(final);
    write_json(stage.file("analytics.json"), analytics);

    summary["min_rel_log_p_initial"] = initial.rel_log_p.minCoeff();
    summary["min_rel_log_p_result"] = final.rel_log_p.minCoeff();
    summary["mean_grad_norm_initial"] = initial.grad_norm.mean();
    summary["mean_grad_norm_result"] = final.grad_norm.mean();
    summary["abs_distance_initial"] = initial.abs_distance ? json(*initial.abs_distance) : json(nullptr);
    summary["abs_distance_result"] = final.abs_distance ? json(*final.abs_distance) : json(nullptr);
    write_json(stage.file("summary.json"), summary);
    stage.commit();
    out << "rel_distance " << format_double(result.trace.initial_rel_distance) << " -> "
        << format_double(summary.value("final_rel_distance", result.trace.initial_rel_distance)) << "; wrote "
        << cfg.output.dir.string() << "\n";
    return kExitOk;
}

int cmd_solve_ivp(const CommonOptions& opts, const std::string& x0_file, const std::string& dir_file,
                  bool use_norm, std::ostream& out) {
    const RunConfig cfg = load_config(opts);
    const VectorXd x0 = read_point(x0_file);
    const VectorXd direction = read_point(dir_file);
    if (direction.size() != x0.size()) throw ConfigError("start point and direction differ in dimension");
    const AmbientSpace space = resolve_space(cfg.space, x0);
    check_provider_dim(cfg.provider, space.dim());
    const double speed = use_norm ? direction.norm() : cfg.ivp.speed;
    const VectorXd v0 = init_velocity(space, x0, direction, speed);

    const auto provider = make_provider(cfg.provider);
    const ScoreField field(*provider, cfg.conditioning, cfg.beta, cfg.provider_t);
    if (field.dim() != space.dim()) throw ConfigError("provider dimension does not match the start point");

    OutputStage stage(cfg.output.dir, opts.overwrite);
    const IvpResult result = solve_ivp(space, x0, v0, field, cfg.ivp);
    {
        std::ostringstream s;
        write_path_csv(s, result.t, result.points);
        write_text(stage.file("trajectory.csv"), s.str());
    }
    json summary = ivp_summary(result, space);
    summary["provider"] = cfg.provider.type_name();
    summary["beta"] = cfg.beta.beta();
    if (!result.ok()) {
        try {
            std::rethrow_exception(result.error);
        } catch (const std::exception& e) {
            summary["error"] = e.what();
        }
        write_json(stage.file("summary.json"), summary);
        stage.fail();
        std::rethrow_exception(result.error);
    }
    write_json(stage.file("summary.json"), summary);
    stage.commit();
    out << "endpoint reached after " << cfg.ivp.steps << " steps; wrote " << cfg.output.dir.string() << "\n";
    return kExitOk;
}

int cmd_analyze(const CommonOptions& opts, const std::string& dir, std::ostream& out) {
    const RunConfig cfg = load_config(opts);
    if (!fs::is_directory(dir)) throw ConfigError(dir + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    if (files.empty()) throw ConfigError(dir + " holds no trajectory CSV files");
    std::sort(files.begin(), files.end());
    const PathTable first = read_path_csv(files.front());
    const VectorXd start = first.points.col(0);
    const AmbientSpace space = cfg.space.kind == SpaceKind::Sphere && !cfg.space.radius
                                   ? AmbientSpace::sphere(static_cast<int>(start.size()), start.norm())
                                   : resolve_space(cfg.space, start);
    const TrajectorySet set = load_trajectory_set(dir, space);
    check_provider_dim(cfg.provider, space.dim());

    const auto provider = make_provider(cfg.provider);
    const ScoreField field(*provider, cfg.conditioning, cfg.beta, cfg.provider_t);
    if (field.dim() != space.dim()) throw ConfigError("provider dimension does not match the trajectories");

    OutputStage stage(cfg.output.dir, opts.overwrite);
    const ComparisonReport report = compare_trajectories(set, field, cfg.analysis);
    write_json(stage.file("report.json"), report.to_json());
    {
        std::ostringstream s;
        report.write_csv(s);
        write_text(stage.file("report.csv"), s.str());
    }
    fs::create_directories(stage.file("profiles"));
    for (const auto& p : report.paths) {
        std::ostringstream s;
        s << 't';
        std::vector<const VectorXd*> columns;
        for (const auto& v : report.variant_names) {
            const auto it = p.variants.find(v);
            if (it == p.variants.end() || !it->second.mean_grad_norm) continue;
            s << ',' << v;
            columns.push_back(&it->second.profile);
        }
        s << '\n';
        for (Eigen::Index i = 0; i < report.t.size(); ++i) {
            s << format_double(report.t[i]);
            for (const VectorXd* c : columns) s << ',' << format_double((*c)[i]);
            s << '\n';
        }
        write_text(stage.file("profiles") / (p.name + ".csv"), s.str());
    }
    stage.commit();
    for (const auto& v : report.variant_names) {
        const auto mean = report.dataset_mean(v);
        out << v << ' ' << (mean ? format_double(*mean) : std::string("failed")) << '\n';
    }
    return kExitOk;
}

int cmd_density_info(const CommonOptions& opts, std::ostream& out) {
    const RunConfig cfg = load_config(opts);
    const auto provider = make_provider(cfg.provider);
    json j;
    j["provider"] = cfg.provider.type_name();
    j["dim"] = provider->dim();
    j["cond_dim"] = provider->cond_dim() ? json(*provider->cond_dim()) : json(nullptr);
    j["has_log_density"] = provider->has_log_density();
    j["beta"] = cfg.beta.beta();
    out << j.dump() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(const std::string& name, const std::string& source) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError(source + ": no column '" + name + "'");
        return columns[static_cast<std::size_t>(it - header.begin())];
    }
};

CsvTable read_csv_table(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open " + file);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(file + ": empty file");
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
    t.columns.resize(t.header.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::size_t k = 0;
        for (std::string cell; std::getline(ls, cell, ',') && k < t.columns.size(); ++k) {
            try {
                t.columns[k].push_back(std::stod(cell));
            } catch (const std::exception&) {
                t.columns[k].push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        if (k != t.columns.size()) throw ConfigError(file + ": ragged row");
    }
    return t;
}

struct PlotOptions {
    std::string output;
    std::vector<std::string> paths;
    std::string trace;
    std::string csv;
    std::string x_column;
    std::vector<std::string> y_columns;
    std::vector<double> range;
    int grid = 200;
    int levels = 12;
    std::string title;
};

int cmd_plot_contour(const CommonOptions& opts, const PlotOptions& p) {
    const RunConfig cfg = load_config(opts);
    std::vector<svg::Overlay> overlays;
    for (const auto& file : p.paths) {
        const PathTable t = read_path_csv(fs::path(file));
        if (t.points.rows() != 2) throw ConfigError("contour plots need two-dimensional paths (" + file + ")");
        overlays.push_back({fs::path(file).stem().string(), t.points});
    }
    if (p.grid < 2) throw ConfigError("--grid must be at least 2");
    double x0, x1, y0, y1;
    if (p.range.size() == 4) {
        x0 = p.range[0], x1 = p.range[1], y0 = p.range[2], y1 = p.range[3];
    } else if (!p.range.empty()) {
        throw ConfigError("--range takes xmin xmax ymin ymax");
    } else {
        x0 = y0 = -3.0;
        x1 = y1 = 3.0;
        if (!overlays.empty()) {
            x0 = y0 = std::numeric_limits<double>::infinity();
            x1 = y1 = -std::numeric_limits<double>::infinity();
            for (const auto& o : overlays) {
                x0 = std::min(x0, o.points.row(0).minCoeff());
                x1 = std::max(x1, o.points.row(0).maxCoeff());
                y0 = std::min(y0, o.points.row(1).minCoeff());
                y1 = std::max(y1, o.points.row(1).maxCoeff());
            }
            const double pad = 0.25 * std::max(x1 - x0, y1 - y0) + 0.5;
            x0 -= pad, x1 += pad, y0 -= pad, y1 += pad;
        }
    }
    if (!(x1 > x0 && y1 > y0)) throw ConfigError("empty plot range");
    check_provider_dim(cfg.provider, 2);
    const auto provider = make_provider(cfg.provider);
    if (provider->dim() != 2) throw ConfigError("contour plots need a two-dimensional density");
    if (!provider->has_log_density()) throw ConfigError("contour plots need a provider with log-density");
    const ScoreField field(*provider, cfg.conditioning, cfg.beta, cfg.provider_t);

    const int n = p.grid;
    VectorXd xs = VectorXd::LinSpaced(n, x0, x1);
    VectorXd ys = VectorXd::LinSpaced(n, y0, y1);
    MatrixXd points(2, n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) points.col(i * n + j) << xs[j], ys[i];
    }
    const auto sample = field.evaluate(points, VectorXd::Zero(n * n));
    MatrixXd values(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) values(i, j) = (*sample.log_density)[i * n + j];
    }
    svg::ChartOptions o{p.title.empty() ? "log-density with paths" : p.title, "x0", "x1", 640, 640};
    write_file_atomic(p.output, svg::contour_plot(xs, ys, values, p.levels, overlays, o));
    return kExitOk;
}

int cmd_plot_trace(const PlotOptions& p) {
    const CsvTable t = read_csv_table(p.trace);
    const auto& iter = t.column("iter", p.trace);
    const auto& dist = t.column("rel_distance", p.trace);
    if (iter.empty()) throw ConfigError(p.trace + ": trace is empty");
    svg::ChartOptions o{p.title.empty() ? "relative geodesic distance" : p.title, "iteration", "relative distance"};
    write_file_atomic(p.output, svg::line_chart({{"rel_distance", iter, dist}}, o));
    return kExitOk;
}

int cmd_plot_curve(const PlotOptions& p) {
    const CsvTable t = read_csv_table(p.csv);
    if (p.y_columns.empty()) throw ConfigError("--y needs at least one column");
    const auto& x = t.column(p.x_column, p.csv);
    if (x.empty()) throw ConfigError(p.csv + ": no rows");
    std::vector<svg::Series> series;
    for (const auto& y : p.y_columns) series.push_back({y, x, t.column(y, p.csv)});
    svg::ChartOptions o{p.title, p.x_column, p.y_columns.size() == 1 ? p.y_columns.front() : ""};
    write_file_atomic(p.output, svg::line_chart(series, o));
    return kExitOk;
}

int cmd_plot_logp(const CommonOptions& opts, const PlotOptions& p) {
    const RunConfig cfg = load_config(opts);
    if (p.paths.empty()) throw ConfigError("--path is required");
    std::vector<std::pair<std::string, PathTable>> tables;
    for (const auto& file : p.paths) tables.emplace_back(fs::path(file).stem().string(), read_path_csv(fs::path(file)));
    const VectorXd start = tables.front().second.points.col(0);
    const AmbientSpace space = cfg.space.kind == SpaceKind::Sphere && !cfg.space.radius
                                   ? AmbientSpace::sphere(static_cast<int>(start.size()), start.norm())
                                   : resolve_space(cfg.space, start);
    check_provider_dim(cfg.provider, space.dim());
    const auto provider = make_provider(cfg.provider);
    const ScoreField field(*provider, cfg.conditioning, cfg.beta, cfg.provider_t);
    std::vector<svg::Series> series;
    for (auto& [name, table] : tables) {
        const DiscretePath path(space, table.t, table.points);
        const VectorXd r = relative_log_probability(path, field, cfg.analytics.n, cfg.analytics.rule);
        const VectorXd t = quadrature_grid(cfg.analytics.n);
        series.push_back({name, {t.data(), t.data() + t.size()}, {r.data(), r.data() + r.size()}});
    }
    svg::ChartOptions o{p.title.empty() ? "relative log-probability" : p.title, "t", "log p(x) - log p(a)"};
    write_file_atomic(p.output, svg::line_chart(series, o));
    return kExitOk;
}

void add_common(CLI::App* app, CommonOptions& opts) {
    app->add_option("-c,--config", opts.config, std::string("configuration file (default: $") + kConfigEnvVar + ")");
    app->add_option("--set", opts.overrides, "override a configuration value, e.g. --set bvp.lr0=0.05");
    app->add_option("-o,--out", opts.out, "output directory");
    app->add_option("--seed", opts.seed, "random seed");
    app->add_flag("--overwrite", opts.overwrite, "replace an existing output directory");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Geodesics under the metric p(x)^-2 I: boundary and initial value solvers, path analytics"};
    app.name("pdgeo");
    app.require_subcommand(1);

    CommonOptions common;
    std::string a_file, b_file, x0_file, dir_file, traj_dir;
    bool use_norm = false;
    PlotOptions plot;

    auto* bvp = app.add_subcommand("solve-bvp", "geodesic between two points");
    add_common(bvp, common);
    bvp->add_option("start", a_file, "single-row path CSV with the start point")->required();
    bvp->add_option("end", b_file, "single-row path CSV with the end point")->required();

    auto* ivp = app.add_subcommand("solve-ivp", "geodesic from a point and a direction");
    add_common(ivp, common);
    ivp->add_option("start", x0_file, "single-row path CSV with the start point")->required();
    ivp->add_option("direction", dir_file, "single-row path CSV with the initial direction")->required();
    ivp->add_flag("--use-norm", use_norm, "use the direction's norm as the initial speed");

    auto* analyze = app.add_subcommand("analyze", "gradient-norm comparison over a directory of trajectories");
    add_common(analyze, common);
    analyze->add_option("trajectories", traj_dir, "directory of path CSV files")->required();

    auto* info = app.add_subcommand("density-info", "print the provider's capabilities");
    add_common(info, common);

    auto* plot_cmd = app.add_subcommand("plot", "SVG figures");
    plot_cmd->require_subcommand(1);
    auto* contour = plot_cmd->add_subcommand("contour", "log-density contours with path overlays (2D)");
    add_common(contour, common);
    contour->add_option("--path", plot.paths, "path CSV to overlay");
    contour->add_option("--range", plot.range, "xmin xmax ymin ymax")->expected(4);
    contour->add_option("--grid", plot.grid, "grid resolution per axis");
    contour->add_option("--levels", plot.levels, "number of contour levels");
    auto* trace = plot_cmd->add_subcommand("trace", "relative distance against iteration");
    trace->add_option("trace", plot.trace, "trace CSV written by solve-bvp")->required();
    auto* curve = plot_cmd->add_subcommand("curve", "columns of a CSV file against another");
    curve->add_option("csv", plot.csv, "CSV file with a header row")->required();
    curve->add_option("--x", plot.x_column, "x column")->required();
    curve->add_option("--y", plot.y_columns, "y column(s)")->required();
    auto* logp = plot_cmd->add_subcommand("logp", "relative log-probability along paths");
    add_common(logp, common);
    logp->add_option("--path", plot.paths, "path CSV")->required();
    for (auto* sub : {contour, trace, curve, logp}) {
        sub->add_option("--svg", plot.output, "output SVG file")->required();
        sub->add_option("--title", plot.title, "figure title");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*bvp) return cmd_solve_bvp(common, a_file, b_file, out);
        if (*ivp) return cmd_solve_ivp(common, x0_file, dir_file, use_norm, out);
        if (*analyze) return cmd_analyze(common, traj_dir, out);
        if (*info) return cmd_density_info(common, out);
        if (*contour) return cmd_plot_contour(common, plot);
        if (*trace) return cmd_plot_trace(plot);
        if (*curve) return cmd_plot_curve(plot);
        if (*logp) return cmd_plot_logp(common, plot);
    } catch (const ConfigError& e) {
        err << "pdgeo: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ProviderError& e) {
        err << "pdgeo: provider error: " << e.what() << '\n';
        return kExitProvider;
    } catch (const NumericalError& e) {
        err << "pdgeo: numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "pdgeo: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace pdgeo
