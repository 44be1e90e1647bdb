// Acceptance run: one PASS/FAIL line per criterion. Pass criterion ids to run a subset.
#include <unistd.h>

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/dijkstra.hpp"
#include "oracles/finite_difference.hpp"
#include "pdgeo/analysis.hpp"
#include "pdgeo/bvp.hpp"
#include "pdgeo/io.hpp"
#include "pdgeo/ivp.hpp"
#include "support/benchmarks.hpp"
#include "support/trajectories.hpp"

using namespace pdgeo;
using bench::vec;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    std::string id;
    std::string title;
    double limit_seconds;
    std::function<Outcome()> run;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

double last(const VectorXd& v) { return v[v.size() - 1]; }

DiscretePath line(const VectorXd& a, const VectorXd& b) {
    MatrixXd pts(a.size(), 2);
    pts << a, b;
    return DiscretePath::uniform(AmbientSpace::euclidean(static_cast<int>(a.size())), pts);
}

DiscretePath curve(const std::function<VectorXd(double)>& f, int samples) {
    MatrixXd pts(f(0).size(), samples);
    for (int i = 0; i < samples; ++i) pts.col(i) = f(static_cast<double>(i) / (samples - 1));
    return DiscretePath::uniform(AmbientSpace::euclidean(static_cast<int>(pts.rows())), pts);
}

VectorXd random_point(std::mt19937_64& rng, double lo, double hi, int dim) {
    std::uniform_real_distribution<double> u(lo, hi);
    VectorXd x(dim);
    for (int k = 0; k < dim; ++k) x[k] = u(rng);
    return x;
}

// A1 -------------------------------------------------------------------------

Outcome flat_fixed_point() {
    UniformDensity flat2(2), flat3(3);
    ScoreField f2(flat2), f3(flat3);
    const VectorXd a = vec({-5, 3}), b = vec({7, -2});
    auto e = solve_bvp(AmbientSpace::euclidean(2), a, b, f2, BvpConfig{});
    auto s = AmbientSpace::sphere(3, 10.0);
    const VectorXd sa = 10.0 * vec({1, 0.2, -0.3}).normalized(), sb = 10.0 * vec({-0.4, 1, 0.5}).normalized();
    auto g = solve_bvp(s, sa, sb, f3, BvpConfig{});
    if (!e.ok() || !g.ok()) return {false, "solve stopped early"};
    const double de = (e.path.points() - init_path(AmbientSpace::euclidean(2), a, b, 15).points()).cwiseAbs().maxCoeff();
    const double ds = (g.path.points() - init_path(s, sa, sb, 15).points()).cwiseAbs().maxCoeff();
    return {de <= 1e-9 && ds <= 1e-9 && e.trace.rows.size() == 400 && g.trace.rows.size() == 400,
            fmt("max displacement euclidean %.2e, sphere %.2e (tol 1e-9)", de, ds)};
}

// A2 -------------------------------------------------------------------------

Outcome score_correctness() {
    MatrixXd c0(2, 2), c1(2, 2);
    c0 << 0.5, 0.2, 0.2, 0.3;
    c1 << 0.8, -0.1, -0.1, 0.4;
    GaussianMixture skewed({0.3, 0.7}, {vec({-1, 0.5}), vec({1, -0.2})}, {c0, c1});
    ConditionalMixturePair pair(bench::two_gaussians(), skewed);

    const double h = 0.05, half = 2.0;
    const int n = static_cast<int>(std::lround(2 * half / h)) + 1;
    auto truth = [](const VectorXd& x) { return -std::log(2 * M_PI) - 0.5 * x.squaredNorm(); };
    std::vector<double> values;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) values.push_back(truth(vec({-half + i * h, -half + j * h})));
    GridField grid(vec({-half, -half}), vec({h, h}), {n, n}, values);

    std::mt19937_64 rng(2024);
    double worst_mix = 0, worst_cond = 0, worst_grid = 0;
    for (int i = 0; i < 100; ++i) {
        const VectorXd x = random_point(rng, -2.5, 2.5, 2);
        const auto fd = oracles::central_gradient([&](const VectorXd& y) { return mixture_log_density(skewed, y); }, x, 1e-5);
        worst_mix = std::max(worst_mix, (mixture_score(skewed, x) - fd).cwiseAbs().maxCoeff());

        const double z = std::uniform_real_distribution<double>(0, 1)(rng);
        const auto fdz = oracles::central_gradient(
            [&](const VectorXd& y) { return conditional_score(pair, y, z).log_density; }, x, 1e-5);
        worst_cond = std::max(worst_cond, (conditional_score(pair, x, z).score - fdz).cwiseAbs().maxCoeff());

        const VectorXd xg = random_point(rng, -1.8, 1.8, 2);
        const auto fdg = oracles::central_gradient(truth, xg, 1e-5);
        worst_grid = std::max(worst_grid, (grid_score(grid, xg).score - fdg).cwiseAbs().maxCoeff());
    }
    return {worst_mix <= 1e-6 && worst_cond <= 1e-6 && worst_grid <= 5e-2,
            fmt("max error mixture %.2e, conditional %.2e (tol 1e-6), grid %.2e (tol 5e-2)", worst_mix, worst_cond,
                worst_grid)};
}

// A3 -------------------------------------------------------------------------

Outcome path_independence() {
    auto m = bench::two_gaussians();
    ScoreField field(m);
    const VectorXd a = bench::two_gaussians_start(), b = bench::two_gaussians_end();
    const double exact = mixture_log_density(m, b) - mixture_log_density(m, a);
    auto detour = curve([&](double t) { return VectorXd((1 - t) * a + t * b + vec({0.3, -1.4}) * std::sin(M_PI * t)); }, 17);
    const double l1 = last(relative_log_probability(line(a, b), field, 10000));
    const double l2 = last(relative_log_probability(detour, field, 10000));
    const double e1 = std::abs(l1 - exact), e2 = std::abs(l2 - exact), d = std::abs(l1 - l2);
    return {e1 <= 1e-6 && e2 <= 1e-6 && d <= 1e-6,
            fmt("|straight - exact| %.2e, |detour - exact| %.2e, |straight - detour| %.2e (tol 1e-6)", e1, e2, d)};
}

// A4 -------------------------------------------------------------------------

Outcome quadrature_order() {
    auto m = bench::two_gaussians();
    ScoreField field(m);
    const VectorXd a = vec({-2, 0.5}), b = vec({1.5, 1.0});
    const double exact = mixture_log_density(m, b) - mixture_log_density(m, a);
    auto path = line(a, b);
    auto err = [&](int n, QuadratureRule rule) {
        return std::abs(last(relative_log_probability(path, field, n, rule)) - exact);
    };
    const double r250 = err(250, QuadratureRule::Trapezoid) / err(500, QuadratureRule::Trapezoid);
    const double r500 = err(500, QuadratureRule::Trapezoid) / err(1000, QuadratureRule::Trapezoid);
    const double simpson = err(500, QuadratureRule::Simpson), trap = err(500, QuadratureRule::Trapezoid);
    const bool ok = r250 >= 3.5 && r250 <= 4.5 && r500 >= 3.5 && r500 <= 4.5 && simpson <= trap;
    return {ok, fmt("trapezoid ratios %.3f (n=250), %.3f (n=500); error at n=500 simpson %.2e, trapezoid %.2e", r250,
                    r500, simpson, trap)};
}

// A5 -------------------------------------------------------------------------

Outcome functional_derivative_check() {
    // Seeded smooth 7-point curve, resampled to constant speed, in a broad two-component mixture.
    auto m = GaussianMixture::isotropic({0.4, 0.6}, {vec({-1.0, 0.3}), vec({1.2, -0.4})}, 1.0);
    ScoreField field(m);
    std::mt19937_64 rng(0);
    std::normal_distribution<double> nd(0.0, 0.15);
    const VectorXd a = vec({-2, 1}), b = vec({2, 0.5});
    const VectorXd c1 = vec({nd(rng), nd(rng)}), c2 = vec({nd(rng), nd(rng)});
    auto raw = curve([&](double t) { return VectorXd((1 - t) * a + t * b + std::sin(M_PI * t) * c1 + std::sin(2 * M_PI * t) * c2); }, 7);
    auto path = reparameterize_constant_speed(raw, 7);

    auto weight = WeightFunction::inverse_density(field);
    const MatrixXd g = bvp_gradient(path, field, DerivativeMode::Direction);
    const MatrixXd pts = path.points();
    double worst = 1.0;
    for (int i = 1; i <= 5; ++i) {
        auto length = [&](const VectorXd& x) {
            MatrixXd p = pts;
            p.col(i) = x;
            return path_length_weighted(path.with_points(p), weight, 4096);
        };
        const VectorXd fd = oracles::central_gradient(length, pts.col(i), 1e-5);
        worst = std::min(worst, oracles::cosine_similarity(g.col(i - 1), fd));
    }
    return {worst >= 0.99, fmt("min cosine similarity over 5 interior points %.6f (need >= 0.99)", worst)};
}

// A6 / A11 -------------------------------------------------------------------

struct BenchmarkRun {
    BvpResult result;
    std::string trace_csv;
    std::string path_csv;
};

BenchmarkRun benchmark_run() {
    auto m = bench::two_gaussians();
    ScoreField field(m);
    BenchmarkRun run{solve_bvp(AmbientSpace::euclidean(2), bench::two_gaussians_start(), bench::two_gaussians_end(),
                               field, bench::two_gaussians_bvp()),
                     {},
                     {}};
    std::ostringstream trace, path;
    write_trace_csv(trace, run.result.trace);
    write_path_csv(path, run.result.path);
    run.trace_csv = trace.str();
    run.path_csv = path.str();
    return run;
}

Outcome bvp_benchmark() {
    auto m = bench::two_gaussians();
    ScoreField field(m);
    const auto r = benchmark_run().result;
    if (!r.ok()) return {false, "solve stopped early"};
    const double straight = r.trace.initial_rel_distance;
    const double final = r.trace.rows.back().rel_distance;
    const double min_geo = relative_log_probability(r.path, field, 1024).minCoeff();
    const double min_line = relative_log_probability(r.initial, field, 1024).minCoeff();
    std::vector<double> sampled{straight};
    for (std::size_t i = 9; i < r.trace.rows.size(); i += 10) sampled.push_back(r.trace.rows[i].rel_distance);
    double worst_rise = 0.0;
    for (std::size_t i = 1; i < sampled.size(); ++i) worst_rise = std::max(worst_rise, sampled[i] / sampled[i - 1] - 1.0);
    const bool ok = final <= 0.9 * straight && min_geo > min_line && worst_rise <= 0.01;
    return {ok, fmt("rel distance %.4g -> %.4g (ratio %.3f, need <= 0.90); min rel_log_p geodesic %.3f vs line %.3f; "
                    "worst 10-iteration rise %.2f%% (tol 1%%)",
                    straight, final, final / straight, min_geo, min_line, 100 * worst_rise)};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("pdgeo-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::vector<std::string> files;
    for (int i = 0; i < 2; ++i) {
        const auto run = benchmark_run();
        const auto trace = dir / ("trace_" + std::to_string(i) + ".csv");
        const auto path = dir / ("path_" + std::to_string(i) + ".csv");
        std::ofstream(trace, std::ios::binary) << run.trace_csv;
        std::ofstream(path, std::ios::binary) << run.path_csv;
        for (const auto& f : {trace, path}) {
            std::ifstream in(f, std::ios::binary);
            files.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        }
    }
    fs::remove_all(dir);
    const bool trace_same = files[0] == files[2], path_same = files[1] == files[3];
    return {trace_same && path_same && !files[0].empty(),
            fmt("trace %s (%zu bytes), path %s (%zu bytes)", trace_same ? "identical" : "differs", files[0].size(),
                path_same ? "identical" : "differs", files[1].size())};
}

// A7 -------------------------------------------------------------------------

Outcome distance_oracle() {
    auto m = bench::two_gaussians();
    ScoreField field(m);
    const auto r = benchmark_run().result;
    if (!r.ok()) return {false, "solve stopped early"};
    const double bvp = absolute_geodesic_distance(r.path, field, 4096);

    // 200 x 200 lattice whose nodes include both endpoints.
    const double h = 3.0 / 66.0;
    oracles::Lattice lattice{Eigen::Vector2d(-1.5 - 66 * h, 1.2 - 100 * h), h, 200, 200};
    const double dijkstra = oracles::dijkstra_distance(lattice, {66, 100}, {132, 100}, [&](const Eigen::Vector2d& x) {
        return std::exp(mixture_log_density(m, VectorXd(x)));
    });
    const double rel = bvp / dijkstra - 1.0;
    return {std::abs(rel) <= 0.05, fmt("boundary value %.4f, lattice %.4f, relative difference %+.2f%% (tol 5%%)", bvp,
                                       dijkstra, 100 * rel)};
}

// A8 -------------------------------------------------------------------------

Outcome ivp_invariants() {
    auto m = bench::sphere_modes();
    ScoreField field(m);
    auto s = AmbientSpace::sphere(3, bench::kSphereRadius);
    const VectorXd x0 = bench::sphere_start();
    const VectorXd v0 = init_velocity(s, x0, bench::sphere_direction(), 4.0);
    auto run = [&](int steps) {
        IvpConfig c;
        c.steps = steps;
        return solve_ivp(s, x0, v0, field, c);
    };
    auto end = [](const IvpResult& r) { return VectorXd(r.points.col(r.points.cols() - 1)); };
    const auto r = run(200);
    if (!r.ok()) return {false, "integration stopped early"};
    double norm_dev = 0.0;
    for (Eigen::Index i = 0; i < r.points.cols(); ++i)
        norm_dev = std::max(norm_dev, std::abs(r.points.col(i).norm() - bench::kSphereRadius));
    const VectorXd reference = end(run(6400));
    const double e200 = (end(r) - reference).norm();
    const double e400 = (end(run(400)) - reference).norm();
    const double ratio = e200 / e400;
    const bool ok = norm_dev <= 1e-9 && r.max_speed_drift() <= 1e-4 && ratio >= 8.0;
    return {ok, fmt("max | ||x|| - r | %.2e (tol 1e-9); speed drift %.2e (tol 1e-4); error ratio 200->400 steps %.2f "
                    "(need >= 8)",
                    norm_dev, r.max_speed_drift(), ratio)};
}

// A9 -------------------------------------------------------------------------

Outcome ivp_bvp_consistency() {
    auto m = bench::two_gaussians();
    ScoreField field(m);
    const auto bvp = benchmark_run().result;
    if (!bvp.ok()) return {false, "solve stopped early"};
    const VectorXd a = bench::two_gaussians_start(), b = bench::two_gaussians_end();
    const VectorXd v0 = fit_spline(bvp.path).derivative(0.0);
    const auto ivp = solve_ivp(AmbientSpace::euclidean(2), a, v0, field, IvpConfig{});
    if (!ivp.ok()) return {false, "integration stopped early"};
    const VectorXd reached = ivp.points.col(ivp.points.cols() - 1);
    const double length = path_length_weighted(bvp.path, WeightFunction::constant(1.0), 4096);
    const double miss = (reached - b).norm();
    return {miss <= 0.05 * length,
            fmt("endpoint reached (%.4f, %.4f), target (%.4f, %.4f); miss %.4f = %.1f%% of path length %.4f (tol 5%%)",
                reached[0], reached[1], b[0], b[1], miss, 100 * miss / length, length)};
}

// A10 ------------------------------------------------------------------------

Outcome analysis_ordering() {
    auto m = bench::two_gaussians();
    ScoreField field(m);
    const auto set = bench::near_geodesic_set();
    AnalysisConfig config;
    config.deltas = {0.1};
    config.bvp = bench::stable_bvp();
    const auto report = compare_trajectories(set, field, config);
    const auto optimized = report.dataset_mean("optimized");
    const auto original = report.dataset_mean("original");
    const auto perturbed = report.dataset_mean("perturbed_0.1");
    if (!optimized || !original || !perturbed) return {false, "a variant failed on every trajectory"};

    const auto r = benchmark_run().result;
    if (!r.ok()) return {false, "benchmark solve stopped early"};
    const double geo = gradient_norm_profile(r.path, field, 1024).mean();
    const double straight = gradient_norm_profile(r.initial, field, 1024).mean();
    const bool ok = *optimized <= *original && *original <= *perturbed && geo <= 0.2 * straight;
    return {ok, fmt("mean gradient norm optimized %.4g <= original %.4g <= perturbed(0.1) %.4g; benchmark optimized "
                    "%.4g vs straight %.4g (ratio %.3f, need <= 0.2)",
                    *optimized, *original, *perturbed, geo, straight, geo / straight)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"A1", "flat fixed point", 5, flat_fixed_point},
        {"A2", "score correctness", 5, score_correctness},
        {"A3", "path independence", 10, path_independence},
        {"A4", "quadrature order", 10, quadrature_order},
        {"A5", "functional derivative", 30, functional_derivative_check},
        {"A6", "boundary value benchmark", 60, bvp_benchmark},
        {"A7", "distance oracle", 60, distance_oracle},
        {"A8", "initial value invariants", 30, ivp_invariants},
        {"A9", "initial/boundary value consistency", 60, ivp_bvp_consistency},
        {"A10", "analysis ordering", 120, analysis_ordering},
        {"A11", "determinism", 120, determinism},
    };
    std::set<std::string> selected(argv + 1, argv + argc);
    for (const auto& id : selected) {
        if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.id == id; })) {
            std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
            return 2;
        }
    }

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds < c.limit_seconds;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%-4s %s  %-36s %7.2fs / %3.0fs%s  %s\n", c.id.c_str(), pass ? "PASS" : "FAIL", c.title.c_str(),
                    seconds, c.limit_seconds, in_time ? "" : " (over time)", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
