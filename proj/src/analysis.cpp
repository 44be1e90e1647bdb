#include "pdgeo/analysis.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "pdgeo/io.hpp"

namespace pdgeo {

void TrajectorySet::add(std::string name, DiscretePath path) {
    if (!(path.space() == space_))
        throw ConfigError("trajectory '" + name + "' does not live in the set's space");
    entries_.push_back({std::move(name), std::move(path)});
}

TrajectorySet load_trajectory_set(const std::filesystem::path& dir, const AmbientSpace& space) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    TrajectorySet set(space);
    for (const auto& file : files) {
        PathTable table = read_path_csv(file);
        if (table.points.rows() != space.dim())
            throw ConfigError(file.string() + ": dimension " + std::to_string(table.points.rows()) + ", expected " +
                              std::to_string(space.dim()));
        if (space.is_sphere()) {
            for (Eigen::Index i = 0; i < table.points.cols(); ++i) {
                const double norm = table.points.col(i).norm();
                if (std::abs(norm - space.radius()) > 0.01 * space.radius())
                    throw ConfigError(file.string() + ": sample " + std::to_string(i) + " is not on the sphere");
                table.points.col(i) *= space.radius() / norm;
            }
        }
        set.add(file.stem().string(), DiscretePath(space, std::move(table.t), std::move(table.points)));
    }
    return set;
}

VectorXd seeded_direction(int dim, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    VectorXd u(dim);
    do {
        // Raw engine output mapped to [-1, 1) so the draw is identical on every platform.
        for (int i = 0; i < dim; ++i) u[i] = static_cast<double>(engine() >> 11) * 0x1.0p-52 - 1.0;
    } while (!(u.norm() > 1e-3));
    return u.normalized();
}

DiscretePath perturb_path(const DiscretePath& path, double delta, PerturbMode mode, std::uint64_t seed) {
    if (!(delta >= 0.0)) throw ConfigError("perturbation amplitude must be non-negative");
    if (delta == 0.0) return path;
    MatrixXd points = path.points();
    const Eigen::Index n = path.size();
    const AmbientSpace& space = path.space();
    if (mode == PerturbMode::Literal) {
        points += delta * (M_PI * points.array()).sin().matrix();
        if (space.is_sphere()) {
            for (Eigen::Index i = 0; i < n; ++i) points.col(i) *= space.radius() / points.col(i).norm();
        }
    } else {
        const VectorXd u = seeded_direction(path.dim(), seed);
        for (Eigen::Index i = 1; i + 1 < n; ++i) {
            points.col(i) += delta * std::sin(M_PI * path.t()[i]) * u;
            if (space.is_sphere()) points.col(i) *= space.radius() / points.col(i).norm();
        }
    }
    return path.with_points(std::move(points));
}

DiscretePath smooth_path(const DiscretePath& path, double smoothing) {
    if (!(smoothing >= 0.0 && smoothing <= 1.0)) throw ConfigError("smoothing must lie in [0, 1]");
    const Eigen::Index n = path.size();
    if (n < 4) throw ConfigError("smoothing needs at least four samples");
    if (smoothing == 1.0) return path;

    const VectorXd& t = path.t();
    const Eigen::Index m = n - 2;
    VectorXd h(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) h[i] = t[i + 1] - t[i];

    // Q (n x m) holds the second-difference weights, R (m x m) the moment coupling.
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> q_entries;
    std::vector<Triplet> r_entries;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double hl = h[j];
        const double hr = h[j + 1];
        q_entries.emplace_back(j, j, 1.0 / hl);
        q_entries.emplace_back(j + 1, j, -1.0 / hl - 1.0 / hr);
        q_entries.emplace_back(j + 2, j, 1.0 / hr);
        r_entries.emplace_back(j, j, (hl + hr) / 3.0);
        if (j + 1 < m) {
            r_entries.emplace_back(j, j + 1, hr / 6.0);
            r_entries.emplace_back(j + 1, j, hr / 6.0);
        }
    }
    Eigen::SparseMatrix<double> Q(n, m);
    Eigen::SparseMatrix<double> R(m, m);
    Q.setFromTriplets(q_entries.begin(), q_entries.end());
    R.setFromTriplets(r_entries.begin(), r_entries.end());

    // Unit weights on interior samples, infinite weight on the pinned ends.
    Eigen::SparseMatrix<double> D(n, n);
    for (Eigen::Index i = 1; i + 1 < n; ++i) D.insert(i, i) = 1.0;
    const Eigen::SparseMatrix<double> DQ = D * Q;
    const double mu = smoothing / (1.0 - smoothing);
    const Eigen::SparseMatrix<double> system = Eigen::SparseMatrix<double>(mu * R) + Eigen::SparseMatrix<double>(Q.transpose() * DQ);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system);
    if (solver.info() != Eigen::Success) throw NumericalError("smoothing system is singular");

    const MatrixXd y = path.points().transpose();  // n x dim
    const MatrixXd rhs = Q.transpose() * y;
    const MatrixXd eta = solver.solve(rhs);
    MatrixXd g = y - DQ * eta;
    g.row(0) = y.row(0);
    g.row(n - 1) = y.row(n - 1);
    MatrixXd points = g.transpose();
    if (path.space().is_sphere()) {
        for (Eigen::Index i = 1; i + 1 < n; ++i) points.col(i) *= path.space().radius() / points.col(i).norm();
    }
    return path.with_points(std::move(points));
}

VectorXd gradient_norm_profile(const DiscretePath& path, const ScoreField& field, int n, DerivativeMode mode) {
    const DiscretePath uniform = reparameterize_constant_speed(path, static_cast<int>(path.size()));
    return functional_derivative_profile(uniform, field, n, mode).colwise().norm().transpose();
}

void AnalysisConfig::validate() const {
    if (n < 2) throw ConfigError("analysis.n must be at least 2");
    for (double d : deltas) {
        if (!(d >= 0.0)) throw ConfigError("analysis.deltas must be non-negative");
    }
    if (!(smoothing >= 0.0 && smoothing <= 1.0)) throw ConfigError("analysis.smoothing must lie in [0, 1]");
    if (optimize) bvp.validate();
}

std::string perturbed_variant_name(double delta) { return "perturbed_" + format_double(delta); }

std::optional<double> ComparisonReport::dataset_mean(const std::string& variant) const {
    double sum = 0.0;
    int count = 0;
    for (const auto& p : paths) {
        const auto it = p.variants.find(variant);
        if (it == p.variants.end() || !it->second.mean_grad_norm) continue;
        sum += *it->second.mean_grad_norm;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / count;
}

nlohmann::json ComparisonReport::to_json() const {
    nlohmann::json out;
    out["variants"] = variant_names;
    out["profile"] = "constant-speed resampled before evaluation";
    nlohmann::json dataset = nlohmann::json::object();
    for (const auto& v : variant_names) {
        const auto mean = dataset_mean(v);
        dataset[v] = mean ? nlohmann::json(*mean) : nlohmann::json(nullptr);
    }
    out["dataset_mean_grad_norm"] = dataset;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : paths) {
        nlohmann::json entry;
        entry["name"] = p.name;
        for (const auto& v : variant_names) {
            const auto it = p.variants.find(v);
            if (it == p.variants.end()) continue;
            nlohmann::json item;
            item["mean_grad_norm"] =
                it->second.mean_grad_norm ? nlohmann::json(*it->second.mean_grad_norm) : nlohmann::json(nullptr);
            if (it->second.error) item["error"] = *it->second.error;
            entry["variants"][v] = item;
        }
        rows.push_back(entry);
    }
    out["paths"] = rows;
    return out;
}

void ComparisonReport::write_csv(std::ostream& out) const {
    out << "path,variant,mean_grad_norm\n";
    for (const auto& p : paths) {
        for (const auto& v : variant_names) {
            const auto it = p.variants.find(v);
            if (it == p.variants.end()) continue;
            out << p.name << ',' << v << ','
                << (it->second.mean_grad_norm ? format_double(*it->second.mean_grad_norm) : std::string("failed"))
                << '\n';
        }
    }
}

ComparisonReport compare_trajectories(const TrajectorySet& set, const ScoreField& field,
                                      const AnalysisConfig& config) {
    config.validate();
    if (set.empty()) throw ConfigError("no trajectories to analyse");
    if (field.dim() != set.space().dim()) throw ConfigError("provider dimension does not match the trajectories");

    ComparisonReport report;
    report.t = quadrature_grid(config.n);
    report.variant_names.push_back("original");
    if (config.optimize) report.variant_names.push_back("optimized");
    for (double d : config.deltas) report.variant_names.push_back(perturbed_variant_name(d));
    if (config.smooth) report.variant_names.push_back("smoothed");

    for (const auto& entry : set.entries()) {
        ComparisonReport::PathEntry row{entry.name, {}};
        auto evaluate = [&](const std::string& variant, auto&& make_path) {
            VariantResult r;
            try {
                const DiscretePath p = make_path();
                r.profile = gradient_norm_profile(p, field, config.n, config.mode);
                r.mean_grad_norm = r.profile.mean();
            } catch (const Error& e) {
                r.error = e.what();
            }
            row.variants[variant] = std::move(r);
        };
        evaluate("original", [&] { return entry.path; });
        if (config.optimize) {
            evaluate("optimized", [&] {
                BvpResult solved = solve_bvp(set.space(), entry.path.start(), entry.path.end(), field, config.bvp);
                if (solved.error) std::rethrow_exception(solved.error);
                return solved.path;
            });
        }
        for (double d : config.deltas) {
            evaluate(perturbed_variant_name(d),
                     [&] { return perturb_path(entry.path, d, config.perturb_mode, config.seed); });
        }
        if (config.smooth) evaluate("smoothed", [&] { return smooth_path(entry.path, config.smoothing); });
        report.paths.push_back(std::move(row));
    }
    return report;
}

}  // namespace pdgeo
