#include "pdgeo/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace pdgeo {

using nlohmann::json;

std::string format_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw Error("cannot format number");
    return std::string(buf, end);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, const std::string& where) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ConfigError(where + ": not a number: '" + text + "'");
    return value;
}

}  // namespace

PathTable read_path_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(source + ": empty path file");
    const auto header = split_fields(line);
    if (header.size() < 2 || header[0] != "t") throw ConfigError(source + ": header must start with 't'");
    for (std::size_t k = 1; k < header.size(); ++k) {
        if (header[k] != "x" + std::to_string(k - 1))
            throw ConfigError(source + ": expected column 'x" + std::to_string(k - 1) + "', found '" +
                              header[k] + "'");
    }
    const std::size_t dim = header.size() - 1;
    std::vector<double> ts;
    std::vector<double> coords;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_fields(line);
        const std::string where = source + ":" + std::to_string(row);
        if (fields.size() != header.size())
            throw ConfigError(where + ": expected " + std::to_string(header.size()) + " fields");
        ts.push_back(parse_number(fields[0], where));
        for (std::size_t k = 1; k < fields.size(); ++k) coords.push_back(parse_number(fields[k], where));
    }
    if (ts.empty()) throw ConfigError(source + ": no samples");
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (!(ts[i] > ts[i - 1])) throw ConfigError(source + ": t must be strictly increasing");
    }
    PathTable out;
    out.t = Eigen::Map<VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
    out.points = Eigen::Map<MatrixXd>(coords.data(), static_cast<Eigen::Index>(dim),
                                      static_cast<Eigen::Index>(ts.size()));
    return out;
}

PathTable read_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open " + file.string());
    return read_path_csv(in, file.string());
}

void write_path_csv(std::ostream& out, const VectorXd& t, const MatrixXd& points) {
    out << 't';
    for (Eigen::Index k = 0; k < points.rows(); ++k) out << ",x" << k;
    out << '\n';
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        out << format_double(t[i]);
        for (Eigen::Index k = 0; k < points.rows(); ++k) out << ',' << format_double(points(k, i));
        out << '\n';
    }
}

void write_path_csv(std::ostream& out, const DiscretePath& path) { write_path_csv(out, path.t(), path.points()); }

void write_path_csv(const std::filesystem::path& file, const DiscretePath& path) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    write_path_csv(out, path);
}

// ---------------------------------------------------------------------------

VectorXd vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(what + " must contain only numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json vector_to_json(const VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

namespace {

MatrixXd matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const VectorXd first = vector_from_json(j[0], what);
    MatrixXd m(rows, first.size());
    for (Eigen::Index r = 0; r < rows; ++r) {
        const VectorXd row = vector_from_json(j[static_cast<std::size_t>(r)], what);
        if (row.size() != first.size()) throw ConfigError(what + " has ragged rows");
        m.row(r) = row.transpose();
    }
    return m;
}

}  // namespace

GaussianMixture mixture_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("mixture spec must be an object");
    for (const char* key : {"weights", "means", "covariances"}) {
        if (!j.contains(key)) throw ConfigError(std::string("mixture spec missing '") + key + "'");
    }
    const VectorXd w = vector_from_json(j["weights"], "mixture weights");
    std::vector<double> weights(w.data(), w.data() + w.size());
    std::vector<VectorXd> means;
    for (const auto& m : j["means"]) means.push_back(vector_from_json(m, "mixture mean"));
    const json& cov = j["covariances"];
    if (cov.is_object()) {
        if (!cov.contains("diag")) throw ConfigError("covariances object must hold 'diag'");
        std::vector<VectorXd> variances;
        for (const auto& v : cov["diag"]) variances.push_back(vector_from_json(v, "diagonal covariance"));
        if (variances.size() != means.size()) throw ConfigError("mixture has mismatched component counts");
        return GaussianMixture::diagonal(std::move(weights), std::move(means), variances);
    }
    if (!cov.is_array()) throw ConfigError("covariances must be a list of matrices or {\"diag\": ...}");
    std::vector<MatrixXd> covs;
    for (const auto& c : cov) covs.push_back(matrix_from_json(c, "covariance"));
    return GaussianMixture(std::move(weights), std::move(means), std::move(covs));
}

json mixture_to_json(const GaussianMixture& m) {
    json weights = json::array(), means = json::array(), covs = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        weights.push_back(m.weight(i));
        means.push_back(vector_to_json(m.mean(i)));
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.covariance(i).rows(); ++r)
            rows.push_back(vector_to_json(m.covariance(i).row(r).transpose()));
        covs.push_back(std::move(rows));
    }
    return {{"weights", weights}, {"means", means}, {"covariances", covs}};
}

GridField grid_from_json(const json& j) {
    for (const char* key : {"origin", "spacing", "shape", "values"}) {
        if (!j.contains(key)) throw ConfigError(std::string("grid spec missing '") + key + "'");
    }
    std::vector<int> shape;
    for (const auto& n : j["shape"]) {
        if (!n.is_number_integer()) throw ConfigError("grid shape must hold integers");
        shape.push_back(n.get<int>());
    }
    const VectorXd values = vector_from_json(j["values"], "grid values");
    return GridField(vector_from_json(j["origin"], "grid origin"), vector_from_json(j["spacing"], "grid spacing"),
                     std::move(shape), std::vector<double>(values.data(), values.data() + values.size()));
}

json grid_to_json(const GridField& g) {
    return {{"origin", vector_to_json(g.origin())},
            {"spacing", vector_to_json(g.spacing())},
            {"shape", g.shape()},
            {"values", g.values()}};
}

json read_json_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

}  // namespace pdgeo
