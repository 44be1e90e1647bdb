#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pdgeo/density.hpp"
#include "pdgeo/path.hpp"

namespace pdgeo {

// Shortest decimal text that round-trips the binary64 value.
std::string format_double(double value);

// Path interchange CSV: header `t,x0,...,x{d-1}`, one sample per row.
struct PathTable {
    VectorXd t;
    MatrixXd points;  // dim x rows
};

PathTable read_path_csv(std::istream& in, const std::string& source = "<stream>");
PathTable read_path_csv(const std::filesystem::path& file);
void write_path_csv(std::ostream& out, const VectorXd& t, const MatrixXd& points);
void write_path_csv(std::ostream& out, const DiscretePath& path);
void write_path_csv(const std::filesystem::path& file, const DiscretePath& path);

// Mixture JSON: {"weights":[...], "means":[[...],...],
//                "covariances":[[[...],...],...] | {"diag":[[...],...]}}
GaussianMixture mixture_from_json(const nlohmann::json& j);
nlohmann::json mixture_to_json(const GaussianMixture& m);

// Grid JSON: {"origin":[...], "spacing":[...], "shape":[...], "values":[...]} with C-order values.
GridField grid_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const GridField& g);

nlohmann::json read_json_file(const std::filesystem::path& file);
VectorXd vector_from_json(const nlohmann::json& j, const std::string& what);
nlohmann::json vector_to_json(const VectorXd& v);

}  // namespace pdgeo
