#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pelab/geometry.hpp"

namespace pelab {

using Json = nlohmann::ordered_json;

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

std::string metric_to_csv(const WarpedMetric& g);
std::string tensor_to_csv(const RadialSymmetric2Tensor& h);
std::string scalar_to_csv(const RadialScalarField& f);
// Parses the r,u,v table written by metric_to_csv onto an existing grid.
WarpedMetric metric_from_csv(const std::string& text, const RadialGrid& grid);

Json metric_to_json(const WarpedMetric& g);
WarpedMetric metric_from_json(const Json& j);

// Generic CSV with a header row; every value printed by format_double.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

std::string read_file(const std::string& path);
// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);
std::string sha256_hex(const std::string& content);

}  // namespace pelab
