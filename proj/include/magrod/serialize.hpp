#pragma once
/// @file serialize.hpp
/// @brief CSV and JSON outputs with lossless floating point, atomic file writes and readers.

#include <json.hpp>
#include <string>
#include <vector>

#include "magrod/oracles.hpp"
#include "magrod/optimizer.hpp"

namespace magrod {

using Json = nlohmann::ordered_json;

/// 17 significant digits, enough to round-trip any double.
[[nodiscard]] std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

[[nodiscard]] std::string to_csv(const CsvTable& table);
/// Throws std::runtime_error on ragged rows or unparsable cells.
[[nodiscard]] CsvTable parse_csv(const std::string& text);
[[nodiscard]] CsvTable read_csv(const std::string& path);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);
[[nodiscard]] std::string read_file(const std::string& path);

[[nodiscard]] std::string dump_json(const Json& j);
[[nodiscard]] Json read_json(const std::string& path);

[[nodiscard]] Json to_json(const VectorXd& v);
[[nodiscard]] Json to_json(const MatrixXd& m);
[[nodiscard]] VectorXd vector_from_json(const Json& j);
[[nodiscard]] MatrixXd matrix_from_json(const Json& j);

[[nodiscard]] Json to_json(const PlacementResult& r);
[[nodiscard]] Json to_json(const OptimizationReport& r);
[[nodiscard]] OptimizationReport report_from_json(const Json& j);
[[nodiscard]] Json to_json(const ConvergenceStudy& s);

[[nodiscard]] CsvTable landscape_table(const Landscape& land);
[[nodiscard]] CsvTable convergence_table(const ConvergenceStudy& s);

/// Column contracts of every CSV output, for --schema.
[[nodiscard]] std::string csv_schema();

}  // namespace magrod
