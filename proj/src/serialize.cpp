#include "magrod/serialize.hpp"

#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace magrod {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += '\n';
  }
  return out;
}

namespace {

double parse_cell(const std::string& cell, std::size_t line) {
  if (cell == "nan") return std::nan("");
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::runtime_error("CSV line " + std::to_string(line) + ": cannot parse '" + cell + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(ss, line)) {
    ++n;
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    std::vector<double> row;
    for (const auto& c : split(line)) row.push_back(parse_cell(c, n));
    if (row.size() != t.header.size()) throw std::runtime_error("CSV line " + std::to_string(n) + ": wrong column count");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move '" + tmp.string() + "' to '" + path + "': " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json read_json(const std::string& path) { return Json::parse(read_file(path)); }

Json to_json(const VectorXd& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json to_json(const MatrixXd& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(to_json(VectorXd(m.row(r).transpose())));
  return j;
}

VectorXd vector_from_json(const Json& j) {
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

MatrixXd matrix_from_json(const Json& j) {
  if (j.empty()) return MatrixXd();
  MatrixXd m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) m.row(r) = vector_from_json(j[r]).transpose();
  return m;
}

Json to_json(const PlacementResult& r) {
  Json j;
  j["free_positions"] = r.design.free_positions;
  j["signs"] = r.design.signs;
  j["min_spacing"] = r.design.min_spacing;
  j["value"] = r.value;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["converged"] = r.converged;
  j["history"] = r.history;
  j["trajectory"] = r.trajectory;
  return j;
}

namespace {

PlacementResult placement_from_json(const Json& j) {
  PlacementResult r;
  r.design.free_positions = j.at("free_positions").get<std::vector<double>>();
  r.design.signs = j.at("signs").get<std::vector<int>>();
  r.design.min_spacing = j.at("min_spacing").get<double>();
  r.value = j.at("value").is_null() ? std::nan("") : j.at("value").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.evaluations = j.at("evaluations").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.history = j.at("history").get<std::vector<double>>();
  r.trajectory = j.at("trajectory").get<std::vector<std::vector<double>>>();
  return r;
}

}  // namespace

Json to_json(const OptimizationReport& r) {
  Json j;
  j["index"] = to_string(r.index);
  j["sense"] = to_string(r.sense);
  j["n_magnets"] = r.n_magnets;
  j["best_pattern"] = r.best_pattern;
  Json patterns = Json::array();
  for (const auto& p : r.patterns) {
    Json pj;
    pj["signs"] = p.signs;
    // NaN marks failed restarts; JSON has no NaN, so those become null.
    Json values = Json::array();
    for (double v : p.restart_values) values.push_back(std::isfinite(v) ? Json(v) : Json());
    pj["restart_values"] = values;
    pj["failures"] = p.failures;
    pj["best"] = to_json(p.best);
    if (!std::isfinite(p.best.value)) pj["best"]["value"] = nullptr;
    patterns.push_back(pj);
  }
  j["patterns"] = patterns;
  return j;
}

OptimizationReport report_from_json(const Json& j) {
  OptimizationReport r;
  r.index = index_from_string(j.at("index").get<std::string>());
  r.sense = j.at("sense").get<std::string>() == "maximize" ? Sense::maximize : Sense::minimize;
  r.n_magnets = j.at("n_magnets").get<int>();
  r.best_pattern = j.at("best_pattern").get<std::size_t>();
  for (const auto& pj : j.at("patterns")) {
    PatternResult p;
    p.signs = pj.at("signs").get<std::vector<int>>();
    for (const auto& v : pj.at("restart_values")) p.restart_values.push_back(v.is_null() ? std::nan("") : v.get<double>());
    p.failures = pj.at("failures").get<std::vector<std::string>>();
    p.best = placement_from_json(pj.at("best"));
    r.patterns.push_back(std::move(p));
  }
  return r;
}

Json to_json(const ConvergenceStudy& s) {
  auto finite = [](const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? Json(x) : Json());
    return a;
  };
  Json j;
  j["joint_counts"] = s.joint_counts;
  j["rmse"] = finite(s.rmse);
  j["position_error"] = finite(s.position_error);
  j["rotation_error"] = finite(s.rotation_error);
  j["distal_error"] = finite(s.distal_error);
  j["solved"] = s.solved;
  j["fitted_slope"] = std::isfinite(s.fitted_slope) ? Json(s.fitted_slope) : Json();
  return j;
}

CsvTable landscape_table(const Landscape& land) {
  CsvTable t;
  const std::size_t m = land.designs.empty() ? 0 : land.designs[0].size();
  for (std::size_t k = 0; k < m; ++k) t.header.push_back("L" + std::to_string(k) + "_m");
  t.header.push_back("value");
  t.header.push_back("normalized");
  for (std::size_t i = 0; i < land.designs.size(); ++i) {
    std::vector<double> row = land.designs[i];
    row.push_back(land.values[i]);
    row.push_back(land.normalized[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable convergence_table(const ConvergenceStudy& s) {
  CsvTable t;
  t.header = {"N", "rmse", "distal_error", "position_error_m", "rotation_error_rad"};
  for (std::size_t i = 0; i < s.joint_counts.size(); ++i)
    t.rows.push_back({static_cast<double>(s.joint_counts[i]), s.rmse[i], s.distal_error[i], s.position_error[i],
                      s.rotation_error[i]});
  return t;
}

std::string csv_schema() {
  return R"(CSV outputs (comma separated, header row, 17 significant digits, nan for failed samples)

simulate    centerline.csv   s_m, x_m, y_m, z_m              reference arc length and position of every joint and the tip
sweep       sweep.csv        field_T, axial_over_L, transverse_over_L, tip_angle_rad
                                                             distal deflection along and across the tangent, divided by L
workspace   workspace.csv    field_T, angle_rad, v_over_L, t_over_L
                                                             in-plane distal coordinates for b = B (cos a v + sin a t)
convergence convergence.csv  N, rmse, distal_error, position_error_m, rotation_error_rad
                                                             rmse is normalized by the total length
optimize    landscape_<signs>.csv  L0_m, ..., value, normalized
                                                             feasible grid designs; normalized rescales values to [0, 1]
)";
}

}  // namespace magrod
