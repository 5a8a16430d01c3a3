#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "magrod/config.hpp"
#include "magrod/serialize.hpp"

using namespace magrod;

namespace {

std::string error_of(const std::string& yaml) {
  try {
    (void)parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("quantities convert to SI") {
  CHECK(parse_quantity("30 mm", Dimension::length, "k") == doctest::Approx(0.03));
  CHECK(parse_quantity("5 MPa", Dimension::pressure, "k") == doctest::Approx(5e6));
  CHECK(parse_quantity("10 mT", Dimension::field, "k") == doctest::Approx(0.01));
  CHECK(parse_quantity("1e-2 A m^2", Dimension::moment, "k") == doctest::Approx(1e-2));
  CHECK(parse_quantity("0.7854 mm^4", Dimension::area_moment, "k") == doctest::Approx(0.7854e-12));
  CHECK(parse_quantity("90 deg", Dimension::angle, "k") == doctest::Approx(M_PI / 2));
  CHECK(parse_quantity("0.25", Dimension::length, "k") == doctest::Approx(0.25));
  CHECK_THROWS_AS((void)parse_quantity("5 MPa", Dimension::length, "robot.flexible_length"), ConfigError);
  CHECK_THROWS_AS((void)parse_quantity("abc", Dimension::length, "k"), ConfigError);
}

TEST_CASE("configuration parsing and validation") {
  const RunConfig cfg = parse_config(R"(
robot:
  flexible_length: 40 mm
  magnet_positions: [20 mm, 46 mm]
  magnet_signs: [1, -1]
field:
  magnitude: 8 mT
  direction: [0, 1, 0]
seed: 11
)");
  CHECK(cfg.robot.flexible_length == doctest::Approx(0.04));
  CHECK(cfg.robot.n_magnets() == 2);
  CHECK(cfg.robot.magnet_signs[1] == -1);
  CHECK(cfg.field.field().uniform.y() == doctest::Approx(8e-3));
  CHECK(cfg.seed == 11);
  CHECK(cfg.discretized().n_magnets() == 2);

  CHECK(error_of("robot:\n  poisson_flexible: 0.7\n").find("poisson_flexible") != std::string::npos);
  CHECK(error_of("robot:\n  magnet_positions: [20 mm, 10 mm]\n").find("magnet_positions") != std::string::npos);
  CHECK(error_of("robot:\n  colour: red\n").find("robot.colour") != std::string::npos);
  CHECK(error_of("objective:\n  index: nonsense\n").find("objective.index") != std::string::npos);
  CHECK_FALSE(config_schema().empty());
}

TEST_CASE("CSV round-trips doubles bitwise") {
  CsvTable t{{"a", "b"}, {{0.1, 1.0 / 3.0}, {-2.5e-300, std::nan("")}, {std::numeric_limits<double>::infinity(), 0}}};
  const CsvTable r = parse_csv(to_csv(t));
  REQUIRE(r.header == t.header);
  REQUIRE(r.rows.size() == t.rows.size());
  CHECK(r.rows[0][0] == 0.1);
  CHECK(r.rows[0][1] == 1.0 / 3.0);
  CHECK(r.rows[1][0] == -2.5e-300);
  CHECK(std::isnan(r.rows[1][1]));
  CHECK(std::isinf(r.rows[2][0]));
  CHECK_THROWS((void)parse_csv("a,b\n1\n"));
}

TEST_CASE("JSON round-trips vectors, matrices and reports") {
  VectorXd v(3);
  v << 0.1, 1.0 / 7.0, -1e-200;
  CHECK(vector_from_json(Json::parse(dump_json(to_json(v)))) == v);
  MatrixXd m = MatrixXd::Random(3, 2);
  CHECK(matrix_from_json(Json::parse(dump_json(to_json(m)))) == m);

  OptimizationReport rep;
  rep.n_magnets = 2;
  PatternResult p;
  p.signs = {1, -1};
  p.best.design.free_positions = {0.0123};
  p.best.design.signs = {1, -1};
  p.best.value = 2.0 / 3.0;
  p.restart_values = {2.0 / 3.0, std::nan("")};
  p.failures = {"restart 1: no convergence"};
  rep.patterns.push_back(p);
  const auto back = report_from_json(Json::parse(dump_json(to_json(rep))));
  CHECK(back.best().best.value == 2.0 / 3.0);
  CHECK(back.best().best.design.free_positions[0] == 0.0123);
  CHECK(std::isnan(back.best().restart_values[1]));
  CHECK(back.best().failures.size() == 1);
}

TEST_CASE("atomic writes replace the target and leave no temporaries") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "magrod_atomic_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS((void)write_file_atomic((dir / "missing" / "x.txt").string(), "x"));
  fs::remove_all(dir);
}
