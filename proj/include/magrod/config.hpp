#pragma once
/// @file config.hpp
/// @brief Run configuration read from YAML with unit-suffixed quantities.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "magrod/optimizer.hpp"

namespace magrod {

/// Malformed or inconsistent configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physical dimension of a configuration quantity.
enum class Dimension { length, pressure, field, moment, area_moment, angle, dimensionless };

/// Parses "30 mm", "5 MPa", "10 mT", "1e-2 A m^2", "0.7854 mm^4" or a bare number (SI) into SI units.
[[nodiscard]] double parse_quantity(const std::string& text, Dimension dim, const std::string& key);

struct DiscretizationConfig {
  JointLayout layout = JointLayout::per_segment;
  int rods_per_segment = 6;
  int joints = 7;  ///< total joints for the uniform layout
};

struct FieldConfig {
  FieldSpec::Mode mode = FieldSpec::Mode::uniform;
  double magnitude = 5e-3;
  Vec3d direction = Vec3d::UnitX();
  std::vector<Vec3d> per_magnet;  ///< field vectors [T] for the per-magnet mode
  double sweep_start = 0;
  double sweep_stop = 50e-3;
  int sweep_points = 51;
  int angles = 33;                ///< in-plane directions over [0, 2 pi] for workspace sweeps
  Vec3d plane = Vec3d::UnitX();   ///< in-plane direction spanning the actuation plane with the tangent

  [[nodiscard]] FieldSpec field() const;
  [[nodiscard]] std::vector<double> sweep() const;
  [[nodiscard]] std::vector<double> angle_grid() const;
};

struct ObjectiveConfig {
  IndexKind index = IndexKind::manipulability;
  double ball_radius = 0;  ///< 0 selects the certified default
  QuadratureSpec quadrature;
  bool normalized = false;
};

struct OptimizeConfig {
  int n_magnets = 2;
  double min_spacing = 0;  ///< 0 selects 1.5 magnet lengths
  int restarts = 5;
  int grid_resolution = 40;
  int max_iterations = 100;
  double initial_step = 0.05;
  double step_tolerance = 1e-5;
  bool heuristic = true;  ///< also run the Nelder-Mead baseline
};

struct ConvergenceConfig {
  std::vector<int> joint_counts{5, 10, 20, 40, 80};
  int reference = 200;
};

struct RunConfig {
  RobotSpec robot = RobotSpec::benchmark();
  DiscretizationConfig discretization;
  FieldConfig field;
  SolveOptions solver;
  ObjectiveConfig objective;
  OptimizeConfig optimize;
  ConvergenceConfig convergence;
  std::uint64_t seed = 0;

  [[nodiscard]] DiscretizedRobot discretized() const;
  [[nodiscard]] DesignTemplate design_template() const;
  /// Objective options with the default radius resolved for n_magnets.
  [[nodiscard]] ObjectiveOptions objective_options(int n_magnets, int workers) const;
  [[nodiscard]] OptimizerOptions optimizer_options(int workers) const;
};

/// Reads and validates a configuration. Throws ConfigError.
[[nodiscard]] RunConfig load_config(const std::string& path);
[[nodiscard]] RunConfig parse_config(const std::string& yaml_text);

/// Documented configuration keys with defaults, for --schema.
[[nodiscard]] std::string config_schema();

}  // namespace magrod
