#include "magrod/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace magrod {

namespace {

const std::map<std::string, double>& unit_table(Dimension dim) {
  static const std::map<std::string, double> length{{"m", 1}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}};
  static const std::map<std::string, double> pressure{{"Pa", 1}, {"kPa", 1e3}, {"MPa", 1e6}, {"GPa", 1e9}};
  static const std::map<std::string, double> field{{"T", 1}, {"mT", 1e-3}, {"uT", 1e-6}};
  static const std::map<std::string, double> moment{{"Am^2", 1}, {"mAm^2", 1e-3}};
  static const std::map<std::string, double> area{{"m^4", 1}, {"mm^4", 1e-12}};
  static const std::map<std::string, double> angle{{"rad", 1}, {"deg", std::numbers::pi / 180}};
  static const std::map<std::string, double> none;
  switch (dim) {
    case Dimension::length: return length;
    case Dimension::pressure: return pressure;
    case Dimension::field: return field;
    case Dimension::moment: return moment;
    case Dimension::area_moment: return area;
    case Dimension::angle: return angle;
    case Dimension::dimensionless: return none;
  }
  return none;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(path + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + (path.empty() ? key : path + "." + key) + "'");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double quantity(const YAML::Node& n, Dimension dim, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key + ": expected a scalar quantity");
  return parse_quantity(n.Scalar(), dim, key);
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key + ": invalid value '" + (n.IsScalar() ? n.Scalar() : std::string("<non-scalar>")) + "'");
  }
}

Vec3d vector3(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 3) throw ConfigError(key + ": expected a list of three numbers");
  return {scalar<double>(n[0], key), scalar<double>(n[1], key), scalar<double>(n[2], key)};
}

Vec3d unit_direction(const YAML::Node& n, const std::string& key) {
  const Vec3d v = vector3(n, key);
  if (!(v.norm() > 0) || !v.allFinite()) throw ConfigError(key + ": direction must be a nonzero finite vector");
  return v.normalized();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void read_robot(const YAML::Node& n, RunConfig& c) {
  const std::string p = "robot";
  check_keys(n, p,
             {"flexible_length", "magnet_length", "area_inertia", "youngs_flexible", "youngs_magnet",
              "poisson_flexible", "poisson_magnet", "dipole_moment", "magnet_positions", "magnet_signs",
              "magnet_directions", "discretization"});
  RobotSpec& r = c.robot;
  if (n["flexible_length"]) r.flexible_length = quantity(n["flexible_length"], Dimension::length, join(p, "flexible_length"));
  if (n["magnet_length"]) r.magnet_length = quantity(n["magnet_length"], Dimension::length, join(p, "magnet_length"));
  if (n["area_inertia"]) r.area_inertia = quantity(n["area_inertia"], Dimension::area_moment, join(p, "area_inertia"));
  if (n["youngs_flexible"]) r.youngs_flexible = quantity(n["youngs_flexible"], Dimension::pressure, join(p, "youngs_flexible"));
  if (n["youngs_magnet"]) r.youngs_magnet = quantity(n["youngs_magnet"], Dimension::pressure, join(p, "youngs_magnet"));
  if (n["poisson_flexible"]) r.poisson_flexible = scalar<double>(n["poisson_flexible"], join(p, "poisson_flexible"));
  if (n["poisson_magnet"]) r.poisson_magnet = scalar<double>(n["poisson_magnet"], join(p, "poisson_magnet"));
  if (n["dipole_moment"]) r.dipole_moment = quantity(n["dipole_moment"], Dimension::moment, join(p, "dipole_moment"));
  if (const auto pos = n["magnet_positions"]) {
    require(pos.IsSequence(), "robot.magnet_positions: expected a list");
    r.magnet_positions.clear();
    for (const auto& e : pos) r.magnet_positions.push_back(quantity(e, Dimension::length, "robot.magnet_positions"));
    if (!n["magnet_signs"]) r.magnet_signs.assign(r.magnet_positions.size(), 1);
  }
  if (const auto signs = n["magnet_signs"]) {
    require(signs.IsSequence(), "robot.magnet_signs: expected a list");
    r.magnet_signs.clear();
    for (const auto& e : signs) r.magnet_signs.push_back(scalar<int>(e, "robot.magnet_signs"));
  }
  if (const auto dirs = n["magnet_directions"]) {
    require(dirs.IsSequence(), "robot.magnet_directions: expected a list");
    r.magnet_directions.clear();
    for (const auto& e : dirs) r.magnet_directions.push_back(unit_direction(e, "robot.magnet_directions"));
  }
  if (const auto d = n["discretization"]) {
    const std::string q = "robot.discretization";
    check_keys(d, q, {"layout", "rods_per_segment", "joints"});
    if (d["layout"]) {
      const auto s = scalar<std::string>(d["layout"], join(q, "layout"));
      if (s == "per_segment") c.discretization.layout = JointLayout::per_segment;
      else if (s == "uniform") c.discretization.layout = JointLayout::uniform;
      else throw ConfigError(q + ".layout: expected per_segment or uniform, got '" + s + "'");
    }
    if (d["rods_per_segment"]) c.discretization.rods_per_segment = scalar<int>(d["rods_per_segment"], join(q, "rods_per_segment"));
    if (d["joints"]) c.discretization.joints = scalar<int>(d["joints"], join(q, "joints"));
  }
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("robot.") + e.what());
  }
  require(c.discretization.rods_per_segment >= 1, "robot.discretization.rods_per_segment must be positive");
  require(c.discretization.joints >= r.n_magnets() + 1, "robot.discretization.joints must exceed the magnet count");
}

void read_field(const YAML::Node& n, RunConfig& c) {
  const std::string p = "field";
  check_keys(n, p, {"mode", "magnitude", "direction", "per_magnet", "sweep", "angles", "plane"});
  FieldConfig& f = c.field;
  if (n["mode"]) {
    const auto s = scalar<std::string>(n["mode"], "field.mode");
    if (s == "uniform") f.mode = FieldSpec::Mode::uniform;
    else if (s == "per_magnet") f.mode = FieldSpec::Mode::per_magnet;
    else throw ConfigError("field.mode: expected uniform or per_magnet, got '" + s + "'");
  }
  if (n["magnitude"]) f.magnitude = quantity(n["magnitude"], Dimension::field, "field.magnitude");
  require(f.magnitude >= 0, "field.magnitude must be non-negative");
  if (n["direction"]) f.direction = unit_direction(n["direction"], "field.direction");
  if (const auto pm = n["per_magnet"]) {
    require(pm.IsSequence(), "field.per_magnet: expected a list");
    f.per_magnet.clear();
    for (const auto& e : pm) {
      check_keys(e, "field.per_magnet[]", {"magnitude", "direction"});
      require(e["magnitude"] && e["direction"], "field.per_magnet entries need magnitude and direction");
      f.per_magnet.push_back(quantity(e["magnitude"], Dimension::field, "field.per_magnet.magnitude") *
                             unit_direction(e["direction"], "field.per_magnet.direction"));
    }
  }
  if (f.mode == FieldSpec::Mode::per_magnet)
    require(static_cast<int>(f.per_magnet.size()) == c.robot.n_magnets(),
            "field.per_magnet must list one field per magnet");
  if (const auto s = n["sweep"]) {
    check_keys(s, "field.sweep", {"start", "stop", "points"});
    if (s["start"]) f.sweep_start = quantity(s["start"], Dimension::field, "field.sweep.start");
    if (s["stop"]) f.sweep_stop = quantity(s["stop"], Dimension::field, "field.sweep.stop");
    if (s["points"]) f.sweep_points = scalar<int>(s["points"], "field.sweep.points");
  }
  require(f.sweep_points >= 1, "field.sweep.points must be positive");
  require(f.sweep_start >= 0 && f.sweep_stop >= f.sweep_start, "field.sweep must satisfy 0 <= start <= stop");
  if (n["angles"]) f.angles = scalar<int>(n["angles"], "field.angles");
  require(f.angles >= 2, "field.angles must be at least 2");
  if (n["plane"]) f.plane = unit_direction(n["plane"], "field.plane");
  require(f.plane.cross(DiscretizedRobot::tangent()).norm() > 1e-9, "field.plane must not be parallel to the tangent");
}

void read_solver(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "solver", {"tolerance", "max_iterations", "newton"});
  if (n["tolerance"]) c.solver.tolerance = scalar<double>(n["tolerance"], "solver.tolerance");
  if (n["max_iterations"]) c.solver.max_iterations = scalar<int>(n["max_iterations"], "solver.max_iterations");
  if (n["newton"]) c.solver.newton = scalar<bool>(n["newton"], "solver.newton");
  require(c.solver.tolerance > 0, "solver.tolerance must be positive");
  require(c.solver.max_iterations >= 1, "solver.max_iterations must be positive");
}

void read_objective(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "objective", {"index", "ball_radius", "domain", "radial", "angular", "polar", "normalized", "plane"});
  ObjectiveConfig& o = c.objective;
  if (n["index"]) {
    try {
      o.index = index_from_string(scalar<std::string>(n["index"], "objective.index"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("objective.index: ") + e.what());
    }
  }
  if (n["ball_radius"]) {
    const auto s = scalar<std::string>(n["ball_radius"], "objective.ball_radius");
    o.ball_radius = s == "auto" ? 0.0 : parse_quantity(s, Dimension::field, "objective.ball_radius");
  }
  require(o.ball_radius >= 0, "objective.ball_radius must be non-negative");
  if (n["domain"]) {
    const auto s = scalar<std::string>(n["domain"], "objective.domain");
    if (s == "disk") o.quadrature.domain = Domain::disk;
    else if (s == "ball") o.quadrature.domain = Domain::ball;
    else throw ConfigError("objective.domain: expected disk or ball, got '" + s + "'");
  }
  if (n["radial"]) o.quadrature.radial = scalar<int>(n["radial"], "objective.radial");
  if (n["angular"]) o.quadrature.angular = scalar<int>(n["angular"], "objective.angular");
  if (n["polar"]) o.quadrature.polar = scalar<int>(n["polar"], "objective.polar");
  if (n["normalized"]) o.normalized = scalar<bool>(n["normalized"], "objective.normalized");
  if (n["plane"]) o.quadrature.plane = unit_direction(n["plane"], "objective.plane");
  require(o.quadrature.radial >= 1 && o.quadrature.angular >= 1 && o.quadrature.polar >= 1,
          "objective quadrature orders must be positive");
  if (o.quadrature.domain == Domain::ball)
    require(o.quadrature.angular % o.quadrature.polar == 0, "objective.angular must be a multiple of objective.polar");
}

void read_optimize(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "optimize",
             {"n_magnets", "min_spacing", "restarts", "grid_resolution", "max_iterations", "initial_step",
              "step_tolerance", "heuristic"});
  OptimizeConfig& o = c.optimize;
  if (n["n_magnets"]) o.n_magnets = scalar<int>(n["n_magnets"], "optimize.n_magnets");
  if (n["min_spacing"]) {
    const auto s = scalar<std::string>(n["min_spacing"], "optimize.min_spacing");
    o.min_spacing = s == "auto" ? 0.0 : parse_quantity(s, Dimension::length, "optimize.min_spacing");
  }
  if (n["restarts"]) o.restarts = scalar<int>(n["restarts"], "optimize.restarts");
  if (n["grid_resolution"]) o.grid_resolution = scalar<int>(n["grid_resolution"], "optimize.grid_resolution");
  if (n["max_iterations"]) o.max_iterations = scalar<int>(n["max_iterations"], "optimize.max_iterations");
  if (n["initial_step"]) o.initial_step = scalar<double>(n["initial_step"], "optimize.initial_step");
  if (n["step_tolerance"]) o.step_tolerance = scalar<double>(n["step_tolerance"], "optimize.step_tolerance");
  if (n["heuristic"]) o.heuristic = scalar<bool>(n["heuristic"], "optimize.heuristic");
  require(o.n_magnets >= 1 && o.n_magnets <= 8, "optimize.n_magnets must lie in [1, 8]");
  require(o.restarts >= 1, "optimize.restarts must be positive");
  require(o.grid_resolution == 0 || o.grid_resolution >= 2, "optimize.grid_resolution must be 0 or at least 2");
  require(o.min_spacing >= 0, "optimize.min_spacing must be non-negative");
  require(o.initial_step > 0 && o.step_tolerance > 0, "optimize step sizes must be positive");
}

void read_convergence(const YAML::Node& n, RunConfig& c) {
  check_keys(n, "convergence", {"joint_counts", "reference"});
  if (const auto jc = n["joint_counts"]) {
    require(jc.IsSequence(), "convergence.joint_counts: expected a list");
    c.convergence.joint_counts.clear();
    for (const auto& e : jc) c.convergence.joint_counts.push_back(scalar<int>(e, "convergence.joint_counts"));
  }
  if (n["reference"]) c.convergence.reference = scalar<int>(n["reference"], "convergence.reference");
  const auto& j = c.convergence.joint_counts;
  require(!j.empty(), "convergence.joint_counts must not be empty");
  require(std::is_sorted(j.begin(), j.end()) && std::adjacent_find(j.begin(), j.end()) == j.end(),
          "convergence.joint_counts must be strictly increasing");
  require(c.convergence.reference > j.back(), "convergence.reference must exceed every joint count");
}

}  // namespace

double parse_quantity(const std::string& text, Dimension dim, const std::string& key) {
  const std::string s = trim(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || !std::isfinite(value)) throw ConfigError(key + ": cannot read a number from '" + text + "'");
  std::string unit;
  for (const char* q = end; *q; ++q)
    if (!std::isspace(static_cast<unsigned char>(*q)) && *q != '*' && *q != '.') unit += *q;
  if (unit.empty()) return value;
  const auto& table = unit_table(dim);
  const auto it = table.find(unit);
  if (it == table.end()) throw ConfigError(key + ": unknown unit '" + trim(std::string(end)) + "'");
  return value * it->second;
}

FieldSpec FieldConfig::field() const {
  if (mode == FieldSpec::Mode::uniform) return FieldSpec::make_uniform(magnitude * direction);
  VectorXd b(3 * per_magnet.size());
  for (std::size_t k = 0; k < per_magnet.size(); ++k) b.segment<3>(3 * k) = per_magnet[k];
  return FieldSpec::make_per_magnet(b);
}

std::vector<double> FieldConfig::sweep() const {
  std::vector<double> out;
  for (int i = 0; i < sweep_points; ++i)
    out.push_back(sweep_points == 1 ? sweep_start : sweep_start + (sweep_stop - sweep_start) * i / (sweep_points - 1));
  return out;
}

std::vector<double> FieldConfig::angle_grid() const {
  std::vector<double> out;
  for (int i = 0; i < angles; ++i) out.push_back(2 * std::numbers::pi * i / (angles - 1));
  return out;
}

DiscretizedRobot RunConfig::discretized() const {
  if (discretization.layout == JointLayout::per_segment) return discretize_per_segment(robot, discretization.rods_per_segment);
  return discretize(robot, discretization.joints, JointLayout::uniform);
}

DesignTemplate RunConfig::design_template() const {
  DesignTemplate t;
  t.spec = robot;
  t.rods_per_segment = discretization.rods_per_segment;
  return t;
}

ObjectiveOptions RunConfig::objective_options(int n_magnets, int workers) const {
  ObjectiveOptions o;
  o.index = objective.index;
  o.quadrature = objective.quadrature;
  o.normalized = objective.normalized;
  o.ball_radius = objective.ball_radius > 0 ? objective.ball_radius : default_ball_radius(design_template(), n_magnets);
  o.workers = workers;
  o.solve = solver;
  return o;
}

OptimizerOptions RunConfig::optimizer_options(int workers) const {
  OptimizerOptions o;
  o.objective = objective_options(optimize.n_magnets, 1);
  o.sense = default_sense(objective.index);
  o.max_iterations = optimize.max_iterations;
  o.step_tolerance = optimize.step_tolerance;
  o.initial_step = optimize.initial_step;
  o.restarts = optimize.restarts;
  o.seed = seed;
  o.min_spacing = optimize.min_spacing;
  o.workers = workers;
  return o;
}

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) return c;
  check_keys(root, "", {"robot", "field", "solver", "objective", "optimize", "convergence", "seed"});
  if (root["robot"]) read_robot(root["robot"], c);
  if (root["field"]) read_field(root["field"], c);
  if (root["solver"]) read_solver(root["solver"], c);
  if (root["objective"]) read_objective(root["objective"], c);
  if (root["optimize"]) read_optimize(root["optimize"], c);
  if (root["convergence"]) read_convergence(root["convergence"], c);
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_schema() {
  return R"(Configuration (YAML). Quantities accept unit suffixes; bare numbers are SI.
  length: m cm mm um | pressure: Pa kPa MPa GPa | field: T mT uT | moment: A m^2, mA m^2 | area moment: m^4 mm^4

robot:
  flexible_length: 30 mm        total flexible length
  magnet_length: 3 mm           length of every magnet
  area_inertia: 0.7854 mm^4     second moment of area
  youngs_flexible: 5 MPa
  youngs_magnet: 160 GPa
  poisson_flexible: 0.5         in (0, 0.5]
  poisson_magnet: 0.3           in (0, 0.5]
  dipole_moment: 1e-2 A m^2     per magnet
  magnet_positions: [33 mm]     distal end of each magnet, strictly increasing, last = total length
  magnet_signs: [1]             +1 or -1 per magnet (default all +1)
  magnet_directions: []         optional unit directions; default axial
  discretization:
    layout: per_segment         per_segment | uniform
    rods_per_segment: 6         per_segment layout
    joints: 7                   uniform layout
field:
  mode: uniform                 uniform | per_magnet
  magnitude: 5 mT
  direction: [1, 0, 0]
  per_magnet: []                list of {magnitude, direction}, one per magnet
  sweep: {start: 0 mT, stop: 50 mT, points: 51}
  angles: 33                    in-plane directions over [0, 2 pi] for workspace sweeps
  plane: [1, 0, 0]              in-plane direction spanning the actuation plane with the tangent
solver:
  tolerance: 1e-12              relative to lambda_min max(1, |theta|)
  max_iterations: 200
  newton: true
objective:
  index: manipulability         manipulability | distortion | unit
  ball_radius: auto             auto = 0.8 x the uniqueness bound of the least stiff design
  domain: disk                  disk | ball
  radial: 8
  angular: 32
  polar: 4                      ball only; angular must be a multiple
  normalized: false             report Z / V
  plane: [1, 0, 0]              disk plane together with the tangent
optimize:
  n_magnets: 2
  min_spacing: auto             auto = 1.5 magnet lengths
  restarts: 5
  grid_resolution: 40           0 disables the exhaustive landscape
  max_iterations: 100
  initial_step: 0.05            fraction of the total length
  step_tolerance: 1e-5          fraction of the total length
  heuristic: true               also run the Nelder-Mead baseline
convergence:
  joint_counts: [5, 10, 20, 40, 80]
  reference: 200
seed: 0
)";
}

}  // namespace magrod
