#include "magrod/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace magrod {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

/// Fills Voronoi lengths, effective moduli and stiffness from rods and joint positions.
void assemble_stiffness(DiscretizedRobot& robot) {
  const RobotSpec& spec = robot.spec;
  const int n = robot.n_joints;
  const double gf = spec.youngs_flexible / (2.0 * (1.0 + spec.poisson_flexible));
  const double gm = spec.youngs_magnet / (2.0 * (1.0 + spec.poisson_magnet));
  robot.voronoi_lengths.resize(n);
  robot.youngs.resize(n);
  robot.shear.resize(n);
  robot.stiffness.resize(n);
  for (int i = 0; i < n; ++i) {
    const double prev = i > 0 ? robot.rod_lengths[i - 1] : 0.0;
    const double ell = 0.5 * (prev + robot.rod_lengths[i]);
    const double lo = robot.joint_positions[i] - 0.5 * prev;
    const double hi = robot.joint_positions[i] + 0.5 * robot.rod_lengths[i];
    double in_magnet = 0;
    for (double lk : spec.magnet_positions) in_magnet += overlap(lo, hi, lk - spec.magnet_length, lk);
    in_magnet = std::min(in_magnet, ell);
    const double flex = ell - in_magnet;
    // Series combination of the materials covered by the Voronoi region.
    const double e = ell / (flex / spec.youngs_flexible + in_magnet / spec.youngs_magnet);
    const double g = ell / (flex / gf + in_magnet / gm);
    robot.voronoi_lengths[i] = ell;
    robot.youngs[i] = e;
    robot.shear[i] = g;
    const double bend = e * spec.area_inertia / ell;
    robot.stiffness[i] = Vec3d(bend, bend, 2.0 * g * spec.area_inertia / ell);
  }
}

void assign_moments(DiscretizedRobot& robot) {
  const RobotSpec& spec = robot.spec;
  robot.magnet_moments.clear();
  for (int k = 0; k < spec.n_magnets(); ++k) {
    Vec3d dir = spec.magnet_directions.empty() ? Vec3d::UnitZ() : spec.magnet_directions[k].normalized();
    robot.magnet_moments.push_back(spec.dipole_moment * spec.magnet_signs[k] * dir);
  }
}

}  // namespace

double RobotSpec::segment_flexible_length(int j) const {
  const double start = j == 0 ? 0.0 : magnet_positions[j - 1];
  return magnet_positions[j] - magnet_length - start;
}

void RobotSpec::validate() const {
  require(std::isfinite(flexible_length) && flexible_length > 0, "flexible_length must be positive");
  require(std::isfinite(magnet_length) && magnet_length > 0, "magnet_length must be positive");
  require(std::isfinite(area_inertia) && area_inertia > 0, "area_inertia must be positive");
  require(std::isfinite(youngs_flexible) && youngs_flexible > 0, "youngs_flexible must be positive");
  require(std::isfinite(youngs_magnet) && youngs_magnet > 0, "youngs_magnet must be positive");
  require(poisson_flexible > 0 && poisson_flexible <= 0.5, "poisson_flexible must lie in (0, 0.5]");
  require(poisson_magnet > 0 && poisson_magnet <= 0.5, "poisson_magnet must lie in (0, 0.5]");
  require(std::isfinite(dipole_moment) && dipole_moment >= 0, "dipole_moment must be non-negative");
  require(!magnet_positions.empty(), "magnet_positions must not be empty");
  require(magnet_signs.size() == magnet_positions.size(), "magnet_signs must match magnet_positions");
  require(magnet_directions.empty() || magnet_directions.size() == magnet_positions.size(),
          "magnet_directions must match magnet_positions");
  for (int s : magnet_signs) require(s == 1 || s == -1, "magnet_signs entries must be +1 or -1");
  for (const auto& d : magnet_directions) require(d.norm() > 0, "magnet_directions entries must be nonzero");
  const double tol = 1e-12 * total_length();
  for (std::size_t k = 1; k < magnet_positions.size(); ++k)
    require(magnet_positions[k] > magnet_positions[k - 1], "magnet_positions must be strictly increasing");
  for (int j = 0; j < n_magnets(); ++j)
    require(segment_flexible_length(j) >= -tol, "magnet_positions leave no room for magnet " + std::to_string(j));
  require(std::abs(magnet_positions.back() - total_length()) <= tol,
          "last magnet position must equal the total length");
}

RobotSpec RobotSpec::benchmark() { return RobotSpec{}; }

MatrixXd DiscretizedRobot::stiffness_matrix() const { return stiffness_diagonal().asDiagonal(); }

VectorXd DiscretizedRobot::stiffness_diagonal() const {
  VectorXd d(dof());
  for (int i = 0; i < n_joints; ++i) d.segment<3>(3 * i) = stiffness[i];
  return d;
}

double DiscretizedRobot::lambda_min() const {
  double v = stiffness[0].minCoeff();
  for (const auto& s : stiffness) v = std::min(v, s.minCoeff());
  return v;
}

double DiscretizedRobot::lambda_max() const {
  double v = 0;
  for (const auto& s : stiffness) v = std::max(v, s.maxCoeff());
  return v;
}

double DiscretizedRobot::block_lambda_max(int i) const { return stiffness[i].maxCoeff(); }

DiscretizedRobot discretize(const RobotSpec& spec, int n_joints, JointLayout layout) {
  spec.validate();
  const int nm = spec.n_magnets();
  require(n_joints >= nm + 1, "n_joints must be at least n_magnets + 1");
  const double total = spec.total_length();
  const double tiny = 1e-12 * total;

  DiscretizedRobot robot;
  robot.spec = spec;
  robot.n_joints = n_joints;
  robot.total_length = total;

  if (layout == JointLayout::per_segment) {
    std::vector<int> positive;
    for (int j = 0; j < nm; ++j)
      if (spec.segment_flexible_length(j) > tiny) positive.push_back(j);
    const int n_flex = n_joints - nm;
    require(static_cast<int>(positive.size()) <= n_flex,
            "n_joints too small to give every flexible segment a joint");
    std::vector<int> rods(nm, 0);
    if (!positive.empty()) {
      const int base = n_flex / static_cast<int>(positive.size());
      int rem = n_flex % static_cast<int>(positive.size());
      for (int j : positive) rods[j] = base + (rem-- > 0 ? 1 : 0);
    } else {
      require(n_flex == 0, "no flexible segment can receive joints");
    }
    for (int j = 0; j < nm; ++j) {
      const double start = j == 0 ? 0.0 : spec.magnet_positions[j - 1];
      const double f = std::max(0.0, spec.segment_flexible_length(j));
      for (int r = 0; r < rods[j]; ++r) {
        robot.joint_positions.push_back(start + r * f / rods[j]);
        robot.rod_lengths.push_back(f / rods[j]);
      }
      robot.magnet_joints.push_back(static_cast<int>(robot.joint_positions.size()));
      robot.joint_positions.push_back(spec.magnet_positions[j] - spec.magnet_length);
      robot.rod_lengths.push_back(spec.magnet_length);
      robot.snap_distance.push_back(0.0);
    }
  } else {
    const double h = total / n_joints;
    for (int i = 0; i < n_joints; ++i) {
      robot.joint_positions.push_back(i * h);
      robot.rod_lengths.push_back(h);
    }
    for (int k = 0; k < nm; ++k) {
      const double start = spec.magnet_positions[k] - spec.magnet_length;
      const int idx = std::clamp(static_cast<int>(std::lround(start / h)), 0, n_joints - 1);
      require(robot.magnet_joints.empty() || idx > robot.magnet_joints.back(),
              "n_joints too small to separate magnets");
      robot.magnet_joints.push_back(idx);
      robot.snap_distance.push_back(std::abs(idx * h - start));
    }
  }
  assemble_stiffness(robot);
  assign_moments(robot);
  return robot;
}

DiscretizedRobot discretize_per_segment(const RobotSpec& spec, int rods_per_segment) {
  spec.validate();
  require(rods_per_segment >= 1, "rods_per_segment must be positive");
  const double tiny = 1e-12 * spec.total_length();
  int n = spec.n_magnets();
  for (int j = 0; j < spec.n_magnets(); ++j)
    if (spec.segment_flexible_length(j) > tiny) n += rods_per_segment;
  return discretize(spec, n, JointLayout::per_segment);
}

FieldSpec FieldSpec::make_uniform(const Vec3d& b) {
  FieldSpec f;
  f.mode = Mode::uniform;
  f.uniform = b;
  return f;
}

FieldSpec FieldSpec::make_per_magnet(const VectorXd& b) {
  require(b.size() % 3 == 0, "per-magnet field must have 3 entries per magnet");
  FieldSpec f;
  f.mode = Mode::per_magnet;
  f.stacked = b;
  return f;
}

Vec3d FieldSpec::at(int k) const {
  if (mode == Mode::uniform) return uniform;
  return stacked.segment<3>(3 * k);
}

VectorXd FieldSpec::stacked_vector(int n_magnets) const {
  if (mode == Mode::per_magnet) {
    require(stacked.size() == 3 * n_magnets, "per-magnet field size does not match magnet count");
    return stacked;
  }
  VectorXd b(3 * n_magnets);
  for (int k = 0; k < n_magnets; ++k) b.segment<3>(3 * k) = uniform;
  return b;
}

double FieldSpec::max_magnitude(int n_magnets) const {
  double m = 0;
  for (int k = 0; k < n_magnets; ++k) m = std::max(m, at(k).norm());
  return m;
}

// Joint indices enter the bounds 1-based: joint k is preceded by k other joints, so a
// magnet on joint k is driven through k + 1 joints.

double uniqueness_field_bound(const DiscretizedRobot& robot) {
  double s = 0;
  for (int k = 0; k < robot.n_magnets(); ++k) s += (robot.magnet_joints[k] + 1) * robot.magnet_strength(k);
  return s > 0 ? std::numbers::pi / 4.0 * robot.lambda_min() / s : std::numeric_limits<double>::infinity();
}

double twist_free_field_bound(const DiscretizedRobot& robot) {
  double s = 0;
  for (int k = 0; k < robot.n_magnets(); ++k) s += robot.magnet_strength(k);
  return s > 0 ? std::sqrt(6.0) * robot.lambda_min() / s : std::numeric_limits<double>::infinity();
}

double lipschitz_constant(const DiscretizedRobot& robot, const FieldSpec& field) {
  double s = 0;
  for (int k = 0; k < robot.n_magnets(); ++k)
    s += 4.0 * (robot.magnet_joints[k] + 1) / std::numbers::pi * robot.magnet_strength(k) * field.at(k).norm();
  return s;
}

TorqueBounds torque_bounds(const DiscretizedRobot& robot, const FieldSpec& field) {
  TorqueBounds out;
  out.per_joint.assign(robot.n_joints, 0.0);
  double max_m = 0;
  for (int k = 0; k < robot.n_magnets(); ++k) {
    const double mb = robot.magnet_strength(k) * field.at(k).norm();
    for (int i = 0; i <= robot.magnet_joints[k]; ++i) out.per_joint[i] += mb;
    max_m = std::max(max_m, robot.magnet_strength(k));
  }
  double sq = 0;
  for (double t : out.per_joint) sq += t * t;
  out.torque_bound = std::sqrt(sq);
  const int last = robot.magnet_joints.empty() ? 0 : robot.magnet_joints.back() + 1;
  out.matrix_bound = std::sqrt(static_cast<double>(robot.n_magnets()) * last) * max_m;
  return out;
}

}  // namespace magrod
