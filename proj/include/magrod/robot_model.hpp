#pragma once
/// @file robot_model.hpp
/// @brief Physical rod description, its spherical-joint discretization and field bounds.

#include <Eigen/Core>
#include <string>
#include <vector>

#include "magrod/liegroup.hpp"

namespace magrod {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Physical description of a rod with embedded axial micromagnets (SI units).
///
/// Magnet k occupies the arc-length interval [L_k - magnet_length, L_k], where L_k is
/// the entry of magnet_positions. The last magnet sits at the distal end, so the total
/// length is flexible_length + n_magnets * magnet_length.
struct RobotSpec {
  double flexible_length = 30e-3;
  double magnet_length = 3e-3;
  double area_inertia = 0.7854e-12;
  double youngs_flexible = 5e6;
  double youngs_magnet = 160e9;
  double poisson_flexible = 0.5;
  double poisson_magnet = 0.3;
  double dipole_moment = 1e-2;
  std::vector<double> magnet_positions{33e-3};
  std::vector<int> magnet_signs{1};
  /// Optional unit moment directions in the reference frame; empty means axial (sign * e_z).
  std::vector<Vec3d> magnet_directions;

  [[nodiscard]] int n_magnets() const { return static_cast<int>(magnet_positions.size()); }
  [[nodiscard]] double total_length() const { return flexible_length + n_magnets() * magnet_length; }
  /// Flexible length of the segment proximal to magnet j.
  [[nodiscard]] double segment_flexible_length(int j) const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Single distal magnet catheter used as the reference benchmark.
  [[nodiscard]] static RobotSpec benchmark();
};

enum class JointLayout {
  per_segment,  ///< same number of equal rods in every flexible segment, magnet joint at magnet start
  uniform,      ///< equal rods over the whole rod, magnet joints snapped to the nearest joint
};

/// Spherical-joint chain obtained from a RobotSpec.
struct DiscretizedRobot {
  RobotSpec spec;
  int n_joints = 0;
  std::vector<double> rod_lengths;      ///< l_i: rod following joint i
  std::vector<double> joint_positions;  ///< reference arc length of joint i
  std::vector<double> voronoi_lengths;  ///< (l_{i-1} + l_i) / 2
  std::vector<double> youngs;           ///< effective Young's modulus over the Voronoi region
  std::vector<double> shear;            ///< effective shear modulus over the Voronoi region
  std::vector<Vec3d> stiffness;         ///< diagonal of each 3x3 block in (x, y, z); z is the tangent
  std::vector<int> magnet_joints;       ///< ascending joint indices carrying magnets
  std::vector<Vec3d> magnet_moments;    ///< reference moments in the base frame
  std::vector<double> snap_distance;    ///< distance between magnet start and its joint
  double total_length = 0;

  [[nodiscard]] int dof() const { return 3 * n_joints; }
  [[nodiscard]] int n_magnets() const { return static_cast<int>(magnet_joints.size()); }
  [[nodiscard]] Vec3d reference_position(int i) const { return {0, 0, joint_positions[i]}; }
  [[nodiscard]] static Vec3d tangent() { return Vec3d::UnitZ(); }
  [[nodiscard]] double magnet_strength(int k) const { return magnet_moments[k].norm(); }

  /// Dense block-diagonal stiffness matrix.
  [[nodiscard]] MatrixXd stiffness_matrix() const;
  /// Stiffness diagonal stacked as a 3N vector.
  [[nodiscard]] VectorXd stiffness_diagonal() const;
  [[nodiscard]] double lambda_min() const;
  [[nodiscard]] double lambda_max() const;
  /// Largest eigenvalue of joint i's block (the bending stiffness for Poisson ratio > 0).
  [[nodiscard]] double block_lambda_max(int i) const;
  /// Bending stiffness E_i I / l_i of joint i.
  [[nodiscard]] double bending_stiffness(int i) const { return stiffness[i].x(); }
};

/// Builds the joint chain. Throws std::invalid_argument on invalid specs or joint counts.
[[nodiscard]] DiscretizedRobot discretize(const RobotSpec& spec, int n_joints,
                                          JointLayout layout = JointLayout::per_segment);

/// Builds a chain with a fixed number of flexible rods in every segment of positive length.
[[nodiscard]] DiscretizedRobot discretize_per_segment(const RobotSpec& spec, int rods_per_segment);

/// Uniform actuation field or independent per-magnet fields (tesla).
struct FieldSpec {
  enum class Mode { uniform, per_magnet };
  Mode mode = Mode::uniform;
  Vec3d uniform = Vec3d::Zero();
  VectorXd stacked;

  [[nodiscard]] static FieldSpec make_uniform(const Vec3d& b);
  [[nodiscard]] static FieldSpec make_per_magnet(const VectorXd& b);

  /// Field acting on magnet k.
  [[nodiscard]] Vec3d at(int k) const;
  /// Stacked field vector for n magnets.
  [[nodiscard]] VectorXd stacked_vector(int n_magnets) const;
  [[nodiscard]] double max_magnitude(int n_magnets) const;
};

/// Field magnitude below which the equilibrium is unique.
[[nodiscard]] double uniqueness_field_bound(const DiscretizedRobot& robot);
/// Field magnitude below which axial magnets produce no material twist.
[[nodiscard]] double twist_free_field_bound(const DiscretizedRobot& robot);
/// Upper bound on the spectral norm of the magnetic Hessian.
[[nodiscard]] double lipschitz_constant(const DiscretizedRobot& robot, const FieldSpec& field);

struct TorqueBounds {
  double matrix_bound = 0;  ///< bound on the spectral norm of the torque matrix
  double torque_bound = 0;  ///< bound on the norm of the generalized magnetic torque
  std::vector<double> per_joint;
};
[[nodiscard]] TorqueBounds torque_bounds(const DiscretizedRobot& robot, const FieldSpec& field);

}  // namespace magrod
