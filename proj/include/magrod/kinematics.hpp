#pragma once
/// @file kinematics.hpp
/// @brief Product-of-exponentials forward kinematics and manipulator Jacobians.

#include <vector>

#include "magrod/robot_model.hpp"

namespace magrod {

/// Per-joint rotations, cumulative products and left Jacobians for one configuration.
struct ChainState {
  std::vector<Mat3d> local;       ///< R_i = exp(theta_i)
  std::vector<Mat3d> cumulative;  ///< R_0 ... R_i
  std::vector<Mat3d> jac_left;    ///< J_l(theta_i)

  ChainState(const DiscretizedRobot& robot, const VectorXd& theta);
};

/// Screw of joint i: (theta_i, p_i x theta_i), a rotation about the reference joint position.
[[nodiscard]] Vec6d joint_screw(const DiscretizedRobot& robot, const VectorXd& theta, int i);

/// Distal pose of the chain.
[[nodiscard]] Pose forward_kinematics(const DiscretizedRobot& robot, const VectorXd& theta);

/// Joint positions followed by the distal tip (N + 1 points).
[[nodiscard]] std::vector<Vec3d> centerline(const DiscretizedRobot& robot, const VectorXd& theta);

/// Reference arc length of every centerline point.
[[nodiscard]] std::vector<double> centerline_arclength(const DiscretizedRobot& robot);

/// Spatial Jacobian: the spatial twist dH H^-1 produced by d(theta).
[[nodiscard]] MatrixXd space_jacobian(const DiscretizedRobot& robot, const VectorXd& theta);

/// Body Jacobian: the space Jacobian transported by the inverse product of joint exponentials.
[[nodiscard]] MatrixXd body_jacobian(const DiscretizedRobot& robot, const VectorXd& theta);

/// Derivative of the distal pose coordinates h = Log(H) with respect to theta.
[[nodiscard]] MatrixXd log_pose_jacobian(const DiscretizedRobot& robot, const VectorXd& theta);

/// Linear velocity Jacobian of the distal tip point (3 x 3N).
[[nodiscard]] MatrixXd tip_position_jacobian(const DiscretizedRobot& robot, const VectorXd& theta);

/// Largest distance from the points to their least-squares plane.
[[nodiscard]] double plane_fit_residual(const std::vector<Vec3d>& points);

}  // namespace magrod
