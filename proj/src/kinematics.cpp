#include "magrod/kinematics.hpp"

#include <Eigen/SVD>
#include <algorithm>

namespace magrod {

ChainState::ChainState(const DiscretizedRobot& robot, const VectorXd& theta) {
  const int n = robot.n_joints;
  local.resize(n);
  cumulative.resize(n);
  jac_left.resize(n);
  Mat3d acc = Mat3d::Identity();
  for (int i = 0; i < n; ++i) {
    const Vec3d v = theta.segment<3>(3 * i);
    local[i] = exp_so3(v);
    jac_left[i] = jac_left_so3(v);
    acc = acc * local[i];
    cumulative[i] = acc;
  }
}

Vec6d joint_screw(const DiscretizedRobot& robot, const VectorXd& theta, int i) {
  const Vec3d w = theta.segment<3>(3 * i);
  Vec6d xi;
  xi << w, robot.reference_position(i).cross(w);
  return xi;
}

namespace {

/// exp of a joint screw: rotation about the joint's reference position.
Pose joint_exponential(const DiscretizedRobot& robot, const Mat3d& r, int i) {
  const Vec3d p = robot.reference_position(i);
  return {r, p - r * p};
}

Pose joint_product(const DiscretizedRobot& robot, const ChainState& chain) {
  Pose h;
  for (int i = 0; i < robot.n_joints; ++i) h = h * joint_exponential(robot, chain.local[i], i);
  return h;
}

}  // namespace

Pose forward_kinematics(const DiscretizedRobot& robot, const VectorXd& theta) {
  const ChainState chain(robot, theta);
  Pose reference;
  reference.p = Vec3d(0, 0, robot.total_length);
  return joint_product(robot, chain) * reference;
}

std::vector<Vec3d> centerline(const DiscretizedRobot& robot, const VectorXd& theta) {
  const ChainState chain(robot, theta);
  std::vector<Vec3d> pts;
  pts.reserve(robot.n_joints + 1);
  Vec3d p = Vec3d::Zero();
  pts.push_back(p);
  for (int i = 0; i < robot.n_joints; ++i) {
    p += chain.cumulative[i] * (robot.rod_lengths[i] * DiscretizedRobot::tangent());
    pts.push_back(p);
  }
  return pts;
}

std::vector<double> centerline_arclength(const DiscretizedRobot& robot) {
  std::vector<double> s(robot.joint_positions);
  s.push_back(robot.total_length);
  return s;
}

MatrixXd space_jacobian(const DiscretizedRobot& robot, const VectorXd& theta) {
  const ChainState chain(robot, theta);
  MatrixXd j(6, robot.dof());
  Pose prefix;
  for (int i = 0; i < robot.n_joints; ++i) {
    Eigen::Matrix<double, 6, 3> dxi;
    dxi << Mat3d::Identity(), skew(robot.reference_position(i));
    j.block<6, 3>(0, 3 * i) = adjoint(prefix) * jac_left_se3(joint_screw(robot, theta, i)) * dxi;
    prefix = prefix * joint_exponential(robot, chain.local[i], i);
  }
  return j;
}

MatrixXd body_jacobian(const DiscretizedRobot& robot, const VectorXd& theta) {
  const ChainState chain(robot, theta);
  return adjoint(joint_product(robot, chain).inverse()) * space_jacobian(robot, theta);
}

MatrixXd log_pose_jacobian(const DiscretizedRobot& robot, const VectorXd& theta) {
  const Vec6d h = log_se3(forward_kinematics(robot, theta));
  const Mat6d jl = jac_left_se3(h);
  return jl.partialPivLu().solve(space_jacobian(robot, theta));
}

MatrixXd tip_position_jacobian(const DiscretizedRobot& robot, const VectorXd& theta) {
  const MatrixXd j = space_jacobian(robot, theta);
  const Vec3d tip = forward_kinematics(robot, theta).p;
  return j.bottomRows<3>() - skew(tip) * j.topRows<3>();
}

double plane_fit_residual(const std::vector<Vec3d>& points) {
  if (points.size() < 4) return 0.0;
  Vec3d mean = Vec3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::MatrixX3d centered(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) centered.row(static_cast<Eigen::Index>(i)) = (points[i] - mean).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixX3d> svd(centered, Eigen::ComputeFullV);
  const Vec3d normal = svd.matrixV().col(2);
  return (centered * normal).cwiseAbs().maxCoeff();
}

}  // namespace magrod
