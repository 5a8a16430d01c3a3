#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <random>

#include "magrod/finite_difference.hpp"
#include "magrod/kinematics.hpp"
#include "magrod/linalg.hpp"
#include "test_support.hpp"

using namespace magrod;

namespace {

/// Rotation built with Eigen's angle-axis type, independent of the library's exponential.
Mat3d angle_axis(const Vec3d& v) {
  const double t = v.norm();
  if (t == 0) return Mat3d::Identity();
  return Eigen::AngleAxisd(t, v / t).toRotationMatrix();
}

/// Spatial twist (omega, nu) from the finite-difference derivative of a pose.
Vec6d spatial_twist(const Pose& dh, const Pose& h) {
  const Mat3d w = dh.r * h.r.transpose();
  Vec6d out;
  out << vee(Mat3d(0.5 * (w - w.transpose()))), dh.p - w * h.p;
  return out;
}

}  // namespace

TEST_CASE("straight configuration") {
  const auto robot = discretize(RobotSpec::benchmark(), 7);
  const Pose h = forward_kinematics(robot, VectorXd::Zero(robot.dof()));
  CHECK((h.r - Mat3d::Identity()).norm() == doctest::Approx(0.0));
  CHECK((h.p - Vec3d(0, 0, 33e-3)).norm() == doctest::Approx(0.0).scale(1e-15));
  const auto pts = centerline(robot, VectorXd::Zero(robot.dof()));
  REQUIRE(pts.size() == 8);
  for (const auto& p : pts) CHECK(p.head<2>().norm() == 0.0);
}

TEST_CASE("single proximal joint rotates the whole rod") {
  const auto robot = discretize(RobotSpec::benchmark(), 7);
  VectorXd theta = VectorXd::Zero(robot.dof());
  theta.segment<3>(0) = Vec3d(0, std::numbers::pi / 2, 0);
  const Pose h = forward_kinematics(robot, theta);
  CHECK((h.p - angle_axis(theta.head<3>()) * Vec3d(0, 0, 33e-3)).norm() < 1e-15);
  CHECK((h.p - Vec3d(33e-3, 0, 0)).norm() < 1e-15);
}

TEST_CASE("planar arc matches the polygon sum") {
  for (int n : {7, 20, 60}) {
    const auto robot = discretize(RobotSpec::benchmark(), n);
    VectorXd theta = VectorXd::Zero(robot.dof());
    for (int i = 0; i < n; ++i) theta(3 * i + 1) = std::numbers::pi / (2 * n);
    Vec3d expected = Vec3d::Zero();
    double phi = 0;
    for (int i = 0; i < n; ++i) {
      phi += std::numbers::pi / (2 * n);
      expected += robot.rod_lengths[i] * Vec3d(std::sin(phi), 0, std::cos(phi));
    }
    const Pose h = forward_kinematics(robot, theta);
    CHECK((h.p - expected).norm() < 1e-15);
    CHECK((h.r * Vec3d::UnitZ() - Vec3d::UnitX()).norm() < 1e-14);
    for (const auto& p : centerline(robot, theta)) CHECK(std::abs(p.y()) < 1e-18);
  }
}

TEST_CASE("forward kinematics agrees with an independent chain product") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto robot = testing::equidistant_robot(1 + trial % 3, 4);
    const VectorXd theta = testing::random_vector(rng, robot.dof(), 0.5);
    Mat3d r = Mat3d::Identity();
    Vec3d p = Vec3d::Zero();
    for (int i = 0; i < robot.n_joints; ++i) {
      r = r * angle_axis(theta.segment<3>(3 * i));
      p += r * Vec3d(0, 0, robot.rod_lengths[i]);
    }
    const Pose h = forward_kinematics(robot, theta);
    CHECK((h.r - r).norm() < 1e-13);
    CHECK((h.p - p).norm() < 1e-15);
    CHECK((centerline(robot, theta).back() - p).norm() < 1e-15);
  }
}

TEST_CASE("space Jacobian reproduces the finite-difference spatial twist") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto robot = testing::equidistant_robot(1 + trial % 3, 3);
    const VectorXd theta = testing::random_vector(rng, robot.dof(), 0.5);
    const MatrixXd j = space_jacobian(robot, theta);
    const Pose h = forward_kinematics(robot, theta);
    const double step = 1e-6;
    for (int c = 0; c < robot.dof(); ++c) {
      VectorXd tp = theta, tm = theta;
      tp(c) += step;
      tm(c) -= step;
      const Pose hp = forward_kinematics(robot, tp), hm = forward_kinematics(robot, tm);
      Pose dh;
      dh.r = (hp.r - hm.r) / (2 * step);
      dh.p = (hp.p - hm.p) / (2 * step);
      const Vec6d fd = spatial_twist(dh, h);
      CHECK((j.col(c) - fd).norm() <= 1e-7 * std::max(1.0, fd.norm()));
    }
  }
}

TEST_CASE("log-pose Jacobian matches finite differences of the pose coordinates") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto robot = testing::equidistant_robot(1 + trial % 2, 3);
    const VectorXd theta = testing::random_vector(rng, robot.dof(), 0.15);
    auto h = [&](const VectorXd& t) -> VectorXd { return log_se3(forward_kinematics(robot, t)); };
    const MatrixXd fd = fd_jacobian(h, theta, {1e-5, true});
    const MatrixXd an = log_pose_jacobian(robot, theta);
    CHECK((an - fd).norm() <= 1e-7 * fd.norm());
  }
}

TEST_CASE("tip position Jacobian matches finite differences") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto robot = testing::equidistant_robot(1 + trial % 3, 3);
    const VectorXd theta = testing::random_vector(rng, robot.dof(), 0.6);
    auto tip = [&](const VectorXd& t) -> VectorXd { return forward_kinematics(robot, t).p; };
    const MatrixXd fd = fd_jacobian(tip, theta, {1e-5, true});
    CHECK((tip_position_jacobian(robot, theta) - fd).norm() <= 1e-8 * fd.norm());
  }
}

TEST_CASE("Jacobian at the straight configuration") {
  const auto robot = discretize(RobotSpec::benchmark(), 7);
  const MatrixXd j = space_jacobian(robot, VectorXd::Zero(robot.dof()));
  Eigen::Matrix<double, 6, 3> first;
  first << Mat3d::Identity(), Mat3d::Zero();
  CHECK((j.leftCols<3>() - first).norm() == 0.0);
  for (int i = 0; i < robot.n_joints; ++i) {
    const Mat3d lin = j.block<3, 3>(3, 3 * i);
    CHECK((lin - skew(robot.reference_position(i))).norm() < 1e-18);
  }
}

TEST_CASE("Jacobian columns are causal") {
  std::mt19937_64 rng(13);
  const auto robot = testing::equidistant_robot(2, 4);
  const VectorXd theta = testing::random_vector(rng, robot.dof(), 0.5);
  const MatrixXd j = space_jacobian(robot, theta);
  for (int i = 0; i < robot.n_joints - 1; ++i) {
    VectorXd moved = theta;
    moved.tail(robot.dof() - 3 * (i + 1)) += testing::random_vector(rng, robot.dof() - 3 * (i + 1), 0.5);
    const MatrixXd jm = space_jacobian(robot, moved);
    CHECK((jm.leftCols(3 * (i + 1)) - j.leftCols(3 * (i + 1))).norm() < 1e-15);
  }
}

TEST_CASE("space and body Jacobians share rank and angular norms") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto robot = testing::equidistant_robot(1 + trial % 3, 1 + trial % 4);
    const VectorXd theta = testing::random_vector(rng, robot.dof(), 0.7);
    const MatrixXd js = space_jacobian(robot, theta);
    const MatrixXd jb = body_jacobian(robot, theta);
    CHECK(numerical_rank(js) == numerical_rank(jb));
    for (int c = 0; c < robot.dof(); ++c)
      CHECK(js.col(c).head<3>().norm() == doctest::Approx(jb.col(c).head<3>().norm()).epsilon(1e-12));
  }
}

TEST_CASE("centerline arc lengths are the reference joint positions") {
  const auto robot = discretize(RobotSpec::benchmark(), 7);
  const auto s = centerline_arclength(robot);
  REQUIRE(s.size() == 8);
  CHECK(s.front() == 0.0);
  CHECK(s[6] == doctest::Approx(30e-3));
  CHECK(s.back() == doctest::Approx(33e-3));
}
