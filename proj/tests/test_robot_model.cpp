#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "magrod/energetics.hpp"
#include "magrod/robot_model.hpp"
#include "test_support.hpp"

using namespace magrod;

TEST_CASE("benchmark chain structure") {
  const auto robot = discretize(RobotSpec::benchmark(), 7);
  CHECK(robot.n_joints == 7);
  CHECK(robot.dof() == 21);
  REQUIRE(robot.magnet_joints.size() == 1);
  CHECK(robot.magnet_joints[0] == 6);
  CHECK(robot.joint_positions[6] == doctest::Approx(30e-3));
  double total = 0;
  for (int i = 0; i < 6; ++i) CHECK(robot.rod_lengths[i] == doctest::Approx(5e-3));
  for (double l : robot.rod_lengths) total += l;
  CHECK(robot.rod_lengths[6] == doctest::Approx(3e-3));
  CHECK(total == doctest::Approx(33e-3).epsilon(1e-14));
  CHECK(robot.voronoi_lengths[0] == doctest::Approx(2.5e-3));
  CHECK(robot.voronoi_lengths[3] == doctest::Approx(5e-3));
  CHECK(robot.voronoi_lengths[6] == doctest::Approx(4e-3));
}

TEST_CASE("frozen benchmark stiffness and bounds") {
  const auto robot = discretize(RobotSpec::benchmark(), 7);
  CHECK(robot.lambda_min() == doctest::Approx(0.0005236).epsilon(1e-12));
  CHECK(robot.bending_stiffness(6) == doctest::Approx(0.001570770548052224).epsilon(1e-12));
  CHECK(uniqueness_field_bound(robot) == doctest::Approx(0.005874778262212913).epsilon(1e-12));
  CHECK(twist_free_field_bound(robot) == doctest::Approx(0.1282552829321272).epsilon(1e-12));
}

TEST_CASE("lambda_min matches a dense eigen decomposition") {
  for (int n : {3, 7, 20, 51}) {
    const auto robot = discretize(RobotSpec::benchmark(), n);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(robot.stiffness_matrix());
    CHECK(robot.lambda_min() == doctest::Approx(eig.eigenvalues().minCoeff()).epsilon(1e-14));
    CHECK(robot.lambda_max() == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-14));
  }
}

TEST_CASE("uniform layout snaps magnets and fills Voronoi regions") {
  const auto robot = discretize(RobotSpec::benchmark(), 11, JointLayout::uniform);
  CHECK(robot.rod_lengths[0] == doctest::Approx(3e-3));
  CHECK(robot.magnet_joints[0] == 10);
  CHECK(robot.snap_distance[0] == doctest::Approx(0.0).scale(1e-3));
  double vor = 0;
  for (double v : robot.voronoi_lengths) vor += v;
  // Voronoi regions cover the rod minus the half rod past the last joint.
  CHECK(vor == doctest::Approx(33e-3 - 1.5e-3));

  const auto coarse = discretize(RobotSpec::benchmark(), 4, JointLayout::uniform);
  CHECK(coarse.magnet_joints[0] == 4 * 30 / 33);
  CHECK(coarse.snap_distance[0] > 0);
}

TEST_CASE("joints inside a magnet carry the magnet modulus") {
  const auto robot = discretize(RobotSpec::benchmark(), 66, JointLayout::uniform);
  const double ratio = robot.spec.youngs_magnet / robot.spec.youngs_flexible;
  int interior = 0;
  for (int i = 1; i < robot.n_joints; ++i) {
    const double lo = robot.joint_positions[i] - 0.5 * robot.rod_lengths[i - 1];
    const double hi = robot.joint_positions[i] + 0.5 * robot.rod_lengths[i];
    if (lo >= 30e-3 - 1e-12 && hi <= 33e-3 + 1e-12) {
      ++interior;
      CHECK(robot.youngs[i] / robot.spec.youngs_flexible == doctest::Approx(ratio).epsilon(1e-12));
      CHECK(robot.bending_stiffness(i) / robot.bending_stiffness(1) == doctest::Approx(ratio).epsilon(1e-12));
    }
  }
  CHECK(interior >= 4);
}

TEST_CASE("elastic energy of a smooth bend converges with refinement") {
  // Constant curvature over the flexible part, none over the magnet.
  const double kappa = 10.0;
  const auto spec = RobotSpec::benchmark();
  const double continuum = 0.5 * spec.youngs_flexible * spec.area_inertia * kappa * kappa * spec.flexible_length;
  for (int rods : {6, 49, 199}) {
    const auto robot = discretize_per_segment(spec, rods);
    VectorXd theta = VectorXd::Zero(robot.dof());
    for (int i = 0; i < robot.n_joints; ++i) {
      const double lo = robot.joint_positions[i] - (i > 0 ? 0.5 * robot.rod_lengths[i - 1] : 0.0);
      const double hi = std::min(robot.joint_positions[i] + 0.5 * robot.rod_lengths[i], spec.flexible_length);
      theta(3 * i) = kappa * std::max(0.0, hi - lo);
    }
    CHECK(elastic_energy(robot, theta) == doctest::Approx(continuum).epsilon(1e-3));
  }
}

TEST_CASE("field bounds scale as expected") {
  auto spec = RobotSpec::benchmark();
  const double b0 = uniqueness_field_bound(discretize(spec, 7));
  const double t0 = twist_free_field_bound(discretize(spec, 7));
  spec.dipole_moment *= 2;
  CHECK(uniqueness_field_bound(discretize(spec, 7)) == doctest::Approx(b0 / 2).epsilon(1e-14));
  CHECK(twist_free_field_bound(discretize(spec, 7)) == doctest::Approx(t0 / 2).epsilon(1e-14));

  // Refining the flexible part scales lambda_min, and with it the twist bound, linearly.
  const auto base = RobotSpec::benchmark();
  const double t6 = twist_free_field_bound(discretize_per_segment(base, 6));
  const double t12 = twist_free_field_bound(discretize_per_segment(base, 12));
  const double t24 = twist_free_field_bound(discretize_per_segment(base, 24));
  CHECK(t12 / t6 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(t24 / t6 == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("Lipschitz and torque bounds dominate the exact quantities") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int nm = 1 + trial % 4;
    const auto robot = testing::equidistant_robot(nm, 3, trial % 2 == 0, &rng);
    const FieldSpec field = FieldSpec::make_per_magnet(testing::random_vector(rng, 3 * nm, 0.01));
    const VectorXd theta = testing::random_vector(rng, robot.dof(), 0.4);
    const MatrixXd h = magnetic_hessian(robot, field, theta);
    const MatrixXd m = torque_matrix(robot, theta);
    const auto tb = torque_bounds(robot, field);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h);
    CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() <= lipschitz_constant(robot, field) * (1 + 1e-12));
    const VectorXd b = field.stacked_vector(nm);
    CHECK((m * b).norm() <= tb.torque_bound * (1 + 1e-12));
    CHECK(magnetic_gradient(robot, field, theta).norm() <= tb.torque_bound * (1 + 1e-12));
    Eigen::JacobiSVD<MatrixXd> svd(m);
    CHECK(svd.singularValues()(0) <= tb.matrix_bound * (1 + 1e-12));
  }
}

TEST_CASE("bounds for a single distal magnet") {
  const auto robot = discretize(RobotSpec::benchmark(), 7);
  const FieldSpec field = FieldSpec::make_uniform(Vec3d(0.01, 0, 0));
  CHECK(lipschitz_constant(robot, field) == doctest::Approx(4 * 7 / std::numbers::pi * 0.01 * 0.01));
  const auto zero = torque_bounds(robot, FieldSpec::make_uniform(Vec3d::Zero()));
  CHECK(zero.torque_bound == 0);
  CHECK(zero.matrix_bound == doctest::Approx(std::sqrt(7.0) * 0.01));
}

TEST_CASE("invalid specs are rejected with the field name") {
  auto expect_message = [](RobotSpec s, const char* field) {
    try {
      s.validate();
      FAIL("expected rejection of " << field);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  RobotSpec s = RobotSpec::benchmark();
  s.poisson_flexible = 0.7;
  expect_message(s, "poisson_flexible");
  s = RobotSpec::benchmark();
  s.youngs_magnet = -1;
  expect_message(s, "youngs_magnet");
  s = RobotSpec::benchmark();
  s.flexible_length = 30e-3;
  s.magnet_positions = {20e-3, 15e-3, 39e-3};
  s.magnet_signs = {1, 1, 1};
  expect_message(s, "magnet_positions");
  s = RobotSpec::benchmark();
  s.magnet_signs = {2};
  expect_message(s, "magnet_signs");
  s = RobotSpec::benchmark();
  s.magnet_positions = {30e-3};
  expect_message(s, "last magnet");
  CHECK_THROWS_AS((void)discretize(RobotSpec::benchmark(), 1), std::invalid_argument);
}
