#include "magrod/energetics.hpp"

namespace magrod {

namespace {

VectorXd offset(const VectorXd& theta, const VectorXd& rest) {
  return rest.size() == 0 ? theta : VectorXd(theta - rest);
}

/// Sum of w_k = m_k x b_k over magnets at or distal to each joint.
std::vector<Vec3d> suffix_torques(const DiscretizedRobot& robot, const FieldSpec& field,
                                  const std::vector<Vec3d>& moments) {
  std::vector<Vec3d> w(robot.n_joints, Vec3d::Zero());
  for (int k = 0; k < robot.n_magnets(); ++k) w[robot.magnet_joints[k]] += moments[k].cross(field.at(k));
  for (int i = robot.n_joints - 2; i >= 0; --i) w[i] += w[i + 1];
  return w;
}

}  // namespace

double elastic_energy(const DiscretizedRobot& robot, const VectorXd& theta, const VectorXd& rest) {
  const VectorXd d = offset(theta, rest);
  return 0.5 * d.dot(robot.stiffness_diagonal().cwiseProduct(d));
}

VectorXd elastic_gradient(const DiscretizedRobot& robot, const VectorXd& theta, const VectorXd& rest) {
  return robot.stiffness_diagonal().cwiseProduct(offset(theta, rest));
}

std::vector<Vec3d> magnetic_moments(const DiscretizedRobot& robot, const ChainState& chain) {
  std::vector<Vec3d> m(robot.n_magnets());
  for (int k = 0; k < robot.n_magnets(); ++k)
    m[k] = chain.cumulative[robot.magnet_joints[k]] * robot.magnet_moments[k];
  return m;
}

std::vector<Vec3d> magnetic_moments(const DiscretizedRobot& robot, const VectorXd& theta) {
  return magnetic_moments(robot, ChainState(robot, theta));
}

double magnetic_energy(const DiscretizedRobot& robot, const FieldSpec& field, const ChainState& chain) {
  const auto m = magnetic_moments(robot, chain);
  double e = 0;
  for (int k = 0; k < robot.n_magnets(); ++k) e -= m[k].dot(field.at(k));
  return e;
}

double magnetic_energy(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  return magnetic_energy(robot, field, ChainState(robot, theta));
}

MatrixXd torque_matrix(const DiscretizedRobot& robot, const ChainState& chain) {
  const auto m = magnetic_moments(robot, chain);
  MatrixXd out = MatrixXd::Zero(robot.dof(), 3 * robot.n_magnets());
  for (int i = 0; i < robot.n_joints; ++i) {
    const Mat3d a = chain.jac_left[i] * chain.cumulative[i].transpose();
    for (int k = 0; k < robot.n_magnets(); ++k)
      if (robot.magnet_joints[k] >= i) out.block<3, 3>(3 * i, 3 * k) = a * skew(m[k]);
  }
  return out;
}

MatrixXd torque_matrix(const DiscretizedRobot& robot, const VectorXd& theta) {
  return torque_matrix(robot, ChainState(robot, theta));
}

MatrixXd torque_matrix_factorized(const DiscretizedRobot& robot, const VectorXd& theta) {
  const ChainState chain(robot, theta);
  const auto m = magnetic_moments(robot, chain);
  const int n = robot.n_joints;
  const int nm = robot.n_magnets();
  MatrixXd d = MatrixXd::Zero(3 * n, 3 * n);
  for (int i = 0; i < n; ++i)
    d.block<3, 3>(3 * i, 3 * i) = chain.cumulative[i] * chain.jac_left[i].transpose();
  MatrixXd p = MatrixXd::Zero(n, nm);
  for (int k = 0; k < nm; ++k) p.col(k).head(robot.magnet_joints[k] + 1).setOnes();
  MatrixXd u = MatrixXd::Zero(3 * n, 3 * nm);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < nm; ++k) u.block<3, 3>(3 * i, 3 * k) = p(i, k) * Mat3d::Identity();
  MatrixXd dm = MatrixXd::Zero(3 * nm, 3 * nm);
  for (int k = 0; k < nm; ++k) dm.block<3, 3>(3 * k, 3 * k) = skew(m[k]);
  return d.transpose() * u * dm;
}

VectorXd magnetic_gradient(const DiscretizedRobot& robot, const FieldSpec& field, const ChainState& chain) {
  const auto w = suffix_torques(robot, field, magnetic_moments(robot, chain));
  VectorXd g(robot.dof());
  for (int i = 0; i < robot.n_joints; ++i)
    g.segment<3>(3 * i) = -(chain.jac_left[i] * (chain.cumulative[i].transpose() * w[i]));
  return g;
}

VectorXd magnetic_gradient(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  return magnetic_gradient(robot, field, ChainState(robot, theta));
}

MatrixXd magnetic_hessian(const DiscretizedRobot& robot, const FieldSpec& field, const ChainState& chain,
                          const VectorXd& theta) {
  const int n = robot.n_joints;
  const auto m = magnetic_moments(robot, chain);
  const auto w = suffix_torques(robot, field, m);
  // c[j] = sum over magnets at or distal to joint j of [b_k]x [m_k]x.
  std::vector<Mat3d> c(n, Mat3d::Zero());
  for (int k = 0; k < robot.n_magnets(); ++k) c[robot.magnet_joints[k]] += skew(field.at(k)) * skew(m[k]);
  for (int i = n - 2; i >= 0; --i) c[i] += c[i + 1];
  const int last = robot.magnet_joints.empty() ? -1 : robot.magnet_joints.back();

  std::vector<Mat3d> a(n);
  for (int i = 0; i < n; ++i) a[i] = chain.jac_left[i] * chain.cumulative[i].transpose();

  MatrixXd h = MatrixXd::Zero(robot.dof(), robot.dof());
  for (int i = 0; i <= last; ++i) {
    const Vec3d v = theta.segment<3>(3 * i);
    const Vec3d rho = -(chain.cumulative[i].transpose() * w[i]);
    const Mat3d diag = -a[i] * c[i].transpose() * a[i].transpose() + jac_left_derivative_q(v, rho);
    h.block<3, 3>(3 * i, 3 * i) = sym(diag);
    for (int j = i + 1; j <= last; ++j) {
      const Mat3d blk = -a[i] * c[j] * a[j].transpose();
      h.block<3, 3>(3 * i, 3 * j) = blk;
      h.block<3, 3>(3 * j, 3 * i) = blk.transpose();
    }
  }
  return h;
}

MatrixXd magnetic_hessian(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  return magnetic_hessian(robot, field, ChainState(robot, theta), theta);
}

double total_energy(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  return elastic_energy(robot, theta) + magnetic_energy(robot, field, theta);
}

VectorXd total_gradient(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  return elastic_gradient(robot, theta) + magnetic_gradient(robot, field, theta);
}

}  // namespace magrod
