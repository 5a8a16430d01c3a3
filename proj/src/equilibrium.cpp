#include "magrod/equilibrium.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "magrod/linalg.hpp"

namespace magrod {

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::fixed_point: return "fixed_point";
    case SolverKind::damped_newton: return "damped_newton";
    case SolverKind::backward_iteration: return "backward_iteration";
  }
  return "unknown";
}

const char* to_string(ActuationClass c) {
  switch (c) {
    case ActuationClass::underactuated: return "underactuated";
    case ActuationClass::fully_actuated: return "fully-actuated";
    case ActuationClass::redundant: return "redundant";
  }
  return "unknown";
}

bool uniqueness_certified(const DiscretizedRobot& robot, const FieldSpec& field) {
  return field.max_magnitude(robot.n_magnets()) < uniqueness_field_bound(robot);
}

namespace {

struct Evaluation {
  double energy = 0;
  double scale = 0;  ///< magnitude of the energy terms, for roundoff-level comparisons
  VectorXd gradient;
};

Evaluation evaluate(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  const ChainState chain(robot, theta);
  const double ee = elastic_energy(robot, theta);
  const double em = magnetic_energy(robot, field, chain);
  Evaluation out;
  out.energy = ee + em;
  // Opposite magnets can cancel in the net magnetic energy; roundoff follows the individual terms.
  out.scale = std::abs(ee);
  for (int k = 0; k < robot.n_magnets(); ++k) out.scale += robot.magnet_strength(k) * field.at(k).norm();
  out.gradient = elastic_gradient(robot, theta) + magnetic_gradient(robot, field, chain);
  return out;
}

double stopping_threshold(const DiscretizedRobot& robot, const VectorXd& theta, double tolerance) {
  return tolerance * robot.lambda_min() * std::max(1.0, theta.norm());
}

bool all_finite(const VectorXd& v) { return v.allFinite(); }

}  // namespace

EquilibriumResult solve_equilibrium(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& init,
                                    const SolveOptions& options) {
  EquilibriumResult res;
  res.theta = init.size() == 0 ? VectorXd::Zero(robot.dof()) : init;
  if (res.theta.size() != robot.dof()) throw std::invalid_argument("init has the wrong dimension");
  if (!all_finite(res.theta)) throw std::invalid_argument("init must be finite");
  res.uniqueness_certified = uniqueness_certified(robot, field);

  const VectorXd lambda = robot.stiffness_diagonal();
  const double lip = lipschitz_constant(robot, field);
  const double fixed_alpha = lip > 0 ? std::min(1.0, 0.9 * robot.lambda_min() / lip) : 1.0;

  Evaluation cur = evaluate(robot, field, res.theta);
  res.energy_history.push_back(cur.energy);
  auto fail = [&](const std::string& why) {
    res.residual_norm = cur.gradient.norm();
    res.converged = false;
    throw SolveFailure(why, res);
  };
  if (!std::isfinite(cur.energy) || !all_finite(cur.gradient)) fail("non-finite energy at the initial guess");

  for (res.iterations = 0;; ++res.iterations) {
    const double gnorm = cur.gradient.norm();
    if (gnorm <= stopping_threshold(robot, res.theta, options.tolerance)) break;
    if (res.iterations >= options.max_iterations)
      fail("equilibrium solve did not converge in " + std::to_string(options.max_iterations) + " iterations");

    // Candidate directions: (shifted) Newton, then the preconditioned fixed point.
    struct Candidate {
      VectorXd dir;
      double alpha;
      SolverKind kind;
    };
    std::vector<Candidate> candidates;
    if (options.newton) {
      const MatrixXd s = stiffness_hessian(robot, field, res.theta);
      Eigen::LLT<MatrixXd> llt(s);
      // Outside the certified regime S can be indefinite; shift it by a multiple of Lambda until it factors.
      for (double shift = 1e-3; llt.info() != Eigen::Success && shift < 1e6; shift *= 4) {
        MatrixXd shifted = s;
        shifted.diagonal() += shift * lambda;
        llt.compute(shifted);
      }
      if (llt.info() == Eigen::Success) {
        VectorXd p = -llt.solve(cur.gradient);
        if (all_finite(p) && p.dot(cur.gradient) < 0) candidates.push_back({std::move(p), 1.0, SolverKind::damped_newton});
      }
    }
    candidates.push_back({-cur.gradient.cwiseQuotient(lambda), fixed_alpha, SolverKind::fixed_point});

    bool accepted = false;
    for (const auto& cand : candidates) {
      const double slope = cand.dir.dot(cur.gradient);
      double alpha = cand.alpha;
      for (int ls = 0; ls < 60 && !accepted; ++ls, alpha *= 0.5) {
        const VectorXd trial = res.theta + alpha * cand.dir;
        Evaluation next = evaluate(robot, field, trial);
        if (!std::isfinite(next.energy) || !all_finite(next.gradient)) continue;
        const double roundoff = 64 * std::numeric_limits<double>::epsilon() * std::max(cur.scale, next.scale);
        const bool armijo = next.energy <= cur.energy + 1e-4 * alpha * slope;
        const bool flat = next.energy <= cur.energy + roundoff && next.gradient.norm() < gnorm;
        if (armijo || flat) {
          res.theta = trial;
          // Record a non-increasing sequence; a flat step may differ from the previous energy by roundoff.
          next.energy = std::min(next.energy, cur.energy);
          cur = std::move(next);
          res.energy_history.push_back(cur.energy);
          res.solver = cand.kind;
          accepted = true;
        }
      }
      if (accepted) break;
    }
    if (!accepted) fail("line search failed to decrease the energy");
  }
  res.residual_norm = cur.gradient.norm();
  res.converged = true;
  return res;
}

std::vector<EquilibriumResult> continuation_solve(const DiscretizedRobot& robot, const std::vector<FieldSpec>& path,
                                                  const SolveOptions& options) {
  std::vector<EquilibriumResult> out;
  out.reserve(path.size());
  VectorXd init = VectorXd::Zero(robot.dof());
  for (std::size_t i = 0; i < path.size(); ++i) {
    try {
      out.push_back(solve_equilibrium(robot, path[i], init, options));
    } catch (const SolveFailure& e) {
      throw SolveFailure(std::string(e.what()) + " at path index " + std::to_string(i), e.best(),
                         static_cast<int>(i));
    }
    init = out.back().theta;
  }
  return out;
}

MatrixXd stiffness_hessian(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  MatrixXd s = magnetic_hessian(robot, field, theta);
  s.diagonal() += robot.stiffness_diagonal();
  return s;
}

namespace {

/// Cholesky of S after confirming positive definiteness; names the smallest eigenvalue otherwise.
Eigen::LLT<MatrixXd> factor_positive(const MatrixXd& s) {
  Eigen::LLT<MatrixXd> llt(s);
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(s, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (llt.info() != Eigen::Success || !(lmin > 0))
    throw std::domain_error("stiffness Hessian is not positive definite (smallest eigenvalue " +
                            std::to_string(lmin) + ")");
  return llt;
}

}  // namespace

VectorXd compliance(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta,
                    const VectorXd& delta_b) {
  if (delta_b.size() != 3 * robot.n_magnets())
    throw std::invalid_argument("field perturbation must have 3 entries per magnet");
  const auto llt = factor_positive(stiffness_hessian(robot, field, theta));
  return llt.solve(torque_matrix(robot, theta) * delta_b);
}

MatrixXd uniform_field_restriction(int n_magnets) {
  MatrixXd u(3 * n_magnets, 3);
  for (int k = 0; k < n_magnets; ++k) u.middleRows<3>(3 * k).setIdentity();
  return u;
}

MatrixXd ActuationJacobian::uniform() const { return jb * uniform_field_restriction(n_magnets); }

ActuationJacobian actuation_jacobian(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  ActuationJacobian out;
  out.n_magnets = robot.n_magnets();
  out.s = stiffness_hessian(robot, field, theta);
  out.torque = torque_matrix(robot, theta);
  const auto llt = factor_positive(out.s);
  out.equilibrium = llt.solve(out.torque);
  out.jb = space_jacobian(robot, theta) * out.equilibrium;
  return out;
}

ControllableDof controllable_dof(const MatrixXd& jb) {
  // Columns come in per-magnet triples, and each magnet drives at most two independent directions.
  const int effective = jb.cols() % 3 == 0 ? 2 * static_cast<int>(jb.cols()) / 3 : static_cast<int>(jb.cols());
  ControllableDof out;
  out.rank = jb.size() == 0 ? 0 : numerical_rank(jb);
  if (out.rank < 6) {
    out.label = ActuationClass::underactuated;
  } else {
    out.label = effective > 6 ? ActuationClass::redundant : ActuationClass::fully_actuated;
    out.redundant = std::max(0, effective - 6);
  }
  return out;
}

ControllableDof controllable_dof(const ActuationJacobian& j) { return controllable_dof(j.jb); }

VectorXd material_twist(const DiscretizedRobot& robot, const VectorXd& theta) {
  VectorXd t(robot.n_joints);
  for (int i = 0; i < robot.n_joints; ++i) t(i) = theta.segment<3>(3 * i).dot(DiscretizedRobot::tangent());
  return t;
}

bool has_axial_moments(const DiscretizedRobot& robot, double tol) {
  for (const auto& m : robot.magnet_moments)
    if (m.cross(DiscretizedRobot::tangent()).norm() > tol * std::max(1.0, m.norm())) return false;
  return true;
}

EquilibriumResult backward_iteration_solve(const DiscretizedRobot& robot, const FieldSpec& field, double tol,
                                           int max_iterations) {
  if (!has_axial_moments(robot)) throw std::invalid_argument("backward iteration requires axial magnet moments");
  EquilibriumResult res;
  res.solver = SolverKind::backward_iteration;
  res.uniqueness_certified = uniqueness_certified(robot, field);
  res.theta = VectorXd::Zero(robot.dof());
  const int n = robot.n_joints;
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    const ChainState chain(robot, res.theta);
    const auto m = magnetic_moments(robot, chain);
    std::vector<Vec3d> w(n, Vec3d::Zero());
    for (int k = 0; k < robot.n_magnets(); ++k) w[robot.magnet_joints[k]] += m[k].cross(field.at(k));
    for (int i = n - 2; i >= 0; --i) w[i] += w[i + 1];
    VectorXd next(robot.dof());
    for (int i = 0; i < n; ++i)
      next.segment<3>(3 * i) = chain.cumulative[i].transpose() * w[i] / robot.block_lambda_max(i);
    const double step = (next - res.theta).norm();
    res.theta = std::move(next);
    if (!all_finite(res.theta)) break;
    if (step <= tol * std::max(1.0, res.theta.norm())) {
      res.residual_norm = total_gradient(robot, field, res.theta).norm();
      res.energy_history.push_back(total_energy(robot, field, res.theta));
      res.converged = true;
      ++res.iterations;
      return res;
    }
  }
  res.residual_norm = all_finite(res.theta) ? total_gradient(robot, field, res.theta).norm()
                                            : std::numeric_limits<double>::infinity();
  throw SolveFailure("backward iteration did not converge", res);
}

VectorXd planar_small_angle_solution(const DiscretizedRobot& robot, const FieldSpec& field, const Vec3d& in_plane) {
  if (!has_axial_moments(robot)) throw std::invalid_argument("planar solution requires axial magnet moments");
  const Vec3d t = DiscretizedRobot::tangent();
  const Vec3d nrm = t.cross(in_plane);
  if (nrm.norm() <= 1e-12 * in_plane.norm() || in_plane.norm() == 0)
    throw std::invalid_argument("plane direction must not be parallel to the tangent");
  const Vec3d n = nrm.normalized();
  const double bmax = field.max_magnitude(robot.n_magnets());
  for (int k = 0; k < robot.n_magnets(); ++k)
    if (std::abs(field.at(k).dot(n)) > 1e-12 * std::max(bmax, 1e-300))
      throw std::invalid_argument("field on magnet " + std::to_string(k) + " leaves the plane");
  VectorXd theta = VectorXd::Zero(robot.dof());
  double acc = 0;
  int k = robot.n_magnets() - 1;
  for (int i = robot.n_joints - 1; i >= 0; --i) {
    for (; k >= 0 && robot.magnet_joints[k] >= i; --k) acc += n.dot(robot.magnet_moments[k].cross(field.at(k)));
    theta.segment<3>(3 * i) = acc / robot.bending_stiffness(i) * n;
  }
  return theta;
}

}  // namespace magrod
