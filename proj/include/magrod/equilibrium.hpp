#pragma once
/// @file equilibrium.hpp
/// @brief Magneto-elastic equilibria, compliance, actuation Jacobian and twist-free structure.

#include <stdexcept>
#include <string>
#include <vector>

#include "magrod/energetics.hpp"

namespace magrod {

enum class SolverKind { fixed_point, damped_newton, backward_iteration };

[[nodiscard]] const char* to_string(SolverKind kind);

struct SolveOptions {
  int max_iterations = 200;
  /// Stop when the gradient norm falls below tolerance * lambda_min * max(1, |theta|).
  double tolerance = 1e-12;
  /// Disable to run only the damped fixed-point iteration.
  bool newton = true;
};

struct EquilibriumResult {
  VectorXd theta;
  double residual_norm = 0;  ///< |Lambda theta - M(theta) b|
  int iterations = 0;
  /// Solver that produced the last accepted step.
  SolverKind solver = SolverKind::damped_newton;
  bool uniqueness_certified = false;
  bool converged = false;
  /// Total energy after every accepted iterate, starting with the initial guess.
  std::vector<double> energy_history;
};

/// Raised when a solve does not converge; carries the best iterate.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(const std::string& what, EquilibriumResult best, int path_index = -1)
      : std::runtime_error(what), best_(std::move(best)), path_index_(path_index) {}
  [[nodiscard]] const EquilibriumResult& best() const { return best_; }
  /// Position in a continuation path, or -1 for a single solve.
  [[nodiscard]] int path_index() const { return path_index_; }

 private:
  EquilibriumResult best_;
  int path_index_;
};

/// True when every field magnitude lies strictly below the uniqueness bound.
[[nodiscard]] bool uniqueness_certified(const DiscretizedRobot& robot, const FieldSpec& field);

/// Damped Newton on the total energy with a damped fixed-point fallback. An empty init means zero.
[[nodiscard]] EquilibriumResult solve_equilibrium(const DiscretizedRobot& robot, const FieldSpec& field,
                                                  const VectorXd& init = VectorXd(),
                                                  const SolveOptions& options = {});

/// Solves along a field path, warm-starting each solve from the previous equilibrium.
[[nodiscard]] std::vector<EquilibriumResult> continuation_solve(const DiscretizedRobot& robot,
                                                                const std::vector<FieldSpec>& path,
                                                                const SolveOptions& options = {});

/// S = Lambda + Hessian of the magnetic energy.
[[nodiscard]] MatrixXd stiffness_hessian(const DiscretizedRobot& robot, const FieldSpec& field,
                                         const VectorXd& theta);

/// Configuration change S^-1 M(theta) db produced by a field perturbation at an equilibrium.
[[nodiscard]] VectorXd compliance(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta,
                                  const VectorXd& delta_b);

struct ActuationJacobian {
  MatrixXd jb;            ///< 6 x 3N_m map from stacked field perturbations to the distal twist
  MatrixXd s;             ///< stiffness Hessian at the equilibrium
  MatrixXd torque;        ///< torque matrix at the equilibrium
  MatrixXd equilibrium;   ///< d(theta*)/d(b) = S^-1 M
  int n_magnets = 0;

  /// Restriction to uniform fields (6 x 3).
  [[nodiscard]] MatrixXd uniform() const;
};

/// Stacked identities mapping one uniform field to every magnet (3N_m x 3).
[[nodiscard]] MatrixXd uniform_field_restriction(int n_magnets);

/// J_b = J_space S^-1 M. Throws std::domain_error when S is not positive definite.
[[nodiscard]] ActuationJacobian actuation_jacobian(const DiscretizedRobot& robot, const FieldSpec& field,
                                                   const VectorXd& theta);

enum class ActuationClass { underactuated, fully_actuated, redundant };

[[nodiscard]] const char* to_string(ActuationClass c);

struct ControllableDof {
  int rank = 0;
  ActuationClass label = ActuationClass::underactuated;
  int redundant = 0;  ///< column rank beyond the six task-space directions
};

[[nodiscard]] ControllableDof controllable_dof(const ActuationJacobian& j);
[[nodiscard]] ControllableDof controllable_dof(const MatrixXd& jb);

/// Twist component theta_i . t of every joint.
[[nodiscard]] VectorXd material_twist(const DiscretizedRobot& robot, const VectorXd& theta);

/// True when every reference moment is parallel to the tangent.
[[nodiscard]] bool has_axial_moments(const DiscretizedRobot& robot, double tol = 1e-12);

/// Fixed-point sweep theta_i = R_0^i^T (sum_{k>=i} m_k x b_k) / lambda_max(Lambda_i) for axial magnets.
[[nodiscard]] EquilibriumResult backward_iteration_solve(const DiscretizedRobot& robot, const FieldSpec& field,
                                                         double tol = 1e-13, int max_iterations = 100000);

/// First-order planar solution for axial magnets and fields in the plane spanned by the tangent and v.
[[nodiscard]] VectorXd planar_small_angle_solution(const DiscretizedRobot& robot, const FieldSpec& field,
                                                   const Vec3d& in_plane);

}  // namespace magrod
