#pragma once
/// @file oracles.hpp
/// @brief Independent reference computations: beam closed forms and discretization convergence.

#include <cstdint>
#include <vector>

#include "magrod/equilibrium.hpp"
#include "magrod/finite_difference.hpp"
#include "magrod/perfgeom.hpp"

namespace magrod {

struct BeamDeflection {
  double transverse = 0;  ///< tip displacement perpendicular to the undeformed axis [m]
  double axial = 0;       ///< shortening along the undeformed axis [m]
  double tip_angle = 0;   ///< tip rotation [rad]
};

/// Small-deflection cantilever under an end moment: angle tau L / (E I), deflection tau L^2 / (2 E I).
[[nodiscard]] BeamDeflection euler_bernoulli_tip_deflection(double length, double youngs, double inertia,
                                                            double tip_torque);

/// Cantilever carrying a rigid distal magnet whose moment starts perpendicular to the field.
///
/// An end moment bends an inextensible Euler-Bernoulli beam into a circular arc, so the
/// flexible part is an arc of angle phi with E I phi / L_f = M B cos(phi); the magnet
/// continues straight along the tip tangent. Valid for a single distal magnet of length
/// spec.magnet_length.
[[nodiscard]] BeamDeflection magnet_cantilever_deflection(const RobotSpec& spec, double field);

/// Tip deflection of a chain under a field perpendicular to a single axial distal magnet.
[[nodiscard]] BeamDeflection chain_tip_deflection(const DiscretizedRobot& robot, double field);

struct ConvergenceStudy {
  std::vector<int> joint_counts;
  std::vector<double> rmse;              ///< centerline RMSE normalized by the total length
  std::vector<double> position_error;    ///< distal position error [m]
  std::vector<double> rotation_error;    ///< distal rotation error [rad]
  std::vector<double> distal_error;      ///< unweighted norm of the two distal errors
  std::vector<bool> solved;
  double fitted_slope = 0;               ///< log-log slope of rmse against joint count
};

/// Solves every joint count and compares centerlines with a finely discretized reference.
[[nodiscard]] ConvergenceStudy convergence_study(const RobotSpec& spec, const FieldSpec& field,
                                                 const std::vector<int>& joint_counts, int reference_joints = 200);

/// Least-squares slope of log(y) against log(x).
[[nodiscard]] double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Field used for the discretization benchmark: 5 mT perpendicular to the tangent.
[[nodiscard]] FieldSpec benchmark_field();

struct MonteCarloEstimate {
  double value = 0;           ///< estimate of the integral of z J
  double standard_error = 0;
  double volume = 0;          ///< estimate of the integral of J
  double volume_error = 0;
  int samples = 0;
};

/// Monte-Carlo estimate of the objective integral with uniform samples over the ball or disk.
///
/// Samples are drawn up front from the seed and solved independently, so the estimate does
/// not depend on the number of workers.
[[nodiscard]] MonteCarloEstimate mc_objective(const DesignTemplate& tmpl, const DesignVariables& design,
                                              const ObjectiveOptions& options, int n_samples, std::uint64_t seed);

}  // namespace magrod
