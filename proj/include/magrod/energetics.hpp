#pragma once
/// @file energetics.hpp
/// @brief Elastic and magnetic energies, the torque matrix, and analytic derivatives.
///
/// The field-gradient force on the magnets is not modeled; fields act through torques only.

#include <vector>

#include "magrod/kinematics.hpp"
#include "magrod/robot_model.hpp"

namespace magrod {

/// E_e = 1/2 (theta - rest)^T Lambda (theta - rest). An empty rest vector means straight.
[[nodiscard]] double elastic_energy(const DiscretizedRobot& robot, const VectorXd& theta,
                                    const VectorXd& rest = VectorXd());
[[nodiscard]] VectorXd elastic_gradient(const DiscretizedRobot& robot, const VectorXd& theta,
                                        const VectorXd& rest = VectorXd());

/// Current magnet moments R_0^k m_k in the base frame.
[[nodiscard]] std::vector<Vec3d> magnetic_moments(const DiscretizedRobot& robot, const ChainState& chain);
[[nodiscard]] std::vector<Vec3d> magnetic_moments(const DiscretizedRobot& robot, const VectorXd& theta);

/// E_m = -sum_k m_k . b_k
[[nodiscard]] double magnetic_energy(const DiscretizedRobot& robot, const FieldSpec& field,
                                     const VectorXd& theta);
[[nodiscard]] double magnetic_energy(const DiscretizedRobot& robot, const FieldSpec& field,
                                     const ChainState& chain);

/// Torque matrix (3N x 3N_m) by direct block summation.
[[nodiscard]] MatrixXd torque_matrix(const DiscretizedRobot& robot, const VectorXd& theta);
[[nodiscard]] MatrixXd torque_matrix(const DiscretizedRobot& robot, const ChainState& chain);

/// Torque matrix assembled as D^T (P kron I3) blkdiag([m_k]x), with D = blkdiag(R_0^i J_r(theta_i))
/// and P the joint-to-magnet incidence matrix.
[[nodiscard]] MatrixXd torque_matrix_factorized(const DiscretizedRobot& robot, const VectorXd& theta);

/// Gradient of E_m: -M(theta) b.
[[nodiscard]] VectorXd magnetic_gradient(const DiscretizedRobot& robot, const FieldSpec& field,
                                         const VectorXd& theta);
[[nodiscard]] VectorXd magnetic_gradient(const DiscretizedRobot& robot, const FieldSpec& field,
                                         const ChainState& chain);

/// Hessian of E_m (symmetric 3N x 3N).
[[nodiscard]] MatrixXd magnetic_hessian(const DiscretizedRobot& robot, const FieldSpec& field,
                                        const VectorXd& theta);
[[nodiscard]] MatrixXd magnetic_hessian(const DiscretizedRobot& robot, const FieldSpec& field,
                                        const ChainState& chain, const VectorXd& theta);

[[nodiscard]] double total_energy(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta);
[[nodiscard]] VectorXd total_gradient(const DiscretizedRobot& robot, const FieldSpec& field,
                                      const VectorXd& theta);

}  // namespace magrod
