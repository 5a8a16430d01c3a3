#pragma once
/// @file perfgeom.hpp
/// @brief Equilibrium immersion geometry: Gram matrices, performance densities and the design objective.

#include <string>
#include <vector>

#include "magrod/equilibrium.hpp"
#include "magrod/quadrature.hpp"

namespace magrod {

// ---------------------------------------------------------------------------------------------
// Designs

/// Magnet placement: positions of all magnets except the distal one, which is pinned at L.
struct DesignVariables {
  std::vector<double> free_positions;
  std::vector<int> signs;
  double min_spacing = 0;

  [[nodiscard]] int n_magnets() const { return static_cast<int>(signs.size()); }
};

/// Material and discretization shared by every design; magnet positions come from the design.
struct DesignTemplate {
  RobotSpec spec = RobotSpec::benchmark();
  int rods_per_segment = 6;

  /// Total length for a given number of magnets.
  [[nodiscard]] double length(int n_magnets) const;
  /// Default spacing between consecutive magnet ends: 1.5 magnet lengths.
  [[nodiscard]] double default_min_spacing() const { return 1.5 * spec.magnet_length; }
};

[[nodiscard]] RobotSpec design_spec(const DesignTemplate& tmpl, const DesignVariables& design);
[[nodiscard]] DiscretizedRobot design_robot(const DesignTemplate& tmpl, const DesignVariables& design);

/// Magnets evenly spaced over the rod.
[[nodiscard]] DesignVariables equidistant_design(const DesignTemplate& tmpl, const std::vector<int>& signs,
                                                 double min_spacing = -1);

/// True when L_0 >= s, consecutive gaps are >= s and the last free magnet is <= L - s.
[[nodiscard]] bool is_feasible(const DesignVariables& design, double length, double tol = 1e-12);

/// Euclidean projection onto the feasible set.
[[nodiscard]] DesignVariables project_design(const DesignVariables& design, double length);

// ---------------------------------------------------------------------------------------------
// Gram matrices

struct GramMatrix {
  Mat3d g = Mat3d::Zero();
  double jacobian = 0;  ///< sqrt(det g)
};

/// Gram matrix of a 3-column derivative of the equilibrium with respect to a uniform field.
[[nodiscard]] GramMatrix gram_from_derivative(const MatrixXd& dtheta_db);

/// Exact Gram of the immersion b_u -> theta*(b_u) at an equilibrium.
[[nodiscard]] GramMatrix immersion_gram_exact(const DiscretizedRobot& robot, const FieldSpec& field,
                                              const VectorXd& theta);

/// Gram with the stiffness Hessian replaced by Lambda: U^T M^T Lambda^-2 M U at theta.
[[nodiscard]] GramMatrix immersion_gram_weak(const DiscretizedRobot& robot, const VectorXd& theta);

/// Lambda_m with entries sum over joints up to magnet min(i, j) of l_j^2 / (E_j I)^2.
[[nodiscard]] MatrixXd lambda_m_exact(const DiscretizedRobot& robot);

/// Lambda_m from flexible segment lengths: (1 / (k0 E^2 I^2)) sum_{j <= min(i, j)} f_j^2.
[[nodiscard]] MatrixXd lambda_m_design(const DesignTemplate& tmpl, const DesignVariables& design);

/// Derivative of lambda_m_design with respect to free position j.
[[nodiscard]] MatrixXd lambda_m_design_derivative(const DesignTemplate& tmpl, const DesignVariables& design, int j);

/// Moments M s_k (cos a_k t - sin a_k v) for in-plane magnet angles a_k.
[[nodiscard]] std::vector<Vec3d> planar_moments(double dipole, const std::vector<int>& signs,
                                                const std::vector<double>& angles, const Vec3d& in_plane);

/// sum_ij Lambda_m(i, j) [m_i]x^T [m_j]x, the positive semidefinite weak-field Gram.
[[nodiscard]] Mat3d approx_gram(const MatrixXd& lambda_m, const std::vector<Vec3d>& moments);

/// Same Gram with sqrt(det) taken from its factor, so rank-deficient cases give exactly zero.
[[nodiscard]] GramMatrix approx_gram_factored(const MatrixXd& lambda_m, const std::vector<Vec3d>& moments);

/// Weak-field Gram of a design at the given magnet angles, built from lambda_m_design.
[[nodiscard]] GramMatrix immersion_gram_approx(const DesignTemplate& tmpl, const DesignVariables& design,
                                               const std::vector<double>& angles, const Vec3d& in_plane);

/// Upper bound on |J^2 - J_weak^2| at a field of the given magnitude.
[[nodiscard]] double weak_field_gap_bound(const DiscretizedRobot& robot, const FieldSpec& field);

// ---------------------------------------------------------------------------------------------
// Densities

enum class IndexKind { manipulability, distortion, unit };

[[nodiscard]] const char* to_string(IndexKind k);
[[nodiscard]] IndexKind index_from_string(const std::string& s);

/// Positivity floor of the distortion density.
inline constexpr double kDistortionFloor = 1e-12;

/// Task metric of the lumped magnet chain.
///
/// Link k runs from magnet k-1 (or the base) to magnet k with its reference length and the
/// current direction of magnet k. With r_i the vector from the start of link i to the tip,
/// the planar metric is sum r_i r_i^T in the plane and the spatial one sum [r_i]x [r_i]x^T.
[[nodiscard]] MatrixXd chain_task_metric(const DiscretizedRobot& robot, const VectorXd& theta,
                                         const Vec3d* plane_normal);

/// sqrt(det) of the chain task metric.
[[nodiscard]] double manipulability_density(const DiscretizedRobot& robot, const VectorXd& theta,
                                            const Vec3d* plane_normal = nullptr);

/// eps0 + |G - (tr G / r) I|_F^2 for an r x r metric.
[[nodiscard]] double distortion_of_metric(const MatrixXd& g);

[[nodiscard]] double distortion_density(const DiscretizedRobot& robot, const VectorXd& theta,
                                        const Vec3d* plane_normal = nullptr);

[[nodiscard]] double performance_density(IndexKind kind, const DiscretizedRobot& robot, const VectorXd& theta,
                                         const Vec3d* plane_normal = nullptr);

// ---------------------------------------------------------------------------------------------
// Global objective

struct ObjectiveOptions {
  IndexKind index = IndexKind::manipulability;
  /// Radius of the actuation ball or disk [T].
  double ball_radius = 0;
  QuadratureSpec quadrature;
  /// Report Z / V instead of Z.
  bool normalized = false;
  int workers = 1;
  SolveOptions solve;
};

/// Radius 0.8 x the uniqueness bound of the least stiff design, so every design stays certified.
[[nodiscard]] double default_ball_radius(const DesignTemplate& tmpl, int n_magnets);

struct NodeEvaluation {
  Vec3d b = Vec3d::Zero();
  double weight = 0;
  VectorXd theta;
  Mat3d gram = Mat3d::Zero();
  double jacobian = 0;
  double density = 0;
};

struct ObjectiveResult {
  double integral = 0;  ///< Z = integral of z J
  double volume = 0;    ///< V = integral of J
  double value = 0;     ///< Z, or Z / V when normalized
  std::vector<NodeEvaluation> nodes;
};

[[nodiscard]] ObjectiveResult global_objective(const DesignTemplate& tmpl, const DesignVariables& design,
                                               const ObjectiveOptions& options);

/// Same integral for an already discretized robot.
[[nodiscard]] ObjectiveResult global_objective(const DiscretizedRobot& robot, const ObjectiveOptions& options);

/// Objective with the weak-field design Gram evaluated at the equilibrium magnet moments.
[[nodiscard]] ObjectiveResult weak_field_objective(const DesignTemplate& tmpl, const DesignVariables& design,
                                                   const ObjectiveOptions& options);

/// Design gradient of the objective value.
///
/// Each node contributes 1/2 z J tr(G^-1 dG) + J dz, with dG and dz from central differences
/// over re-solved equilibria (warm-started at the node). Nodes with cond(G) > 1e12 difference
/// z J directly.
[[nodiscard]] VectorXd objective_design_gradient(const DesignTemplate& tmpl, const DesignVariables& design,
                                                 const ObjectiveOptions& options, double step = -1);

// ---------------------------------------------------------------------------------------------
// Workspace

struct WorkspaceResult {
  /// In-plane distal coordinates (along v, along the tangent), one per solved sample.
  std::vector<Eigen::Vector2d> points;
  std::vector<double> field;
  std::vector<double> angle;
  int failures = 0;
  /// Area of the swept region with non-negative v coordinate, divided by L^2.
  double normalized_area = 0;
};

/// Distal positions for in-plane fields b = B (cos a v + sin a t), swept over B (rows) and a (columns).
[[nodiscard]] WorkspaceResult workspace_sweep(const DiscretizedRobot& robot, const Vec3d& in_plane,
                                              const std::vector<double>& fields, const std::vector<double>& angles,
                                              int workers = 1, int raster = 400);

}  // namespace magrod
