#include "magrod/perfgeom.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "magrod/parallel.hpp"

namespace magrod {

// ---------------------------------------------------------------------------------------------
// Designs

double DesignTemplate::length(int n_magnets) const { return spec.flexible_length + n_magnets * spec.magnet_length; }

RobotSpec design_spec(const DesignTemplate& tmpl, const DesignVariables& design) {
  const int n = design.n_magnets();
  if (n < 1) throw std::invalid_argument("design needs at least one magnet");
  if (static_cast<int>(design.free_positions.size()) != n - 1)
    throw std::invalid_argument("design needs one free position per magnet except the distal one");
  RobotSpec spec = tmpl.spec;
  spec.magnet_positions = design.free_positions;
  spec.magnet_positions.push_back(tmpl.length(n));
  spec.magnet_signs = design.signs;
  spec.magnet_directions.clear();
  return spec;
}

DiscretizedRobot design_robot(const DesignTemplate& tmpl, const DesignVariables& design) {
  return discretize_per_segment(design_spec(tmpl, design), tmpl.rods_per_segment);
}

DesignVariables equidistant_design(const DesignTemplate& tmpl, const std::vector<int>& signs, double min_spacing) {
  DesignVariables d;
  d.signs = signs;
  d.min_spacing = min_spacing < 0 ? tmpl.default_min_spacing() : min_spacing;
  const int n = static_cast<int>(signs.size());
  const double length = tmpl.length(n);
  for (int k = 0; k + 1 < n; ++k) d.free_positions.push_back(length * (k + 1) / n);
  return d;
}

bool is_feasible(const DesignVariables& design, double length, double tol) {
  const double s = design.min_spacing;
  const auto& x = design.free_positions;
  const double slack = tol * length;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double prev = k == 0 ? 0.0 : x[k - 1];
    if (x[k] - prev < s - slack) return false;
  }
  return x.empty() || x.back() <= length - s + slack;
}

DesignVariables project_design(const DesignVariables& design, double length) {
  const double s = design.min_spacing;
  const int m = static_cast<int>(design.free_positions.size());
  const double upper = length - (m + 1) * s;
  if (upper < 0) throw std::invalid_argument("min_spacing leaves no feasible design");
  // Shifted coordinates y_j = x_j - (j + 1) s turn the gaps into an ordering constraint.
  std::vector<double> y(m);
  for (int j = 0; j < m; ++j) y[j] = design.free_positions[j] - (j + 1) * s;
  // Pool-adjacent-violators isotonic regression.
  std::vector<double> value;
  std::vector<int> count;
  for (double v : y) {
    value.push_back(v);
    count.push_back(1);
    while (value.size() > 1 && value[value.size() - 2] > value.back()) {
      const int c = count.back() + count[count.size() - 2];
      const double merged = (value.back() * count.back() + value[value.size() - 2] * count[count.size() - 2]) / c;
      value.pop_back();
      count.pop_back();
      value.back() = merged;
      count.back() = c;
    }
  }
  DesignVariables out = design;
  int j = 0;
  for (std::size_t b = 0; b < value.size(); ++b)
    for (int c = 0; c < count[b]; ++c, ++j)
      out.free_positions[j] = std::clamp(value[b], 0.0, upper) + (j + 1) * s;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Gram matrices

namespace {

/// sqrt(det(A^T A)) from the triangular factor of A, exact zero for exactly rank-deficient A.
double volume_factor(const MatrixXd& a) {
  if (a.rows() < a.cols()) return 0.0;
  const MatrixXd r = a.householderQr().matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  return std::abs(r.diagonal().prod());
}

}  // namespace

GramMatrix gram_from_derivative(const MatrixXd& dtheta_db) {
  GramMatrix out;
  out.g = dtheta_db.transpose() * dtheta_db;
  out.jacobian = volume_factor(dtheta_db);
  return out;
}

namespace {

Eigen::LLT<MatrixXd> positive_factor(const MatrixXd& s) {
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) throw std::domain_error("stiffness Hessian is not positive definite");
  return llt;
}

}  // namespace

GramMatrix immersion_gram_exact(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& theta) {
  const MatrixXd mu = torque_matrix(robot, theta) * uniform_field_restriction(robot.n_magnets());
  return gram_from_derivative(positive_factor(stiffness_hessian(robot, field, theta)).solve(mu));
}

GramMatrix immersion_gram_weak(const DiscretizedRobot& robot, const VectorXd& theta) {
  const MatrixXd mu = torque_matrix(robot, theta) * uniform_field_restriction(robot.n_magnets());
  return gram_from_derivative(robot.stiffness_diagonal().cwiseInverse().asDiagonal() * mu);
}

namespace {

MatrixXd min_index_matrix(const std::vector<double>& diag) {
  const int n = static_cast<int>(diag.size());
  MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = diag[std::min(i, j)];
  return out;
}

}  // namespace

MatrixXd lambda_m_exact(const DiscretizedRobot& robot) {
  std::vector<double> diag;
  double acc = 0;
  int k = 0;
  for (int i = 0; i < robot.n_joints && k < robot.n_magnets(); ++i) {
    const double c = 1.0 / robot.bending_stiffness(i);
    acc += c * c;
    if (robot.magnet_joints[k] == i) {
      diag.push_back(acc);
      ++k;
    }
  }
  return min_index_matrix(diag);
}

namespace {

double design_lambda_scale(const DesignTemplate& tmpl) {
  const double ei = tmpl.spec.youngs_flexible * tmpl.spec.area_inertia;
  return 1.0 / (tmpl.rods_per_segment * ei * ei);
}

}  // namespace

MatrixXd lambda_m_design(const DesignTemplate& tmpl, const DesignVariables& design) {
  const RobotSpec spec = design_spec(tmpl, design);
  const double c = design_lambda_scale(tmpl);
  std::vector<double> diag;
  double acc = 0;
  for (int j = 0; j < spec.n_magnets(); ++j) {
    const double f = spec.segment_flexible_length(j);
    acc += c * f * f;
    diag.push_back(acc);
  }
  return min_index_matrix(diag);
}

MatrixXd lambda_m_design_derivative(const DesignTemplate& tmpl, const DesignVariables& design, int j) {
  const RobotSpec spec = design_spec(tmpl, design);
  const double c = design_lambda_scale(tmpl);
  // Moving L_j lengthens segment j and shortens segment j + 1.
  std::vector<double> diag;
  for (int k = 0; k < spec.n_magnets(); ++k) {
    double d = 0;
    if (j <= k) d += 2 * c * spec.segment_flexible_length(j);
    if (j + 1 <= k) d -= 2 * c * spec.segment_flexible_length(j + 1);
    diag.push_back(d);
  }
  return min_index_matrix(diag);
}

std::vector<Vec3d> planar_moments(double dipole, const std::vector<int>& signs, const std::vector<double>& angles,
                                  const Vec3d& in_plane) {
  if (angles.size() != signs.size()) throw std::invalid_argument("one angle per magnet required");
  const Vec3d t = DiscretizedRobot::tangent();
  const Vec3d v = (in_plane - in_plane.dot(t) * t).normalized();
  std::vector<Vec3d> out;
  for (std::size_t k = 0; k < signs.size(); ++k)
    out.push_back(dipole * signs[k] * (std::cos(angles[k]) * t - std::sin(angles[k]) * v));
  return out;
}

Mat3d approx_gram(const MatrixXd& lambda_m, const std::vector<Vec3d>& moments) {
  Mat3d g = Mat3d::Zero();
  const int n = static_cast<int>(moments.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g += lambda_m(i, j) * skew(moments[i]).transpose() * skew(moments[j]);
  return 0.5 * (g + g.transpose());
}

GramMatrix approx_gram_factored(const MatrixXd& lambda_m, const std::vector<Vec3d>& moments) {
  // Lambda_m(i, j) = sum_{l <= min(i, j)} d_l, so the Gram is B^T B with blocks sqrt(d_l) [c_l]x
  // and c_l the sum of the moments from l to the tip.
  const int n = static_cast<int>(moments.size());
  MatrixXd b(3 * n, 3);
  Vec3d c = Vec3d::Zero();
  for (int l = n - 1; l >= 0; --l) {
    c += moments[l];
    const double d = lambda_m(l, l) - (l > 0 ? lambda_m(l - 1, l - 1) : 0.0);
    if (d < 0) throw std::invalid_argument("lambda_m diagonal must be non-decreasing");
    b.middleRows<3>(3 * l) = std::sqrt(d) * skew(c);
  }
  GramMatrix out;
  out.g = approx_gram(lambda_m, moments);
  out.jacobian = volume_factor(b);
  return out;
}

GramMatrix immersion_gram_approx(const DesignTemplate& tmpl, const DesignVariables& design,
                                 const std::vector<double>& angles, const Vec3d& in_plane) {
  return approx_gram_factored(lambda_m_design(tmpl, design),
                              planar_moments(tmpl.spec.dipole_moment, design.signs, angles, in_plane));
}

double weak_field_gap_bound(const DiscretizedRobot& robot, const FieldSpec& field) {
  const double lmin = robot.lambda_min();
  const double q = lipschitz_constant(robot, field) / lmin;
  if (q >= 1) return std::numeric_limits<double>::infinity();
  const double m0 = torque_bounds(robot, field).matrix_bound / lmin;
  const double nm = robot.n_magnets();
  return 3 * (2 * q - q * q) / ((1 - q) * (1 - q)) * nm * nm * nm * std::pow(m0, 6);
}

// ---------------------------------------------------------------------------------------------
// Densities

const char* to_string(IndexKind k) {
  switch (k) {
    case IndexKind::manipulability: return "manipulability";
    case IndexKind::distortion: return "distortion";
    case IndexKind::unit: return "unit";
  }
  return "unknown";
}

IndexKind index_from_string(const std::string& s) {
  if (s == "manipulability") return IndexKind::manipulability;
  if (s == "distortion") return IndexKind::distortion;
  if (s == "unit") return IndexKind::unit;
  throw std::invalid_argument("unknown performance index '" + s + "'");
}

MatrixXd chain_task_metric(const DiscretizedRobot& robot, const VectorXd& theta, const Vec3d* plane_normal) {
  const ChainState chain(robot, theta);
  const int nm = robot.n_magnets();
  std::vector<Vec3d> link(nm);
  double start = 0;
  for (int k = 0; k < nm; ++k) {
    const double end = robot.spec.magnet_positions[k];
    link[k] = (end - start) * (chain.cumulative[robot.magnet_joints[k]] * DiscretizedRobot::tangent());
    start = end;
  }
  std::vector<Vec3d> r(nm);
  Vec3d acc = Vec3d::Zero();
  for (int k = nm - 1; k >= 0; --k) r[k] = acc += link[k];

  if (plane_normal) {
    const Vec3d t = DiscretizedRobot::tangent();
    const Vec3d v = plane_normal->cross(t).normalized();
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (const auto& ri : r) {
      const Eigen::Vector2d rho(ri.dot(v), ri.dot(t));
      g += rho * rho.transpose();
    }
    return g;
  }
  Mat3d g = Mat3d::Zero();
  for (const auto& ri : r) g += ri.squaredNorm() * Mat3d::Identity() - ri * ri.transpose();
  return g;
}

double manipulability_density(const DiscretizedRobot& robot, const VectorXd& theta, const Vec3d* plane_normal) {
  return std::sqrt(std::max(0.0, chain_task_metric(robot, theta, plane_normal).determinant()));
}

double distortion_of_metric(const MatrixXd& g) {
  const double r = static_cast<double>(g.rows());
  const MatrixXd dev = g - (g.trace() / r) * MatrixXd::Identity(g.rows(), g.cols());
  return kDistortionFloor + dev.squaredNorm();
}

double distortion_density(const DiscretizedRobot& robot, const VectorXd& theta, const Vec3d* plane_normal) {
  return distortion_of_metric(chain_task_metric(robot, theta, plane_normal));
}

double performance_density(IndexKind kind, const DiscretizedRobot& robot, const VectorXd& theta,
                           const Vec3d* plane_normal) {
  switch (kind) {
    case IndexKind::manipulability: return manipulability_density(robot, theta, plane_normal);
    case IndexKind::distortion: return distortion_density(robot, theta, plane_normal);
    case IndexKind::unit: return 1.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------------------------
// Global objective

double default_ball_radius(const DesignTemplate& tmpl, int n_magnets) {
  const RobotSpec& s = tmpl.spec;
  const double k0 = tmpl.rods_per_segment;
  const double gf = s.youngs_flexible / (2 * (1 + s.poisson_flexible));
  // Softest joint: a flexible rod of length L_f / k0 when one segment takes all the flexible length.
  const double lmin = std::min(2 * gf, s.youngs_flexible) * s.area_inertia * k0 / s.flexible_length;
  double sum = 0;
  for (int j = 0; j < n_magnets; ++j) sum += (j + 1) * (k0 + 1) * s.dipole_moment;
  return 0.8 * std::numbers::pi / 4 * lmin / sum;
}

namespace {

struct NodeState {
  VectorXd theta;
  Mat3d gram;
  double jacobian;
  double density;
};

NodeState evaluate_node(const DiscretizedRobot& robot, const Vec3d& b, const VectorXd& init,
                        const ObjectiveOptions& options, const Vec3d* normal) {
  const FieldSpec field = FieldSpec::make_uniform(b);
  NodeState out;
  out.theta = solve_equilibrium(robot, field, init, options.solve).theta;
  const GramMatrix g = immersion_gram_exact(robot, field, out.theta);
  out.gram = g.g;
  out.jacobian = g.jacobian;
  out.density = performance_density(options.index, robot, out.theta, normal);
  return out;
}

std::string node_label(int line, int node, const Vec3d& b) {
  return "quadrature line " + std::to_string(line) + " node " + std::to_string(node) + " (b = [" +
         std::to_string(b.x()) + ", " + std::to_string(b.y()) + ", " + std::to_string(b.z()) + "] T)";
}

}  // namespace

ObjectiveResult global_objective(const DiscretizedRobot& robot, const ObjectiveOptions& options) {
  if (!(options.ball_radius >= 0)) throw std::invalid_argument("ball radius must be non-negative");
  const auto lines = quadrature_lines(options.quadrature, options.ball_radius);
  Vec3d normal_storage;
  const Vec3d* normal = nullptr;
  if (options.quadrature.domain == Domain::disk) {
    normal_storage = plane_normal(options.quadrature);
    normal = &normal_storage;
  }
  std::vector<std::vector<NodeEvaluation>> evals(lines.size());
  parallel_for(static_cast<int>(lines.size()), options.workers, [&](int l) {
    VectorXd init = VectorXd::Zero(robot.dof());
    for (std::size_t i = 0; i < lines[l].size(); ++i) {
      const auto& node = lines[l][i];
      NodeState st;
      try {
        st = evaluate_node(robot, node.b, init, options, normal);
      } catch (const std::exception& e) {
        throw std::runtime_error(node_label(l, static_cast<int>(i), node.b) + ": " + e.what());
      }
      init = st.theta;
      evals[l].push_back({node.b, node.weight, st.theta, st.gram, st.jacobian, st.density});
    }
  });
  ObjectiveResult out;
  for (auto& line : evals)
    for (auto& e : line) {
      out.integral += e.weight * e.density * e.jacobian;
      out.volume += e.weight * e.jacobian;
      out.nodes.push_back(std::move(e));
    }
  out.value = options.normalized ? (out.volume > 0 ? out.integral / out.volume : 0.0) : out.integral;
  return out;
}

ObjectiveResult global_objective(const DesignTemplate& tmpl, const DesignVariables& design,
                                 const ObjectiveOptions& options) {
  return global_objective(design_robot(tmpl, design), options);
}

VectorXd objective_design_gradient(const DesignTemplate& tmpl, const DesignVariables& design,
                                   const ObjectiveOptions& options, double step) {
  const int nvar = static_cast<int>(design.free_positions.size());
  VectorXd grad = VectorXd::Zero(nvar);
  if (nvar == 0) return grad;
  const double length = tmpl.length(design.n_magnets());
  const double h = step > 0 ? step : 1e-4 * length;

  const DiscretizedRobot robot = design_robot(tmpl, design);
  const ObjectiveResult base = global_objective(robot, options);
  const auto lines = quadrature_lines(options.quadrature, options.ball_radius);
  Vec3d normal_storage;
  const Vec3d* normal = nullptr;
  if (options.quadrature.domain == Domain::disk) {
    normal_storage = plane_normal(options.quadrature);
    normal = &normal_storage;
  }
  std::vector<int> line_start(lines.size(), 0);
  for (std::size_t l = 1; l < lines.size(); ++l) line_start[l] = line_start[l - 1] + static_cast<int>(lines[l - 1].size());

  VectorXd dvolume = VectorXd::Zero(nvar);
  for (int j = 0; j < nvar; ++j) {
    DesignVariables plus = design, minus = design;
    plus.free_positions[j] += h;
    minus.free_positions[j] -= h;
    const DiscretizedRobot rp = design_robot(tmpl, plus);
    const DiscretizedRobot rm = design_robot(tmpl, minus);
    if (rp.dof() != robot.dof() || rm.dof() != robot.dof())
      throw std::domain_error("design step changes the discretization; move the design away from the boundary");

    std::vector<double> dz(base.nodes.size()), dv(base.nodes.size());
    parallel_for(static_cast<int>(lines.size()), options.workers, [&](int l) {
      for (std::size_t i = 0; i < lines[l].size(); ++i) {
        const std::size_t idx = line_start[l] + i;
        const NodeEvaluation& e = base.nodes[idx];
        NodeState sp, sm;
        try {
          sp = evaluate_node(rp, e.b, e.theta, options, normal);
          sm = evaluate_node(rm, e.b, e.theta, options, normal);
        } catch (const std::exception& ex) {
          throw std::runtime_error(node_label(l, static_cast<int>(i), e.b) + ": " + ex.what());
        }
        const Mat3d dg = (sp.gram - sm.gram) / (2 * h);
        const double ddens = (sp.density - sm.density) / (2 * h);
        Eigen::SelfAdjointEigenSolver<Mat3d> eig(e.gram, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(2);
        if (e.jacobian > 0 && lo > 0 && hi / lo <= 1e12) {
          const double half_trace = 0.5 * e.gram.ldlt().solve(dg).trace();
          dz[idx] = e.density * e.jacobian * half_trace + e.jacobian * ddens;
          dv[idx] = e.jacobian * half_trace;
        } else {
          dz[idx] = (sp.density * sp.jacobian - sm.density * sm.jacobian) / (2 * h);
          dv[idx] = (sp.jacobian - sm.jacobian) / (2 * h);
        }
      }
    });
    for (std::size_t idx = 0; idx < base.nodes.size(); ++idx) {
      grad(j) += base.nodes[idx].weight * dz[idx];
      dvolume(j) += base.nodes[idx].weight * dv[idx];
    }
  }
  if (options.normalized && base.volume > 0)
    grad = (grad * base.volume - base.integral * dvolume) / (base.volume * base.volume);
  return grad;
}

ObjectiveResult weak_field_objective(const DesignTemplate& tmpl, const DesignVariables& design,
                                     const ObjectiveOptions& options) {
  const DiscretizedRobot robot = design_robot(tmpl, design);
  const MatrixXd lambda_m = lambda_m_design(tmpl, design);
  ObjectiveResult out = global_objective(robot, options);
  out.integral = out.volume = 0;
  for (auto& e : out.nodes) {
    const GramMatrix g = approx_gram_factored(lambda_m, magnetic_moments(robot, e.theta));
    e.gram = g.g;
    e.jacobian = g.jacobian;
    out.integral += e.weight * e.density * e.jacobian;
    out.volume += e.weight * e.jacobian;
  }
  out.value = options.normalized ? (out.volume > 0 ? out.integral / out.volume : 0.0) : out.integral;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Workspace

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

bool in_triangle(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                 const Eigen::Vector2d& c) {
  const double d1 = cross2(b - a, p - a), d2 = cross2(c - b, p - b), d3 = cross2(a - c, p - c);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

}  // namespace

WorkspaceResult workspace_sweep(const DiscretizedRobot& robot, const Vec3d& in_plane, const std::vector<double>& fields,
                                const std::vector<double>& angles, int workers, int raster) {
  const Vec3d t = DiscretizedRobot::tangent();
  const Vec3d v = (in_plane - in_plane.dot(t) * t).normalized();
  const int nb = static_cast<int>(fields.size());
  const int na = static_cast<int>(angles.size());
  std::vector<std::vector<std::optional<Eigen::Vector2d>>> grid(na, std::vector<std::optional<Eigen::Vector2d>>(nb));
  parallel_for(na, workers, [&](int a) {
    VectorXd init = VectorXd::Zero(robot.dof());
    const Vec3d dir = std::cos(angles[a]) * v + std::sin(angles[a]) * t;
    for (int i = 0; i < nb; ++i) {
      try {
        const auto res = solve_equilibrium(robot, FieldSpec::make_uniform(fields[i] * dir), init);
        init = res.theta;
        const Vec3d tip = forward_kinematics(robot, res.theta).p;
        grid[a][i] = Eigen::Vector2d(tip.dot(v), tip.dot(t));
      } catch (const SolveFailure&) {
        init = VectorXd::Zero(robot.dof());
      }
    }
  });

  WorkspaceResult out;
  std::vector<std::array<Eigen::Vector2d, 3>> triangles;
  for (int a = 0; a < na; ++a)
    for (int i = 0; i < nb; ++i) {
      if (!grid[a][i]) {
        ++out.failures;
        continue;
      }
      out.points.push_back(*grid[a][i]);
      out.field.push_back(fields[i]);
      out.angle.push_back(angles[a]);
      if (a + 1 < na && i + 1 < nb && grid[a + 1][i] && grid[a][i + 1] && grid[a + 1][i + 1]) {
        triangles.push_back({*grid[a][i], *grid[a + 1][i], *grid[a + 1][i + 1]});
        triangles.push_back({*grid[a][i], *grid[a + 1][i + 1], *grid[a][i + 1]});
      }
    }
  if (triangles.empty() || raster < 1) return out;

  // Rasterize the union of mapped cells on the half plane v >= 0.
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& tri : triangles)
    for (const auto& p : tri) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  lo.x() = std::max(lo.x(), 0.0);
  if (!(hi.x() > lo.x()) || !(hi.y() > lo.y())) return out;
  const double dx = (hi.x() - lo.x()) / raster, dy = (hi.y() - lo.y()) / raster;
  std::vector<char> covered(static_cast<std::size_t>(raster) * raster, 0);
  for (const auto& tri : triangles) {
    Eigen::Vector2d tlo = tri[0].cwiseMin(tri[1]).cwiseMin(tri[2]);
    Eigen::Vector2d thi = tri[0].cwiseMax(tri[1]).cwiseMax(tri[2]);
    const int i0 = std::max(0, static_cast<int>(std::floor((tlo.x() - lo.x()) / dx)));
    const int i1 = std::min(raster - 1, static_cast<int>(std::ceil((thi.x() - lo.x()) / dx)));
    const int j0 = std::max(0, static_cast<int>(std::floor((tlo.y() - lo.y()) / dy)));
    const int j1 = std::min(raster - 1, static_cast<int>(std::ceil((thi.y() - lo.y()) / dy)));
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) {
        char& c = covered[static_cast<std::size_t>(i) * raster + j];
        if (!c && in_triangle({lo.x() + (i + 0.5) * dx, lo.y() + (j + 0.5) * dy}, tri[0], tri[1], tri[2])) c = 1;
      }
  }
  const auto count = std::count(covered.begin(), covered.end(), 1);
  out.normalized_area = static_cast<double>(count) * dx * dy / (robot.total_length * robot.total_length);
  return out;
}

}  // namespace magrod
