// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "magrod/linalg.hpp"
#include "magrod/serialize.hpp"

using namespace magrod;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  Json record;  ///< serialized output compared by the determinism criterion
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

Vec3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3d(n(rng), n(rng), n(rng)).normalized();
}

VectorXd random_vector(std::mt19937_64& rng, int size, double scale) {
  std::normal_distribution<double> n;
  VectorXd v(size);
  for (auto& x : v) x = scale * n(rng);
  return v;
}

double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

DiscretizedRobot equidistant_robot(int n_magnets, int rods, bool axial, std::mt19937_64& rng) {
  RobotSpec spec = RobotSpec::benchmark();
  const double total = spec.flexible_length + n_magnets * spec.magnet_length;
  spec.magnet_positions.clear();
  spec.magnet_signs.clear();
  for (int k = 0; k < n_magnets; ++k) {
    spec.magnet_positions.push_back(total * (k + 1) / n_magnets);
    spec.magnet_signs.push_back(k % 2 == 0 ? 1 : -1);
    if (!axial) spec.magnet_directions.push_back(random_unit(rng));
  }
  spec.magnet_positions.back() = spec.total_length();
  return discretize_per_segment(spec, rods);
}

DiscretizedRobot table_robot() { return discretize(RobotSpec::benchmark(), 7); }

// Largest excess of an accepted equilibrium over its a priori radius, across all criteria.
double g_bound_excess = -std::numeric_limits<double>::infinity();
int g_bound_samples = 0;

EquilibriumResult solve_recorded(const DiscretizedRobot& robot, const FieldSpec& field, const VectorXd& init = {}) {
  auto res = solve_equilibrium(robot, field, init);
  if (res.converged) {
    const double radius = torque_bounds(robot, field).torque_bound / robot.lambda_min();
    g_bound_excess = std::max(g_bound_excess, res.theta.norm() - radius);
    ++g_bound_samples;
  }
  return res;
}

// ---------------------------------------------------------------------------------------------

Outcome gradient_check() {
  const auto robot = table_robot();
  std::mt19937_64 rng(101);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const FieldSpec field = FieldSpec::make_uniform(uniform(rng, 1e-3, 50e-3) * random_unit(rng));
    const VectorXd theta = random_vector(rng, robot.dof(), 0.3);
    auto f = [&](const VectorXd& x) { return magnetic_energy(robot, field, x); };
    const VectorXd fd = fd_gradient(f, theta, {1e-5, true});
    worst = std::max(worst, (magnetic_gradient(robot, field, theta) - fd).norm() / fd.norm());
  }
  return {worst < 1e-6, "max relative error " + fmt(worst) + " (< 1e-6)", {}};
}

Outcome hessian_check() {
  const auto robot = table_robot();
  std::mt19937_64 rng(102);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const FieldSpec field = FieldSpec::make_uniform(uniform(rng, 1e-3, 50e-3) * random_unit(rng));
    const VectorXd theta = random_vector(rng, robot.dof(), 0.3);
    auto g = [&](const VectorXd& x) -> VectorXd { return magnetic_gradient(robot, field, x); };
    const MatrixXd fd = fd_jacobian(g, theta, {1e-4, true});
    const MatrixXd an = magnetic_hessian(robot, field, theta);
    for (Eigen::Index r = 0; r < an.rows(); ++r)
      for (Eigen::Index c = 0; c < an.cols(); ++c) {
        const double ref = std::max(std::abs(an(r, c)), std::abs(fd(r, c)));
        if (ref > 1e-12) worst = std::max(worst, std::abs(an(r, c) - fd(r, c)) / ref);
      }
  }
  return {worst < 1e-5, "max entrywise relative error " + fmt(worst) + " (< 1e-5)", {}};
}

Outcome rank_law() {
  std::mt19937_64 rng(103);
  int violations = 0, states = 0;
  for (int nm = 1; nm <= 4; ++nm)
    for (int t = 0; t < 50; ++t) {
      const auto robot = equidistant_robot(nm, 3, t % 2 == 0, rng);
      const double bound = uniqueness_field_bound(robot);
      VectorXd b(3 * nm);
      for (int k = 0; k < nm; ++k) b.segment<3>(3 * k) = uniform(rng, 0.1, 0.9) * bound * random_unit(rng);
      const FieldSpec field = FieldSpec::make_per_magnet(b);
      if (!uniqueness_certified(robot, field)) {
        ++violations;
        continue;
      }
      const auto eq = solve_recorded(robot, field);
      const auto j = actuation_jacobian(robot, field, eq.theta);
      if (!eq.converged || numerical_rank(j.torque) != 2 * nm || numerical_rank(j.jb) > std::min(6, 2 * nm))
        ++violations;
      ++states;
    }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(states) + " states", {}};
}

Outcome uniqueness() {
  std::mt19937_64 rng(104);
  const auto robot = equidistant_robot(2, 4, true, rng);
  const double bound = uniqueness_field_bound(robot);
  int violations = 0;
  double spread = 0;
  for (int d = 0; d < 10; ++d) {
    const FieldSpec field = FieldSpec::make_uniform(0.9 * bound * random_unit(rng));
    const double radius = torque_bounds(robot, field).torque_bound / robot.lambda_min();
    std::vector<VectorXd> sols;
    for (int s = 0; s < 20; ++s) {
      VectorXd init = random_vector(rng, robot.dof(), 1.0).normalized();
      init *= radius * std::pow(uniform(rng, 0, 1), 1.0 / robot.dof());
      sols.push_back(solve_recorded(robot, field, init).theta);
    }
    double worst = 0;
    for (std::size_t a = 0; a < sols.size(); ++a)
      for (std::size_t b = a + 1; b < sols.size(); ++b) worst = std::max(worst, (sols[a] - sols[b]).norm());
    if (!(worst < 1e-8)) ++violations;
    spread = std::max(spread, worst);
  }
  return {violations == 0, std::to_string(violations) + " violating directions, max pairwise distance " + fmt(spread),
          {}};
}

Outcome twist_free() {
  std::mt19937_64 rng(106);
  double worst = 0;
  for (int nm = 1; nm <= 3; ++nm) {
    const auto robot = nm == 1 ? table_robot() : equidistant_robot(nm, 4, true, rng);
    const double b = 0.9 * twist_free_field_bound(robot);
    for (int t = 0; t < 50; ++t) {
      const auto res = solve_recorded(robot, FieldSpec::make_uniform(b * random_unit(rng)));
      worst = std::max(worst, material_twist(robot, res.theta).cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-9, "max |twist| " + fmt(worst) + " rad (< 1e-9)", {}};
}

Outcome planarity() {
  std::mt19937_64 rng(107);
  const auto robot = equidistant_robot(2, 4, true, rng);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const double plane = uniform(rng, 0, 2 * M_PI);
    const Vec3d in_plane(std::cos(plane), std::sin(plane), 0);
    const double a = uniform(rng, 0, 2 * M_PI);
    const Vec3d dir = std::cos(a) * in_plane + std::sin(a) * Vec3d::UnitZ();
    const auto res = solve_recorded(robot, FieldSpec::make_uniform(uniform(rng, 1e-3, 20e-3) * dir));
    worst = std::max(worst, plane_fit_residual(centerline(robot, res.theta)) / robot.total_length);
  }
  return {worst < 1e-10, "max plane-fit residual " + fmt(worst) + " L (< 1e-10 L)", {}};
}

Outcome small_angle() {
  std::mt19937_64 rng(108);
  const auto robot = equidistant_robot(2, 4, true, rng);
  const Vec3d v = Vec3d(1, 1, 0).normalized();
  const Vec3d dir = (v + Vec3d::UnitZ()).normalized();
  std::vector<double> fields, errors;
  for (double b : {0.25e-3, 0.5e-3, 1e-3, 2e-3}) {
    const FieldSpec field = FieldSpec::make_uniform(b * dir);
    fields.push_back(b);
    errors.push_back((planar_small_angle_solution(robot, field, v) - solve_recorded(robot, field).theta).norm());
  }
  const double slope = loglog_slope(fields, errors);
  return {std::abs(slope - 2.0) <= 0.2, "log-log slope " + std::to_string(slope) + " (2.0 +/- 0.2)", {}};
}

Outcome convergence() {
  const auto spec = RobotSpec::benchmark();
  const auto study = convergence_study(spec, benchmark_field(), {5, 10, 20, 40, 80});
  const double n7 = convergence_study(spec, benchmark_field(), {7}).rmse[0];
  const bool pass = study.fitted_slope >= -2.4 && study.fitted_slope <= -1.6 && n7 < 1e-4;
  return {pass, "slope " + std::to_string(study.fitted_slope) + " (in [-2.4, -1.6]), N = 7 RMSE " + fmt(n7) + " (< 1e-4)",
          {}};
}

Outcome beam_oracle() {
  const auto spec = RobotSpec::benchmark();
  const auto robot = table_robot();
  double worst = 0;
  for (int i = 1; i <= 20; ++i) {
    const double b = 0.5e-3 * i;
    const double chain = chain_tip_deflection(robot, b).transverse;
    const double oracle = magnet_cantilever_deflection(spec, b).transverse;
    worst = std::max(worst, std::abs(chain - oracle) / std::abs(oracle));
  }
  return {worst < 0.05, "max relative deviation " + fmt(worst) + " (< 5%) for B <= 10 mT", {}};
}

// ---------------------------------------------------------------------------------------------
// Criteria 11-15 also return their serialized outputs.

Outcome remainder_bound() {
  DesignTemplate tmpl;
  tmpl.rods_per_segment = 4;
  Outcome out{true, "", Json::object()};
  int violations = 0;
  bool monotone = true;
  for (const auto& signs : std::vector<std::vector<int>>{{1, 1}, {1, -1}}) {
    const auto robot = design_robot(tmpl, equidistant_design(tmpl, signs));
    const double base = 0.5 * uniqueness_field_bound(robot);
    double previous = std::numeric_limits<double>::infinity();
    Json gaps = Json::array();
    for (double radius : {base, base / 2, base / 4}) {
      ObjectiveOptions o;
      o.ball_radius = radius;
      o.quadrature.radial = 3;
      o.quadrature.angular = 8;
      const auto res = global_objective(robot, o);
      double worst = 0;
      for (const auto& n : res.nodes) {
        const auto weak = immersion_gram_weak(robot, n.theta);
        const double gap = std::abs(n.jacobian * n.jacobian - weak.jacobian * weak.jacobian);
        if (gap > weak_field_gap_bound(robot, FieldSpec::make_uniform(n.b))) ++violations;
        worst = std::max(worst, gap);
      }
      if (!(worst <= 1.1 * previous)) monotone = false;
      previous = worst;
      gaps.push_back(worst);
    }
    out.record[signs[1] > 0 ? "aligned" : "opposing"] = gaps;
  }
  out.pass = violations == 0 && monotone;
  out.detail = std::to_string(violations) + " nodes above the bound, gap " +
               (monotone ? "shrinks" : "does not shrink") + " as the radius halves twice";
  return out;
}

Outcome boundary_collapse() {
  DesignTemplate tmpl;
  tmpl.rods_per_segment = 4;
  const double lm = tmpl.spec.magnet_length;
  Outcome out{true, "", Json::array()};
  double worst_jacobian = 0, worst_objective = 0;
  for (int nm : {2, 3}) {
    const auto interior = equidistant_design(tmpl, std::vector<int>(nm, 1));
    std::vector<double> angles;
    for (int k = 0; k < nm; ++k) angles.push_back(0.3 + 0.4 * k * k);
    const double reference = immersion_gram_approx(tmpl, interior, angles, Vec3d::UnitX()).jacobian;
    ObjectiveOptions o;
    o.ball_radius = default_ball_radius(tmpl, nm);
    o.quadrature.radial = 4;
    o.quadrature.angular = 16;
    std::map<IndexKind, double> interior_value;
    for (IndexKind k : {IndexKind::unit, IndexKind::manipulability, IndexKind::distortion}) {
      o.index = k;
      interior_value[k] = weak_field_objective(tmpl, interior, o).value;
    }
    const double length = tmpl.length(nm);
    // Every free magnet packed proximally, or every one packed against the distal magnet.
    for (bool proximal : {true, false}) {
      auto d = interior;
      for (int k = 0; k < nm - 1; ++k) d.free_positions[k] = proximal ? (k + 1) * lm : length - (nm - 1 - k) * lm;
      const double j = immersion_gram_approx(tmpl, d, angles, Vec3d::UnitX()).jacobian / reference;
      worst_jacobian = std::max(worst_jacobian, j);
      Json rec{{"n_magnets", nm}, {"proximal", proximal}, {"jacobian_ratio", j}};
      for (const auto& [k, ref] : interior_value) {
        o.index = k;
        const double ratio = weak_field_objective(tmpl, d, o).value / ref;
        worst_objective = std::max(worst_objective, ratio);
        rec[to_string(k)] = ratio;
      }
      out.record.push_back(rec);
    }
  }
  out.pass = worst_jacobian < 1e-8 && worst_objective < 1e-6;
  out.detail = "max J ratio " + fmt(worst_jacobian) + " (< 1e-8), max objective ratio " + fmt(worst_objective) +
               " (< 1e-6)";
  return out;
}

Outcome two_magnet_optima() {
  DesignTemplate tmpl;
  OptimizerOptions o;
  o.objective.index = IndexKind::manipulability;
  o.sense = Sense::maximize;
  o.objective.ball_radius = 0.125 * default_ball_radius(tmpl, 2);
  const auto res = optimize_placement(tmpl, equidistant_design(tmpl, {1, 1}), o);
  const double ratio = res.design.free_positions[0] / tmpl.length(2);
  const double aligned = analytic_two_magnet_optimum(true);
  const double opposing = analytic_two_magnet_optimum(false);
  const bool pass = res.converged && ratio >= 0.318 && ratio <= 0.418 && std::abs(aligned - 0.368) <= 1e-3 &&
                    std::abs(opposing - 2.0 / 7.0) <= 1e-12;
  return {pass,
          "optimizer L0/L " + std::to_string(ratio) + " (in [0.318, 0.418]), reduced aligned " +
              std::to_string(aligned) + " (0.368 +/- 0.001), opposing - 2/7 = " + fmt(opposing - 2.0 / 7.0),
          {{"result", to_json(res)}, {"aligned", aligned}, {"opposing", opposing}}};
}

Outcome optimizer_vs_grid(int workers) {
  DesignTemplate tmpl;
  tmpl.rods_per_segment = 4;
  Outcome out{true, "", Json::array()};
  int misses = 0, patterns = 0;
  for (int nm : {2, 3}) {
    OptimizerOptions o;
    o.objective.ball_radius = default_ball_radius(tmpl, nm);
    o.objective.quadrature.radial = 4;
    o.objective.quadrature.angular = 16;
    o.restarts = 5;
    o.seed = 115;
    o.workers = workers;
    const auto report = full_design_search(tmpl, nm, o);
    for (const auto& p : report.patterns) {
      const auto land = exhaustive_landscape(tmpl, p.signs, o, 40);
      double dist = 0;
      for (std::size_t k = 0; k < p.best.design.free_positions.size(); ++k)
        dist = std::max(dist, std::abs(p.best.design.free_positions[k] - land.designs[land.best][k]));
      const bool within = dist <= land.cell() * (1 + 1e-12);
      misses += within ? 0 : 1;
      ++patterns;
      out.record.push_back({{"signs", p.signs},
                            {"optimum", p.best.design.free_positions},
                            {"value", p.best.value},
                            {"grid_best", land.designs[land.best]},
                            {"grid_value", land.values[land.best]},
                            {"distance_in_cells", dist / land.cell()}});
    }
  }
  out.pass = misses == 0;
  out.detail = std::to_string(patterns - misses) + "/" + std::to_string(patterns) +
               " sign patterns within one grid cell of the exhaustive argmax";
  return out;
}

Outcome design_gradient() {
  DesignTemplate tmpl;
  tmpl.rods_per_segment = 4;
  const std::vector<std::pair<std::vector<int>, std::vector<double>>> designs{
      {{1, 1}, {0.010}}, {{1, -1}, {0.021}}, {{1, 1, -1}, {0.011, 0.019}}, {{1, -1, 1}, {0.008, 0.025}},
      {{1, 1, 1}, {0.014, 0.027}}};
  Outcome out{true, "", Json::array()};
  double worst = 0;
  for (const auto& [signs, pos] : designs) {
    auto d = equidistant_design(tmpl, signs);
    d.free_positions = pos;
    ObjectiveOptions o;
    o.ball_radius = default_ball_radius(tmpl, static_cast<int>(signs.size()));
    o.quadrature.radial = 4;
    o.quadrature.angular = 16;
    const VectorXd grad = objective_design_gradient(tmpl, d, o);
    auto f = [&](const VectorXd& x) {
      auto c = d;
      c.free_positions.assign(x.data(), x.data() + x.size());
      return global_objective(tmpl, c, o).value;
    };
    const VectorXd x = Eigen::Map<const VectorXd>(pos.data(), static_cast<Eigen::Index>(pos.size()));
    const VectorXd fd = fd_gradient(f, x, {1e-5});
    const double err = (grad - fd).norm() / fd.norm();
    worst = std::max(worst, err);
    out.record.push_back({{"signs", signs}, {"gradient", to_json(grad)}, {"fd", to_json(fd)}});
  }
  out.pass = worst < 1e-3;
  out.detail = "max relative error " + fmt(worst) + " over 5 interior designs (< 1e-3)";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--workers", workers, "Worker threads for the design search")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  using Clock = std::chrono::steady_clock;
  std::vector<Json> records(17);
  bool all = true;
  auto run = [&](int id, const std::string& name, const std::function<Outcome()>& f, double budget_s) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
      o.pass = false;
      o.detail += ", over the " + std::to_string(static_cast<int>(budget_s)) + " s budget";
    }
    records[id] = o.record;
    all = all && o.pass;
    std::printf("%s %2d %-28s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  run(1, "gradient check", gradient_check, 10);
  run(2, "Hessian check", hessian_check, 60);
  run(3, "rank law", rank_law, 0);
  run(4, "uniqueness", uniqueness, 0);
  run(6, "twist-free", twist_free, 0);
  run(7, "planarity", planarity, 0);
  run(8, "small-angle closed form", small_angle, 0);
  run(9, "convergence study", convergence, 300);
  run(10, "beam oracle", beam_oracle, 0);
  run(5, "boundedness", [] {
    return Outcome{g_bound_excess <= 1e-10,
                   "max excess over the a priori radius " + fmt(g_bound_excess) + " over " +
                       std::to_string(g_bound_samples) + " equilibria (<= 1e-10)",
                   {}};
  }, 0);
  run(11, "weak-field remainder bound", remainder_bound, 0);
  run(12, "boundary collapse", boundary_collapse, 0);
  run(13, "two-magnet optima", two_magnet_optima, 600);
  run(14, "optimizer vs exhaustive", [&] { return optimizer_vs_grid(workers); }, 0);
  run(15, "design gradient", design_gradient, 0);

  run(16, "determinism", [&] {
    const std::vector<Json> first(records.begin() + 11, records.begin() + 16);
    const std::vector<Json> second{remainder_bound().record, boundary_collapse().record, two_magnet_optima().record,
                                   optimizer_vs_grid(workers).record, design_gradient().record};
    int differing = 0;
    for (std::size_t i = 0; i < first.size(); ++i)
      if (dump_json(first[i]) != dump_json(second[i])) ++differing;
    return Outcome{differing == 0, std::to_string(differing) + " of 5 serialized outputs differ between runs", {}};
  }, 0);

  return all ? 0 : 1;
}
