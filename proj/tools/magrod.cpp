// Command-line driver: validation suite, simulations and design studies.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

#include "magrod/config.hpp"
#include "magrod/linalg.hpp"
#include "magrod/serialize.hpp"

using namespace magrod;

namespace {

enum ExitCode { kOk = 0, kValidationFailure = 1, kSolverFailure = 2, kConfigError = 3 };

struct Context {
  RunConfig config;
  std::filesystem::path out_dir;
  int workers = 1;
};

void write_output(const Context& ctx, const std::string& name, const std::string& content) {
  write_file_atomic((ctx.out_dir / name).string(), content);
  std::cerr << "wrote " << (ctx.out_dir / name).string() << "\n";
}

Vec3d random_vec3(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng), n(rng)};
}

VectorXd random_vector(std::mt19937_64& rng, int size, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  VectorXd v(size);
  for (auto& x : v) x = u(rng);
  return v;
}

// ---------------------------------------------------------------------------------------------
// validate

struct Check {
  std::string name;
  double measured = 0;
  double tolerance = 0;
  bool pass = false;
};

std::vector<Check> validation_suite(const RunConfig& cfg) {
  const DiscretizedRobot robot = cfg.discretized();
  const int nm = robot.n_magnets();
  std::mt19937_64 rng(cfg.seed);
  std::vector<Check> checks;

  double grad = 0;
  for (int t = 0; t < 20; ++t) {
    const FieldSpec field = FieldSpec::make_uniform(0.01 * random_vec3(rng));
    const VectorXd theta = random_vector(rng, robot.dof(), 0.5);
    auto f = [&](const VectorXd& x) { return magnetic_energy(robot, field, x); };
    const VectorXd fd = fd_gradient(f, theta, {1e-5, true});
    grad = std::max(grad, (magnetic_gradient(robot, field, theta) - fd).norm() / fd.norm());
  }
  checks.push_back({"magnetic gradient vs finite differences (relative)", grad, 1e-6, grad < 1e-6});

  double hess = 0;
  for (int t = 0; t < 10; ++t) {
    const FieldSpec field = FieldSpec::make_uniform(0.01 * random_vec3(rng));
    const VectorXd theta = random_vector(rng, robot.dof(), 0.5);
    auto g = [&](const VectorXd& x) -> VectorXd { return magnetic_gradient(robot, field, x); };
    const MatrixXd fd = fd_jacobian(g, theta, {1e-4, true});
    const MatrixXd an = magnetic_hessian(robot, field, theta);
    for (int r = 0; r < an.rows(); ++r)
      for (int c = 0; c < an.cols(); ++c) {
        const double ref = std::max(std::abs(an(r, c)), std::abs(fd(r, c)));
        if (ref > 1e-12) hess = std::max(hess, std::abs(an(r, c) - fd(r, c)) / ref);
      }
  }
  checks.push_back({"magnetic Hessian vs finite differences (entrywise relative)", hess, 1e-5, hess < 1e-5});

  int rank_violations = 0;
  for (int t = 0; t < 10; ++t)
    if (numerical_rank(torque_matrix(robot, random_vector(rng, robot.dof(), 0.5))) != 2 * nm) ++rank_violations;
  checks.push_back({"torque matrix rank equals twice the magnet count (violations)",
                    static_cast<double>(rank_violations), 0, rank_violations == 0});

  const double bound = uniqueness_field_bound(robot);
  double spread = 0, excess = 0;
  for (int t = 0; t < 5; ++t) {
    const FieldSpec field = FieldSpec::make_uniform(0.9 * bound * random_vec3(rng).normalized());
    const double radius = torque_bounds(robot, field).torque_bound / robot.lambda_min();
    VectorXd first;
    for (int s = 0; s < 5; ++s) {
      VectorXd init = random_vector(rng, robot.dof(), 1.0);
      init *= radius * std::uniform_real_distribution<double>(0, 1)(rng) / std::max(init.norm(), 1e-300);
      const auto res = solve_equilibrium(robot, field, init, cfg.solver);
      excess = std::max(excess, res.theta.norm() - radius);
      if (s == 0) first = res.theta;
      spread = std::max(spread, (res.theta - first).norm());
    }
  }
  checks.push_back({"unique equilibrium from inits in the bounded ball (max distance)", spread, 1e-8, spread < 1e-8});
  checks.push_back({"equilibrium norm minus the a priori bound", excess, 1e-10, excess <= 1e-10});

  if (has_axial_moments(robot)) {
    const double b4 = twist_free_field_bound(robot);
    double twist = 0;
    for (int t = 0; t < 5; ++t) {
      const FieldSpec field = FieldSpec::make_uniform(0.9 * b4 * random_vec3(rng).normalized());
      twist = std::max(twist, material_twist(robot, solve_equilibrium(robot, field, {}, cfg.solver).theta).cwiseAbs().maxCoeff());
    }
    checks.push_back({"material twist under bounded fields [rad]", twist, 1e-9, twist < 1e-9});
  }

  const auto res = solve_equilibrium(robot, cfg.field.field(), {}, cfg.solver);
  checks.push_back({"configured field equilibrium residual", res.residual_norm,
                    cfg.solver.tolerance * robot.lambda_min() * std::max(1.0, res.theta.norm()), res.converged});
  return checks;
}

int cmd_validate(const Context& ctx) {
  const auto checks = validation_suite(ctx.config);
  Json j = Json::array();
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": measured " << format_double(c.measured)
              << ", tolerance " << format_double(c.tolerance) << "\n";
    j.push_back({{"check", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    ok = ok && c.pass;
  }
  write_output(ctx, "validate.json", dump_json({{"pass", ok}, {"checks", j}}));
  return ok ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------------------------------------
// simulate, sweep, jacobian

int cmd_simulate(const Context& ctx) {
  const auto robot = ctx.config.discretized();
  const FieldSpec field = ctx.config.field.field();
  const auto res = solve_equilibrium(robot, field, {}, ctx.config.solver);
  const auto pts = centerline(robot, res.theta);
  const auto s = centerline_arclength(robot);
  CsvTable t{{"s_m", "x_m", "y_m", "z_m"}, {}};
  for (std::size_t i = 0; i < pts.size(); ++i) t.rows.push_back({s[i], pts[i].x(), pts[i].y(), pts[i].z()});
  write_output(ctx, "centerline.csv", to_csv(t));

  const Pose tip = forward_kinematics(robot, res.theta);
  Json j;
  j["theta"] = to_json(res.theta);
  j["residual_norm"] = res.residual_norm;
  j["iterations"] = res.iterations;
  j["solver"] = to_string(res.solver);
  j["converged"] = res.converged;
  j["uniqueness_certified"] = res.uniqueness_certified;
  j["material_twist"] = to_json(material_twist(robot, res.theta));
  j["tip_position"] = to_json(VectorXd(tip.p));
  j["tip_rotation"] = to_json(MatrixXd(tip.r));
  j["field_bound_uniqueness"] = uniqueness_field_bound(robot);
  j["field_bound_twist_free"] = twist_free_field_bound(robot);
  j["n_joints"] = robot.n_joints;
  write_output(ctx, "summary.json", dump_json(j));
  return kOk;
}

int cmd_sweep(const Context& ctx) {
  const auto robot = ctx.config.discretized();
  const Vec3d dir = ctx.config.field.direction;
  const Vec3d t = DiscretizedRobot::tangent();
  CsvTable table{{"field_T", "axial_over_L", "transverse_over_L", "tip_angle_rad"}, {}};
  VectorXd init = VectorXd::Zero(robot.dof());
  for (double b : ctx.config.field.sweep()) {
    const auto res = solve_equilibrium(robot, FieldSpec::make_uniform(b * dir), init, ctx.config.solver);
    init = res.theta;
    const Pose tip = forward_kinematics(robot, res.theta);
    const double axial = (robot.total_length - tip.p.dot(t)) / robot.total_length;
    const double transverse = (tip.p - tip.p.dot(t) * t).norm() / robot.total_length;
    const double angle = std::acos(std::clamp((tip.r * t).dot(t), -1.0, 1.0));
    table.rows.push_back({b, axial, transverse, angle});
  }
  write_output(ctx, "sweep.csv", to_csv(table));
  return kOk;
}

int cmd_jacobian(const Context& ctx) {
  const auto robot = ctx.config.discretized();
  const FieldSpec field = ctx.config.field.field();
  const auto res = solve_equilibrium(robot, field, {}, ctx.config.solver);
  const auto aj = actuation_jacobian(robot, field, res.theta);
  const auto dof = controllable_dof(aj);
  Json j;
  j["theta"] = to_json(res.theta);
  j["j_theta"] = to_json(space_jacobian(robot, res.theta));
  j["j_b"] = to_json(aj.jb);
  j["j_b_uniform"] = to_json(aj.uniform());
  j["rank_torque_matrix"] = numerical_rank(aj.torque);
  j["rank_j_b"] = numerical_rank(aj.jb);
  j["rank_j_b_uniform"] = numerical_rank(aj.uniform());
  j["controllable_dof"] = dof.rank;
  j["classification"] = to_string(dof.label);
  j["redundant_columns"] = dof.redundant;
  if (field.mode == FieldSpec::Mode::uniform) {
    const auto g = immersion_gram_exact(robot, field, res.theta);
    j["gram"] = to_json(MatrixXd(g.g));
    j["immersion_jacobian"] = g.jacobian;
  }
  write_output(ctx, "jacobian.json", dump_json(j));
  return kOk;
}

// ---------------------------------------------------------------------------------------------
// workspace, convergence, optimize

int cmd_workspace(const Context& ctx) {
  const auto robot = ctx.config.discretized();
  const auto fields = ctx.config.field.sweep();
  const auto angles = ctx.config.field.angle_grid();
  const auto ws = workspace_sweep(robot, ctx.config.field.plane, fields, angles, ctx.workers);
  CsvTable t{{"field_T", "angle_rad", "v_over_L", "t_over_L"}, {}};
  for (std::size_t i = 0; i < ws.points.size(); ++i)
    t.rows.push_back({ws.field[i], ws.angle[i], ws.points[i].x() / robot.total_length,
                      ws.points[i].y() / robot.total_length});
  write_output(ctx, "workspace.csv", to_csv(t));
  write_output(ctx, "workspace.json",
               dump_json({{"normalized_half_area", ws.normalized_area}, {"failures", ws.failures},
                          {"samples", ws.points.size()}}));
  return kOk;
}

int cmd_convergence(const Context& ctx) {
  const auto& c = ctx.config.convergence;
  const auto study = convergence_study(ctx.config.robot, ctx.config.field.field(), c.joint_counts, c.reference);
  write_output(ctx, "convergence.csv", to_csv(convergence_table(study)));
  write_output(ctx, "convergence.json", dump_json(to_json(study)));
  return kOk;
}

std::string pattern_name(const std::vector<int>& signs) {
  std::string s;
  for (int v : signs) s += v > 0 ? 'p' : 'm';
  return s;
}

int cmd_optimize(const Context& ctx) {
  const auto& cfg = ctx.config;
  const auto tmpl = cfg.design_template();
  const int nm = cfg.optimize.n_magnets;
  const auto options = cfg.optimizer_options(ctx.workers);
  std::cerr << "optimize: " << enumerate_sign_patterns(nm).size() << " sign patterns, " << options.restarts
            << " restarts\n";
  const auto report = full_design_search(tmpl, nm, options);
  Json j = to_json(report);
  j["total_length"] = tmpl.length(nm);
  j["ball_radius"] = options.objective.ball_radius;
  j["best_ratio"] = Json::array();
  for (double x : report.best().best.design.free_positions) j["best_ratio"].push_back(x / tmpl.length(nm));
  if (nm == 2) {
    j["reduced_optimum_aligned"] = analytic_two_magnet_optimum(true);
    j["reduced_optimum_opposing"] = analytic_two_magnet_optimum(false);
  }
  if (cfg.optimize.heuristic && nm > 1) {
    Json h = Json::array();
    for (const auto& signs : enumerate_sign_patterns(nm)) {
      OptimizerOptions o = options;
      o.objective.workers = ctx.workers;
      const double spacing = o.min_spacing > 0 ? o.min_spacing : tmpl.default_min_spacing();
      h.push_back(to_json(nelder_mead_placement(tmpl, equidistant_design(tmpl, signs, spacing), o)));
    }
    j["heuristic"] = h;
  }
  if (cfg.optimize.grid_resolution > 0 && nm >= 2 && nm <= 4) {
    Json lands = Json::array();
    for (std::size_t p = 0; p < report.patterns.size(); ++p) {
      const auto& pr = report.patterns[p];
      std::cerr << "optimize: landscape for pattern " << pattern_name(pr.signs) << "\n";
      const auto land = exhaustive_landscape(tmpl, pr.signs, options, cfg.optimize.grid_resolution);
      const std::string file = "landscape_" + pattern_name(pr.signs) + ".csv";
      write_output(ctx, file, to_csv(landscape_table(land)));
      double dist = 0;
      for (std::size_t k = 0; k < land.designs[land.best].size(); ++k)
        dist = std::max(dist, std::abs(land.designs[land.best][k] - pr.best.design.free_positions[k]));
      lands.push_back({{"signs", pr.signs},
                       {"file", file},
                       {"grid_best", land.designs[land.best]},
                       {"grid_best_value", land.values[land.best]},
                       {"cell", land.cell()},
                       {"optimizer_within_one_cell", dist <= land.cell()}});
    }
    j["landscapes"] = lands;
  }
  write_output(ctx, "report.json", dump_json(j));
  return kOk;
}

void write_error(const Context& ctx, const std::string& kind, const std::string& message) {
  std::cerr << "error (" << kind << "): " << message << "\n";
  try {
    if (!ctx.out_dir.empty()) {
      std::filesystem::create_directories(ctx.out_dir);
      write_file_atomic((ctx.out_dir / "error.json").string(), dump_json({{"error", kind}, {"message", message}}));
    }
  } catch (const std::exception&) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium simulation and magnet placement design for magnetic continuum rods"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_path;
  std::string out_dir = ".";
  int workers = 1;
  std::int64_t seed = -1;
  bool schema = false;
  app.add_flag("--schema", schema, "Print the configuration keys and CSV column contracts");
  app.add_option("--out-dir", out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", seed, "Override the configuration seed")->check(CLI::NonNegativeNumber);

  const std::vector<std::pair<std::string, std::string>> commands{
      {"validate", "Run the invariant suite on the configured robot"},
      {"simulate", "Solve one equilibrium: centerline CSV and JSON summary"},
      {"sweep", "Distal deflection over a field magnitude sweep"},
      {"jacobian", "Actuation Jacobian, ranks and DoF classification"},
      {"workspace", "Distal workspace over in-plane fields and its normalized half area"},
      {"convergence", "Discretization convergence study"},
      {"optimize", "Magnet placement optimization with landscapes"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "YAML configuration file")->required();
    subs[name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }
  if (schema) {
    std::cout << config_schema() << "\n" << csv_schema();
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kConfigError;
  }

  Context ctx;
  ctx.out_dir = out_dir;
  ctx.workers = workers;
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    ctx.config = load_config(config_path);
    if (seed >= 0) ctx.config.seed = static_cast<std::uint64_t>(seed);
    std::filesystem::create_directories(ctx.out_dir);
  } catch (const std::exception& e) {
    write_error(ctx, "config", e.what());
    return kConfigError;
  }
  try {
    if (cmd == "validate") return cmd_validate(ctx);
    if (cmd == "simulate") return cmd_simulate(ctx);
    if (cmd == "sweep") return cmd_sweep(ctx);
    if (cmd == "jacobian") return cmd_jacobian(ctx);
    if (cmd == "workspace") return cmd_workspace(ctx);
    if (cmd == "convergence") return cmd_convergence(ctx);
    if (cmd == "optimize") return cmd_optimize(ctx);
  } catch (const SolveFailure& e) {
    write_error(ctx, "solver", e.what());
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    write_error(ctx, "config", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    write_error(ctx, "solver", e.what());
    return kSolverFailure;
  }
  return kConfigError;
}
