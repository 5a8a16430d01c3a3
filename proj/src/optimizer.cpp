#include "magrod/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "magrod/parallel.hpp"

namespace magrod {

const char* to_string(Sense s) { return s == Sense::maximize ? "maximize" : "minimize"; }

Sense default_sense(IndexKind index) { return index == IndexKind::distortion ? Sense::minimize : Sense::maximize; }

double analytic_two_magnet_optimum(bool aligned) {
  // Stationary point of the log objective; the derivative is decreasing on (0, 1).
  auto dlog = [aligned](double x) {
    const double y = 1 - x;
    if (!aligned) return 2 / x - 5 / y;
    return 2 / x - 4 / y + (4 * x - y) / (4 * x * x + y * y);
  };
  double lo = 1e-9, hi = 1 - 1e-9;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    (dlog(mid) > 0 ? lo : hi) = mid;
  }
}

std::vector<std::vector<int>> enumerate_sign_patterns(int n_magnets) {
  if (n_magnets < 1) throw std::invalid_argument("need at least one magnet");
  std::vector<std::vector<int>> out;
  for (int mask = 0; mask < (1 << (n_magnets - 1)); ++mask) {
    std::vector<int> s{1};
    for (int k = 1; k < n_magnets; ++k) s.push_back((mask >> (n_magnets - 1 - k)) & 1 ? -1 : 1);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

/// splitmix64 finalizer over the combined indices.
std::uint64_t restart_seed(std::uint64_t seed, int pattern, int restart) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(pattern) * 1009 + restart + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double spacing(const DesignTemplate& tmpl, const OptimizerOptions& options) {
  return options.min_spacing > 0 ? options.min_spacing : tmpl.default_min_spacing();
}

bool better(Sense sense, double a, double b) { return sense == Sense::maximize ? a > b : a < b; }

VectorXd as_vector(const std::vector<double>& x) { return Eigen::Map<const VectorXd>(x.data(), x.size()); }

std::vector<double> as_std(const VectorXd& x) { return {x.data(), x.data() + x.size()}; }

DesignVariables with_positions(const DesignVariables& d, const VectorXd& x) {
  DesignVariables out = d;
  out.free_positions = as_std(x);
  return out;
}

}  // namespace

PlacementResult optimize_placement(const DesignTemplate& tmpl, const DesignVariables& init,
                                   const OptimizerOptions& options) {
  const double length = tmpl.length(init.n_magnets());
  const double sigma = options.sense == Sense::maximize ? 1.0 : -1.0;
  const double min_step = options.step_tolerance * length;
  PlacementResult res;
  res.design = project_design(init, length);
  res.value = global_objective(tmpl, res.design, options.objective).value;
  res.evaluations = 1;
  res.history.push_back(res.value);
  res.trajectory.push_back(res.design.free_positions);
  if (res.design.free_positions.empty()) {
    res.converged = true;
    return res;
  }

  double step = options.initial_step * length;
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    const VectorXd grad = sigma * objective_design_gradient(tmpl, res.design, options.objective);
    if (!(grad.norm() > 0)) {
      res.converged = true;
      break;
    }
    const VectorXd dir = grad.normalized();
    const VectorXd x = as_vector(res.design.free_positions);
    bool accepted = false;
    while (step >= min_step) {
      const DesignVariables trial = project_design(with_positions(res.design, x + step * dir), length);
      // A projected step that barely moves means the ascent direction points out of the feasible set.
      if ((as_vector(trial.free_positions) - x).norm() < 0.5 * min_step) break;
      const double value = global_objective(tmpl, trial, options.objective).value;
      ++res.evaluations;
      if (sigma * (value - res.value) > 0) {
        res.design = trial;
        res.value = value;
        res.history.push_back(value);
        res.trajectory.push_back(trial.free_positions);
        step = std::min(1.5 * step, options.initial_step * length);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
  }
  return res;
}

PlacementResult nelder_mead_placement(const DesignTemplate& tmpl, const DesignVariables& init,
                                      const OptimizerOptions& options) {
  const double length = tmpl.length(init.n_magnets());
  const double sigma = options.sense == Sense::maximize ? 1.0 : -1.0;
  PlacementResult res;
  auto evaluate = [&](const VectorXd& x) {
    ++res.evaluations;
    return -sigma * global_objective(tmpl, with_positions(init, x), options.objective).value;
  };
  auto project = [&](const VectorXd& x) { return as_vector(project_design(with_positions(init, x), length).free_positions); };

  const int m = static_cast<int>(init.free_positions.size());
  std::vector<VectorXd> simplex{project(as_vector(init.free_positions))};
  for (int i = 0; i < m; ++i) {
    VectorXd x = simplex[0];
    x(i) += options.initial_step * length;
    simplex.push_back(project(x));
    if ((simplex.back() - simplex[0]).norm() < 1e-12 * length) {
      x(i) -= 2 * options.initial_step * length;
      simplex.back() = project(x);
    }
  }
  std::vector<double> f;
  for (const auto& x : simplex) f.push_back(evaluate(x));
  auto record = [&]() {
    const auto best = std::min_element(f.begin(), f.end()) - f.begin();
    res.design = with_positions(init, simplex[best]);
    res.value = -sigma * f[best];
    if (res.history.empty() || res.history.back() != res.value) {
      res.history.push_back(res.value);
      res.trajectory.push_back(res.design.free_positions);
    }
  };
  record();
  if (m == 0) {
    res.converged = true;
    return res;
  }

  const int max_iterations = 4 * options.max_iterations;
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    std::vector<int> order(m + 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
    double diameter = 0;
    for (int i = 1; i <= m; ++i) diameter = std::max(diameter, (simplex[order[i]] - simplex[order[0]]).norm());
    if (diameter < options.step_tolerance * length) {
      res.converged = true;
      break;
    }
    const int worst = order[m];
    VectorXd centroid = VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) centroid += simplex[order[i]] / m;
    const VectorXd xr = project(centroid + (centroid - simplex[worst]));
    const double fr = evaluate(xr);
    if (fr < f[order[0]]) {
      const VectorXd xe = project(centroid + 2 * (centroid - simplex[worst]));
      const double fe = evaluate(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        f[worst] = fe;
      } else {
        simplex[worst] = xr;
        f[worst] = fr;
      }
    } else if (fr < f[order[m - 1]]) {
      simplex[worst] = xr;
      f[worst] = fr;
    } else {
      const VectorXd xc = project(fr < f[worst] ? centroid + 0.5 * (xr - centroid)
                                                : centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = evaluate(xc);
      if (fc < std::min(fr, f[worst])) {
        simplex[worst] = xc;
        f[worst] = fc;
      } else {
        for (int i = 1; i <= m; ++i) {
          simplex[order[i]] = project(simplex[order[0]] + 0.5 * (simplex[order[i]] - simplex[order[0]]));
          f[order[i]] = evaluate(simplex[order[i]]);
        }
      }
    }
    record();
  }
  return res;
}

Landscape exhaustive_landscape(const DesignTemplate& tmpl, const std::vector<int>& signs,
                               const OptimizerOptions& options, int resolution) {
  const int nm = static_cast<int>(signs.size());
  if (nm < 2 || nm > 4) throw std::invalid_argument("exhaustive landscape supports 2 to 4 magnets");
  if (resolution < 2) throw std::invalid_argument("landscape resolution must be at least 2");
  const int m = nm - 1;
  const double estimate = std::pow(static_cast<double>(resolution), m);
  if (estimate > static_cast<double>(kMaxLandscapePoints))
    throw std::invalid_argument("landscape grid too large: about " + std::to_string(static_cast<long long>(estimate)) +
                                " points, limit " + std::to_string(kMaxLandscapePoints));

  Landscape out;
  out.signs = signs;
  DesignVariables base = equidistant_design(tmpl, signs, spacing(tmpl, options));
  out.min_spacing = base.min_spacing;
  const double length = tmpl.length(nm);
  const double s = base.min_spacing;
  for (int i = 0; i < resolution; ++i) out.axis.push_back(s + (length - 2 * s) * i / (resolution - 1));

  std::vector<int> idx(m, 0);
  while (true) {
    std::vector<double> x(m);
    for (int j = 0; j < m; ++j) x[j] = out.axis[idx[j]];
    base.free_positions = x;
    if (is_feasible(base, length, 1e-9)) out.designs.push_back(x);
    int j = m - 1;
    while (j >= 0 && ++idx[j] == resolution) idx[j--] = 0;
    if (j < 0) break;
  }

  ObjectiveOptions inner = options.objective;
  if (options.workers > 1) inner.workers = 1;
  out.values.assign(out.designs.size(), 0.0);
  parallel_for(static_cast<int>(out.designs.size()), options.workers, [&](int i) {
    DesignVariables d = base;
    d.free_positions = out.designs[i];
    out.values[i] = global_objective(tmpl, d, inner).value;
  });
  const auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
  for (double v : out.values) out.normalized.push_back(*hi > *lo ? (v - *lo) / (*hi - *lo) : 0.0);
  for (std::size_t i = 1; i < out.values.size(); ++i)
    if (better(options.sense, out.values[i], out.values[out.best])) out.best = i;
  return out;
}

DesignVariables random_feasible_design(const DesignTemplate& tmpl, const std::vector<int>& signs, double min_spacing,
                                       std::uint64_t seed) {
  DesignVariables d = equidistant_design(tmpl, signs, min_spacing);
  const int m = static_cast<int>(d.free_positions.size());
  const double upper = tmpl.length(d.n_magnets()) - (m + 1) * d.min_spacing;
  if (upper < 0) throw std::invalid_argument("min_spacing leaves no feasible design");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, upper);
  std::vector<double> y(m);
  for (auto& v : y) v = u(rng);
  std::sort(y.begin(), y.end());
  for (int j = 0; j < m; ++j) d.free_positions[j] = y[j] + (j + 1) * d.min_spacing;
  return d;
}

OptimizationReport full_design_search(const DesignTemplate& tmpl, int n_magnets, const OptimizerOptions& options) {
  OptimizationReport report;
  report.index = options.objective.index;
  report.sense = options.sense;
  report.n_magnets = n_magnets;
  const auto patterns = enumerate_sign_patterns(n_magnets);
  const int restarts = n_magnets == 1 ? 1 : std::max(1, options.restarts);
  const int n_tasks = static_cast<int>(patterns.size()) * restarts;

  OptimizerOptions inner = options;
  if (options.workers > 1) inner.objective.workers = 1;
  std::vector<PlacementResult> results(n_tasks);
  std::vector<std::string> errors(n_tasks);
  parallel_for(n_tasks, options.workers, [&](int task) {
    const int p = task / restarts, r = task % restarts;
    try {
      const DesignVariables init =
          r == 0 ? equidistant_design(tmpl, patterns[p], spacing(tmpl, options))
                 : random_feasible_design(tmpl, patterns[p], spacing(tmpl, options),
                                          restart_seed(options.seed, p, r));
      results[task] = optimize_placement(tmpl, init, inner);
    } catch (const std::exception& e) {
      errors[task] = "restart " + std::to_string(r) + ": " + e.what();
    }
  });

  std::string all_errors;
  bool any = false;
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    PatternResult pr;
    pr.signs = patterns[p];
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
      const int task = static_cast<int>(p) * restarts + r;
      if (!errors[task].empty()) {
        pr.failures.push_back(errors[task]);
        pr.restart_values.push_back(std::nan(""));
        continue;
      }
      pr.restart_values.push_back(results[task].value);
      if (!have || better(options.sense, results[task].value, pr.best.value)) pr.best = results[task];
      have = true;
    }
    if (!have) {
      pr.best.value = std::nan("");
      for (const auto& e : pr.failures) all_errors += "\n  pattern " + std::to_string(p) + " " + e;
    } else if (!any || better(options.sense, pr.best.value, report.patterns[report.best_pattern].best.value)) {
      report.best_pattern = report.patterns.size();
      any = true;
    }
    report.patterns.push_back(std::move(pr));
  }
  if (!any) throw std::runtime_error("every placement optimization failed:" + all_errors);
  return report;
}

}  // namespace magrod
