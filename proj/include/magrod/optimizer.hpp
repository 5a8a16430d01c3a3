#pragma once
/// @file optimizer.hpp
/// @brief Magnet placement optimization: sign patterns, projected gradient, grid search and Nelder-Mead.

#include <cstdint>
#include <string>
#include <vector>

#include "magrod/perfgeom.hpp"

namespace magrod {

/// Manipulability is maximized, distortion minimized.
enum class Sense { maximize, minimize };

[[nodiscard]] const char* to_string(Sense s);
[[nodiscard]] Sense default_sense(IndexKind index);

/// Optimal L_0 / L of the reduced two-magnet weak-field problem.
///
/// Aligned moments maximize x^2 (1-x)^4 sqrt(4x^2 + (1-x)^2), opposing ones x^2 (1-x)^5.
[[nodiscard]] double analytic_two_magnet_optimum(bool aligned);

/// Sign patterns with a leading +1; the objective over a symmetric domain is invariant under a global flip.
[[nodiscard]] std::vector<std::vector<int>> enumerate_sign_patterns(int n_magnets);

struct OptimizerOptions {
  ObjectiveOptions objective;
  Sense sense = Sense::maximize;
  int max_iterations = 100;
  /// Stop once the trial step falls below this fraction of L.
  double step_tolerance = 1e-5;
  /// First trial step as a fraction of L.
  double initial_step = 0.05;
  int restarts = 5;
  std::uint64_t seed = 0;
  /// Minimum magnet spacing for generated designs; 0 selects the template default.
  double min_spacing = 0;
  /// Evaluations run concurrently over patterns, restarts and grid points.
  int workers = 1;
};

struct PlacementResult {
  DesignVariables design;
  double value = 0;
  int iterations = 0;
  bool converged = false;
  int evaluations = 0;
  std::vector<double> history;                  ///< accepted objective values
  std::vector<std::vector<double>> trajectory;  ///< accepted free positions
};

/// Projected gradient ascent (or descent) with a backtracking step on the feasible set.
[[nodiscard]] PlacementResult optimize_placement(const DesignTemplate& tmpl, const DesignVariables& init,
                                                 const OptimizerOptions& options);

/// Derivative-free baseline: Nelder-Mead on the projected design.
[[nodiscard]] PlacementResult nelder_mead_placement(const DesignTemplate& tmpl, const DesignVariables& init,
                                                    const OptimizerOptions& options);

struct Landscape {
  std::vector<int> signs;
  double min_spacing = 0;
  std::vector<double> axis;                   ///< grid coordinates shared by every free position
  std::vector<std::vector<double>> designs;   ///< feasible grid designs
  std::vector<double> values;
  std::vector<double> normalized;             ///< values rescaled to [0, 1]
  std::size_t best = 0;                       ///< index of the optimum for the given sense
  [[nodiscard]] double cell() const { return axis.size() > 1 ? axis[1] - axis[0] : 0.0; }
};

/// Upper bound on grid points accepted by exhaustive_landscape.
inline constexpr std::size_t kMaxLandscapePoints = 200000;

/// Objective on a grid of `resolution` points per free position over [s, L - s].
[[nodiscard]] Landscape exhaustive_landscape(const DesignTemplate& tmpl, const std::vector<int>& signs,
                                             const OptimizerOptions& options, int resolution = 40);

/// Uniform random feasible design.
[[nodiscard]] DesignVariables random_feasible_design(const DesignTemplate& tmpl, const std::vector<int>& signs,
                                                     double min_spacing, std::uint64_t seed);

struct PatternResult {
  std::vector<int> signs;
  PlacementResult best;
  std::vector<double> restart_values;
  std::vector<std::string> failures;
};

struct OptimizationReport {
  IndexKind index = IndexKind::manipulability;
  Sense sense = Sense::maximize;
  int n_magnets = 0;
  std::vector<PatternResult> patterns;
  std::size_t best_pattern = 0;
  [[nodiscard]] const PatternResult& best() const { return patterns.at(best_pattern); }
};

/// Restarted placement optimization for every canonical sign pattern.
///
/// Restart 0 starts from the equidistant design, the others from random feasible designs
/// seeded by (seed, pattern, restart). Failed restarts are recorded and skipped.
[[nodiscard]] OptimizationReport full_design_search(const DesignTemplate& tmpl, int n_magnets,
                                                    const OptimizerOptions& options);

}  // namespace magrod
