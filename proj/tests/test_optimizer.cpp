#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "magrod/optimizer.hpp"

using namespace magrod;

namespace {

DesignTemplate small_template() {
  DesignTemplate t;
  t.rods_per_segment = 4;
  return t;
}

OptimizerOptions weak_field_options(const DesignTemplate& tmpl, int n_magnets, IndexKind index) {
  OptimizerOptions o;
  o.objective.index = index;
  o.sense = default_sense(index);
  o.objective.ball_radius = 0.125 * default_ball_radius(tmpl, n_magnets);
  o.objective.quadrature.radial = 4;
  o.objective.quadrature.angular = 16;
  return o;
}

bool monotone(const std::vector<double>& h, Sense sense) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (sense == Sense::maximize ? h[i] <= h[i - 1] : h[i] >= h[i - 1]) return false;
  return true;
}

}  // namespace

TEST_CASE("reduced two-magnet optima") {
  CHECK(analytic_two_magnet_optimum(true) == doctest::Approx(0.368).epsilon(0.001 / 0.368));
  CHECK(std::abs(analytic_two_magnet_optimum(false) - 2.0 / 7.0) < 1e-15);
  // The aligned optimum sits near 1 / e.
  CHECK(1 / analytic_two_magnet_optimum(true) == doctest::Approx(2.718).epsilon(0.002));
}

TEST_CASE("sign patterns up to a global flip") {
  for (int n = 1; n <= 4; ++n) {
    const auto p = enumerate_sign_patterns(n);
    CHECK(p.size() == (1u << (n - 1)));
    std::set<std::vector<int>> unique(p.begin(), p.end());
    CHECK(unique.size() == p.size());
    for (const auto& s : p) {
      CHECK(s.front() == 1);
      std::vector<int> flipped;
      for (int v : s) flipped.push_back(-v);
      CHECK_FALSE(unique.count(flipped));
    }
  }
  CHECK_THROWS_AS((void)enumerate_sign_patterns(0), std::invalid_argument);
}

TEST_CASE("random feasible designs") {
  const auto tmpl = small_template();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto d = random_feasible_design(tmpl, {1, -1, 1, 1}, tmpl.default_min_spacing(), seed);
    CHECK(is_feasible(d, tmpl.length(4)));
    CHECK(d.free_positions == random_feasible_design(tmpl, {1, -1, 1, 1}, tmpl.default_min_spacing(), seed).free_positions);
  }
}

TEST_CASE("placement optimization of two aligned magnets under a weak field") {
  const auto tmpl = small_template();
  const auto o = weak_field_options(tmpl, 2, IndexKind::manipulability);
  const double length = tmpl.length(2);
  const auto res = optimize_placement(tmpl, equidistant_design(tmpl, {1, 1}), o);
  CHECK(res.converged);
  CHECK(monotone(res.history, Sense::maximize));
  for (const auto& x : res.trajectory) {
    auto d = res.design;
    d.free_positions = x;
    CHECK(is_feasible(d, length, 1e-9));
  }
  const double ratio = res.design.free_positions[0] / length;
  CHECK(ratio >= 0.318);
  CHECK(ratio <= 0.418);

  // Stationarity relative to the gradient away from the optimum.
  auto quarter = res.design;
  quarter.free_positions = {0.25 * length};
  const double scale = std::abs(objective_design_gradient(tmpl, quarter, o.objective)(0));
  CHECK(std::abs(objective_design_gradient(tmpl, res.design, o.objective)(0)) < 0.01 * scale);

  const auto again = optimize_placement(tmpl, equidistant_design(tmpl, {1, 1}), o);
  CHECK(again.value == res.value);
  CHECK(again.trajectory == res.trajectory);

  // The derivative-free baseline lands on the same optimum.
  const auto nm = nelder_mead_placement(tmpl, equidistant_design(tmpl, {1, 1}), o);
  CHECK(nm.design.free_positions[0] == doctest::Approx(res.design.free_positions[0]).epsilon(0.02));
  CHECK(monotone(nm.history, Sense::maximize));
}

TEST_CASE("distortion is minimized by a distal placement") {
  const auto tmpl = small_template();
  const auto o = weak_field_options(tmpl, 2, IndexKind::distortion);
  CHECK(o.sense == Sense::minimize);
  const auto res = optimize_placement(tmpl, equidistant_design(tmpl, {1, 1}), o);
  CHECK(monotone(res.history, Sense::minimize));
  const double length = tmpl.length(2);
  CHECK(res.design.free_positions[0] == doctest::Approx(length - res.design.min_spacing).epsilon(1e-6));
}

TEST_CASE("exhaustive landscape") {
  const auto tmpl = small_template();
  const auto o = weak_field_options(tmpl, 2, IndexKind::manipulability);
  const auto land = exhaustive_landscape(tmpl, {1, -1}, o, 20);
  CHECK(land.designs.size() == 20);
  CHECK(*std::min_element(land.normalized.begin(), land.normalized.end()) == 0.0);
  CHECK(land.normalized[land.best] == 1.0);
  // Flipping every sign is compensated by reversing the field.
  const auto flipped = exhaustive_landscape(tmpl, {-1, 1}, o, 20);
  for (std::size_t i = 0; i < land.values.size(); ++i)
    CHECK(flipped.values[i] == doctest::Approx(land.values[i]).epsilon(1e-8));
  // The optimizer agrees with the grid to within one cell.
  const auto res = optimize_placement(tmpl, equidistant_design(tmpl, {1, -1}), o);
  CHECK(std::abs(res.design.free_positions[0] - land.designs[land.best][0]) <= land.cell());

  // Distortion decreases towards the tip, so its optimum lies on the grid boundary.
  const auto dist = exhaustive_landscape(tmpl, {1, 1}, weak_field_options(tmpl, 2, IndexKind::distortion), 20);
  CHECK(dist.best == dist.designs.size() - 1);

  auto par = o;
  par.workers = 3;
  CHECK(exhaustive_landscape(tmpl, {1, -1}, par, 20).values == land.values);

  CHECK_THROWS_WITH_AS((void)exhaustive_landscape(tmpl, {1, 1, 1, 1}, o, 100), doctest::Contains("too large"),
                       std::invalid_argument);
  CHECK_THROWS_AS((void)exhaustive_landscape(tmpl, {1}, o, 20), std::invalid_argument);
}

TEST_CASE("full design search") {
  const auto tmpl = small_template();
  auto o = weak_field_options(tmpl, 2, IndexKind::manipulability);
  o.restarts = 3;
  const auto report = full_design_search(tmpl, 2, o);
  REQUIRE(report.patterns.size() == 2);
  for (const auto& p : report.patterns) {
    CHECK(p.failures.empty());
    // Two magnets have a single optimum per pattern, so every restart finds it.
    for (double v : p.restart_values) CHECK(v == doctest::Approx(p.best.value).epsilon(0.01));
  }
  for (const auto& p : report.patterns) CHECK(p.best.value <= report.best().best.value);

  o.workers = 2;
  const auto parallel = full_design_search(tmpl, 2, o);
  for (std::size_t i = 0; i < report.patterns.size(); ++i) {
    CHECK(parallel.patterns[i].restart_values == report.patterns[i].restart_values);
    CHECK(parallel.patterns[i].best.design.free_positions == report.patterns[i].best.design.free_positions);
  }

  const auto single = full_design_search(tmpl, 1, o);
  REQUIRE(single.patterns.size() == 1);
  CHECK(single.best().best.design.free_positions.empty());
  CHECK(single.best().best.converged);
}
