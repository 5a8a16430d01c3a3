#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "magrod/oracles.hpp"
#include "magrod/perfgeom.hpp"
#include "test_support.hpp"

using namespace magrod;

namespace {

DesignTemplate small_template(int rods = 4) {
  DesignTemplate t;
  t.rods_per_segment = rods;
  return t;
}

ObjectiveOptions coarse_options(const DesignTemplate& tmpl, int n_magnets, IndexKind index) {
  ObjectiveOptions o;
  o.index = index;
  o.ball_radius = default_ball_radius(tmpl, n_magnets);
  o.quadrature.radial = 4;
  o.quadrature.angular = 8;
  return o;
}

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int n : {1, 2, 5, 8, 16}) {
    const auto rule = gauss_legendre(n);
    for (int p = 0; p < 2 * n; ++p) {
      double sum = 0;
      for (int i = 0; i < n; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(sum == doctest::Approx(exact).epsilon(1e-13).scale(1));
    }
    for (int i = 1; i < n; ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
  }
  CHECK_THROWS_AS((void)gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("quadrature weights sum to the domain measure") {
  for (Domain d : {Domain::disk, Domain::ball}) {
    QuadratureSpec q;
    q.domain = d;
    const double radius = 2e-3;
    double sum = 0, second = 0;
    for (const auto& line : quadrature_lines(q, radius)) {
      for (std::size_t i = 1; i < line.size(); ++i) CHECK(line[i].b.norm() > line[i - 1].b.norm());
      for (const auto& n : line) {
        CHECK(n.b.norm() <= radius);
        sum += n.weight;
        second += n.weight * n.b.squaredNorm();
      }
    }
    CHECK(sum == doctest::Approx(domain_measure(q, radius)).epsilon(1e-12));
    // Integral of |b|^2: pi R^4 / 2 on the disk, 4 pi R^5 / 5 on the ball.
    const double exact = d == Domain::disk ? std::numbers::pi * std::pow(radius, 4) / 2
                                           : 4 * std::numbers::pi * std::pow(radius, 5) / 5;
    CHECK(second == doctest::Approx(exact).epsilon(1e-12));
  }
  QuadratureSpec disk;
  for (const auto& line : quadrature_lines(disk, 1.0))
    for (const auto& n : line) CHECK(std::abs(n.b.dot(plane_normal(disk))) < 1e-15);
}

TEST_CASE("design feasibility and projection") {
  const DesignTemplate tmpl;
  const auto d = equidistant_design(tmpl, {1, 1, 1});
  const double length = tmpl.length(3);
  CHECK(is_feasible(d, length));
  const auto same = project_design(d, length);
  for (std::size_t i = 0; i < d.free_positions.size(); ++i) CHECK(same.free_positions[i] == d.free_positions[i]);

  auto bad = d;
  bad.free_positions = {0.02, 0.015};
  CHECK_FALSE(is_feasible(bad, length));
  const auto p = project_design(bad, length);
  CHECK(is_feasible(p, length));
  const auto pp = project_design(p, length);
  CHECK(pp.free_positions == p.free_positions);
  // Projection is the nearest feasible point: no feasible random design is closer.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, length);
  const Eigen::Map<const VectorXd> x(bad.free_positions.data(), 2), px(p.free_positions.data(), 2);
  for (int i = 0; i < 2000; ++i) {
    auto c = bad;
    c.free_positions = {u(rng), u(rng)};
    if (!is_feasible(c, length)) continue;
    const Eigen::Map<const VectorXd> cx(c.free_positions.data(), 2);
    CHECK((cx - x).norm() >= (px - x).norm() - 1e-15);
  }
  auto tight = d;
  tight.min_spacing = length;
  CHECK_THROWS_AS((void)project_design(tight, length), std::invalid_argument);
}

TEST_CASE("exact Gram is symmetric positive semidefinite") {
  std::mt19937_64 rng(21);
  for (int nm : {1, 2, 3}) {
    const auto robot = testing::equidistant_robot(nm, 4, true);
    const double bound = uniqueness_field_bound(robot);
    for (int trial = 0; trial < 50; ++trial) {
      const auto field = FieldSpec::make_uniform(0.9 * bound * testing::random_unit(rng));
      const auto res = solve_equilibrium(robot, field);
      const auto g = immersion_gram_exact(robot, field, res.theta);
      CHECK((g.g - g.g.transpose()).norm() <= 1e-14 * g.g.norm());
      Eigen::SelfAdjointEigenSolver<Mat3d> eig(g.g);
      CHECK(eig.eigenvalues()(0) >= -1e-12 * eig.eigenvalues()(2));
      CHECK(g.jacobian >= 0);
      if (nm == 1) CHECK(g.jacobian <= 1e-10 * std::pow(eig.eigenvalues()(2), 1.5));
      if (nm >= 2) CHECK(g.jacobian == doctest::Approx(std::sqrt(g.g.determinant())).epsilon(1e-6));
    }
  }
}

TEST_CASE("exact Gram matches finite differences of the equilibrium map") {
  const auto robot = testing::equidistant_robot(2, 4, true);
  const Vec3d b0 = 0.5 * uniqueness_field_bound(robot) * Vec3d(1, 0.3, -0.2).normalized();
  SolveOptions tight;
  const auto res = solve_equilibrium(robot, FieldSpec::make_uniform(b0));
  auto map = [&](const VectorXd& b) -> VectorXd {
    return solve_equilibrium(robot, FieldSpec::make_uniform(b), res.theta, tight).theta;
  };
  const MatrixXd d = fd_jacobian(map, b0, {1e-3 * b0.norm()});
  const auto g = immersion_gram_exact(robot, FieldSpec::make_uniform(b0), res.theta);
  CHECK((d.transpose() * d - g.g).norm() < 1e-6 * g.g.norm());
}

TEST_CASE("exact Gram approaches the weak-field Gram as the field vanishes") {
  const auto robot = testing::equidistant_robot(2, 4, true);
  const Vec3d dir = Vec3d(1, 0.4, 0.1).normalized();
  const double bound = uniqueness_field_bound(robot);
  double previous = std::numeric_limits<double>::infinity();
  for (double f : {0.1, 0.05, 0.025, 0.0125}) {
    const auto field = FieldSpec::make_uniform(f * bound * dir);
    const auto res = solve_equilibrium(robot, field);
    const auto exact = immersion_gram_exact(robot, field, res.theta);
    const auto weak = immersion_gram_weak(robot, res.theta);
    const double gap = (exact.g - weak.g).norm() / exact.g.norm();
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("lambda_m from design lengths") {
  const auto tmpl = small_template(6);
  auto d = equidistant_design(tmpl, {1, -1, 1});
  d.free_positions = {0.009, 0.021};
  const MatrixXd lm = lambda_m_design(tmpl, d);
  CHECK(lm.rows() == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(lm(i, j) == lm(std::min(i, j), std::min(i, j)));
  CHECK(lm(1, 1) > lm(0, 0));
  CHECK(lm(2, 2) > lm(1, 1));

  // Exact per-joint sums agree with the design formula up to the magnet-interior joints.
  const MatrixXd exact = lambda_m_exact(design_robot(tmpl, d));
  CHECK((exact - lm).norm() < 0.2 * lm.norm());
  CHECK(exact(2, 2) >= lm(2, 2) * 0.8);

  for (int j = 0; j < 2; ++j) {
    auto f = [&](const VectorXd& x) -> VectorXd {
      auto c = d;
      c.free_positions = {x(0), x(1)};
      return lambda_m_design(tmpl, c).reshaped();
    };
    const Eigen::Map<const VectorXd> x(d.free_positions.data(), 2);
    const MatrixXd fd = fd_jacobian(f, VectorXd(x), {1e-6});
    const VectorXd analytic = lambda_m_design_derivative(tmpl, d, j).reshaped();
    CHECK((fd.col(j) - analytic).norm() < 1e-6 * analytic.norm());
  }
}

TEST_CASE("weak-field Gram of two aligned magnets") {
  const auto tmpl = small_template(6);
  const auto d = equidistant_design(tmpl, {1, 1});
  const MatrixXd lm = lambda_m_design(tmpl, d);
  const double a = lm(0, 0), b = lm(1, 1), m = tmpl.spec.dipole_moment;
  // Straight configuration: parallel moments give a degenerate Gram.
  CHECK(immersion_gram_approx(tmpl, d, {0, 0}, Vec3d::UnitX()).jacobian == 0.0);
  // The determinant grows with the relative angle phi as M^6 a (b - a)(3a + b) phi^2.
  const double factor = std::pow(m, 6) * a * (b - a) * (3 * a + b);
  for (double phi : {1e-2, 1e-3, 1e-4}) {
    const auto g = immersion_gram_approx(tmpl, d, {0.3, 0.3 + phi}, Vec3d::UnitX());
    CHECK(g.jacobian * g.jacobian / (phi * phi) == doctest::Approx(factor).epsilon(3 * phi));
  }
  // Closed form at finite angle.
  const double phi = 0.7;
  const auto g = immersion_gram_approx(tmpl, d, {0.2, 0.2 + phi}, Vec3d::UnitX());
  const double closed = std::pow(m, 6) * a * (b - a) * (2 * a * std::cos(phi) + a + b) * std::pow(std::sin(phi), 2);
  CHECK(g.g.determinant() == doctest::Approx(closed).epsilon(1e-10));
  CHECK(g.jacobian * g.jacobian == doctest::Approx(closed).epsilon(1e-10));
}

TEST_CASE("boundary designs collapse the weak-field Gram") {
  const auto tmpl = small_template(6);
  const double lm = tmpl.spec.magnet_length;
  for (int nm : {2, 3}) {
    const auto interior = equidistant_design(tmpl, std::vector<int>(nm, 1));
    std::vector<double> angles;
    for (int k = 0; k < nm; ++k) angles.push_back(0.3 + 0.4 * k * k);
    const double reference = immersion_gram_approx(tmpl, interior, angles, Vec3d::UnitX()).jacobian;
    REQUIRE(reference > 0);
    const double length = tmpl.length(nm);
    // Every free magnet at the proximal end, or all packed against the distal magnet.
    for (int proximal = 0; proximal < nm; ++proximal) {
      auto d = interior;
      for (int k = 0; k < nm - 1; ++k)
        d.free_positions[k] = k < proximal ? (k + 1) * lm : length - (nm - 1 - k) * lm;
      const double j = immersion_gram_approx(tmpl, d, angles, Vec3d::UnitX()).jacobian;
      if (proximal == 0 || proximal == nm - 1 || nm == 2) CHECK(j < 1e-8 * reference);
    }
  }
}

TEST_CASE("weak-field remainder stays below its bound") {
  const auto tmpl = small_template(4);
  const auto d = equidistant_design(tmpl, {1, 1});
  const auto robot = design_robot(tmpl, d);
  const double base = 0.5 * uniqueness_field_bound(robot);
  double previous = std::numeric_limits<double>::infinity();
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
      CHECK(gap <= weak_field_gap_bound(robot, FieldSpec::make_uniform(n.b)));
      worst = std::max(worst, gap);
    }
    CHECK(worst < 1.1 * previous);
    previous = worst;
  }
}

TEST_CASE("distortion of task metrics") {
  CHECK(distortion_of_metric(3.7 * MatrixXd::Identity(2, 2)) == doctest::Approx(kDistortionFloor).epsilon(1e-12));
  CHECK(distortion_of_metric(Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix()) ==
        doctest::Approx(kDistortionFloor + 0.5).epsilon(1e-15));
  CHECK(distortion_of_metric(MatrixXd::Zero(3, 3)) == kDistortionFloor);
  CHECK(index_from_string("distortion") == IndexKind::distortion);
  CHECK_THROWS_AS((void)index_from_string("volume"), std::invalid_argument);
}

TEST_CASE("two-magnet manipulability follows the lumped two-link law") {
  const auto tmpl = small_template(6);
  const double length = tmpl.length(2);
  const Vec3d normal = Vec3d::UnitY();
  std::vector<double> ratios;
  for (double frac : {0.2, 0.35, 0.5, 0.65, 0.8}) {
    auto d = equidistant_design(tmpl, {1, 1});
    d.free_positions = {frac * length};
    const auto robot = design_robot(tmpl, d);
    const auto res = solve_equilibrium(robot, FieldSpec::make_uniform(Vec3d(2e-4, 0, 0)));
    CHECK(manipulability_density(robot, VectorXd::Zero(robot.dof()), &normal) == 0.0);
    const auto moments = magnetic_moments(robot, res.theta);
    const double rel = std::acos(std::clamp(moments[0].normalized().dot(moments[1].normalized()), -1.0, 1.0));
    REQUIRE(rel > 0);
    const double l0 = d.free_positions[0];
    ratios.push_back(manipulability_density(robot, res.theta, &normal) / (l0 * (length - l0) * rel));
  }
  for (double r : ratios) CHECK(r == doctest::Approx(ratios[0]).epsilon(0.1));
}

TEST_CASE("objective basics") {
  const auto tmpl = small_template(4);
  const auto d = equidistant_design(tmpl, {1, 1});
  auto o = coarse_options(tmpl, 2, IndexKind::unit);
  const auto unit = global_objective(tmpl, d, o);
  CHECK(unit.value == unit.volume);
  CHECK(unit.value > 0);
  o.normalized = true;
  CHECK(global_objective(tmpl, d, o).value == doctest::Approx(1.0).epsilon(1e-14));

  // Single magnet: rank-two immersion, zero induced volume.
  const auto single = global_objective(tmpl, equidistant_design(tmpl, {1}), coarse_options(tmpl, 1, IndexKind::unit));
  CHECK(single.volume < 1e-8 * unit.volume);

  // Reversing every sign is undone by reversing the field, which maps the disk onto itself.
  for (IndexKind k : {IndexKind::manipulability, IndexKind::distortion}) {
    const auto oo = coarse_options(tmpl, 2, k);
    const double plus = global_objective(tmpl, d, oo).value;
    const double minus = global_objective(tmpl, equidistant_design(tmpl, {-1, -1}), oo).value;
    CHECK(minus == doctest::Approx(plus).epsilon(1e-8));
  }

  // Parallel evaluation is bitwise identical to serial evaluation.
  auto par = coarse_options(tmpl, 2, IndexKind::manipulability);
  const double serial = global_objective(tmpl, d, par).value;
  par.workers = 4;
  CHECK(global_objective(tmpl, d, par).value == serial);

  auto bad = coarse_options(tmpl, 2, IndexKind::unit);
  bad.ball_radius = 50 * uniqueness_field_bound(design_robot(tmpl, d));
  bad.solve.max_iterations = 2;
  CHECK_THROWS_WITH_AS((void)global_objective(tmpl, d, bad), doctest::Contains("quadrature line"), std::runtime_error);
}

TEST_CASE("objective converges under quadrature refinement") {
  const auto tmpl = small_template(4);
  const auto d = equidistant_design(tmpl, {1, -1});
  const double radius = 0.5 * uniqueness_field_bound(design_robot(tmpl, d));
  for (IndexKind k : {IndexKind::manipulability, IndexKind::distortion}) {
    ObjectiveOptions o;
    o.index = k;
    o.ball_radius = radius;
    const double base = global_objective(tmpl, d, o).value;
    o.quadrature.radial *= 2;
    o.quadrature.angular *= 2;
    CHECK(global_objective(tmpl, d, o).value == doctest::Approx(base).epsilon(5e-3));
  }
}

TEST_CASE("design gradient matches finite differences of the objective") {
  const auto tmpl = small_template(4);
  auto d = equidistant_design(tmpl, {1, 1, -1});
  d.free_positions = {0.011, 0.019};
  for (bool normalized : {false, true}) {
    auto o = coarse_options(tmpl, 3, IndexKind::manipulability);
    o.normalized = normalized;
    const VectorXd grad = objective_design_gradient(tmpl, d, o);
    auto f = [&](const VectorXd& x) {
      auto c = d;
      c.free_positions = {x(0), x(1)};
      return global_objective(tmpl, c, o).value;
    };
    const Eigen::Map<const VectorXd> x(d.free_positions.data(), 2);
    const VectorXd fd = fd_gradient(f, VectorXd(x), {1e-5});
    CHECK((grad - fd).norm() < 1e-3 * fd.norm());
  }
}

TEST_CASE("weak-field objective vanishes at boundary designs") {
  const auto tmpl = small_template(4);
  const double lm = tmpl.spec.magnet_length;
  const auto interior = equidistant_design(tmpl, {1, 1});
  auto o = coarse_options(tmpl, 2, IndexKind::distortion);
  const double reference = weak_field_objective(tmpl, interior, o).value;
  REQUIRE(reference > 0);
  for (double pos : {lm, tmpl.length(2) - lm}) {
    auto d = interior;
    d.free_positions = {pos};
    CHECK(weak_field_objective(tmpl, d, o).value < 1e-6 * reference);
  }
}

TEST_CASE("workspace sweep") {
  const auto robot = testing::equidistant_robot(2, 4, true);
  std::vector<double> angles;
  for (int i = 0; i <= 16; ++i) angles.push_back(std::numbers::pi * i / 16);
  const auto none = workspace_sweep(robot, Vec3d::UnitX(), {0.0}, angles);
  for (const auto& p : none.points) {
    CHECK(p.x() == doctest::Approx(0.0).scale(1e-15));
    CHECK(p.y() == doctest::Approx(robot.total_length).epsilon(1e-15));
  }
  CHECK(none.normalized_area == 0.0);

  std::vector<double> fields;
  const double bound = uniqueness_field_bound(robot);
  for (int i = 0; i <= 6; ++i) fields.push_back(bound * i / 6);
  std::vector<double> full;
  for (int i = 0; i <= 32; ++i) full.push_back(2 * std::numbers::pi * i / 32);
  const auto ws = workspace_sweep(robot, Vec3d::UnitX(), fields, full, 2);
  CHECK(ws.failures == 0);
  CHECK(ws.normalized_area > 0);
  // Angle a and pi - a mirror each other across the tangent axis.
  const int nb = static_cast<int>(fields.size());
  for (int a = 0; a <= 16; ++a) {
    const int mirror = (48 - a) % 32;
    for (int i = 0; i < nb; ++i) {
      const auto& p = ws.points[a * nb + i];
      const auto& q = ws.points[mirror * nb + i];
      CHECK(p.x() == doctest::Approx(-q.x()).scale(1e-9));
      CHECK(p.y() == doctest::Approx(q.y()).scale(1e-9));
    }
  }
}
