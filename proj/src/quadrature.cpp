#include "magrod/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "magrod/robot_model.hpp"

namespace magrod {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  // Legendre polynomial P_n(x) and its derivative by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1)};
  };
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = 2 / ((1 - x * x) * dp * dp);
  }
  return rule;
}

const char* to_string(Domain d) { return d == Domain::ball ? "ball" : "disk"; }

Vec3d plane_normal(const QuadratureSpec& spec) {
  const Vec3d n = DiscretizedRobot::tangent().cross(spec.plane);
  if (n.norm() < 1e-12) throw std::invalid_argument("plane direction must not be parallel to the tangent");
  return n.normalized();
}

std::vector<std::vector<QuadratureNode>> quadrature_lines(const QuadratureSpec& spec, double radius) {
  if (spec.radial < 1 || spec.angular < 1) throw std::invalid_argument("quadrature orders must be positive");
  if (!(radius >= 0)) throw std::invalid_argument("quadrature radius must be non-negative");
  const GaussRule radial = gauss_legendre(spec.radial);
  std::vector<double> r(spec.radial), wr(spec.radial);
  const int power = spec.domain == Domain::ball ? 2 : 1;
  for (int i = 0; i < spec.radial; ++i) {
    r[i] = 0.5 * radius * (radial.nodes[i] + 1);
    wr[i] = 0.5 * radius * radial.weights[i] * std::pow(r[i], power);
  }
  std::vector<std::vector<QuadratureNode>> lines;
  auto add_line = [&](const Vec3d& dir, double wa) {
    std::vector<QuadratureNode> line(spec.radial);
    for (int i = 0; i < spec.radial; ++i) line[i] = {r[i] * dir, wr[i] * wa};
    lines.push_back(std::move(line));
  };
  const Vec3d t = DiscretizedRobot::tangent();
  if (spec.domain == Domain::disk) {
    const Vec3d n = plane_normal(spec);
    const Vec3d v = n.cross(t);
    const double dphi = 2 * std::numbers::pi / spec.angular;
    for (int j = 0; j < spec.angular; ++j) {
      const double phi = (j + 0.5) * dphi;
      add_line(std::cos(phi) * v + std::sin(phi) * t, dphi);
    }
  } else {
    if (spec.polar < 1 || spec.angular % spec.polar != 0)
      throw std::invalid_argument("angular nodes must split evenly into polar rings");
    const int azimuth = spec.angular / spec.polar;
    const GaussRule polar = gauss_legendre(spec.polar);
    const double dphi = 2 * std::numbers::pi / azimuth;
    for (int p = 0; p < spec.polar; ++p) {
      const double c = polar.nodes[p];
      const double s = std::sqrt(1 - c * c);
      for (int j = 0; j < azimuth; ++j) {
        const double phi = (j + 0.5) * dphi;
        add_line(Vec3d(s * std::cos(phi), s * std::sin(phi), c), polar.weights[p] * dphi);
      }
    }
  }
  return lines;
}

double domain_measure(const QuadratureSpec& spec, double radius) {
  return spec.domain == Domain::ball ? 4.0 / 3.0 * std::numbers::pi * radius * radius * radius
                                     : std::numbers::pi * radius * radius;
}

}  // namespace magrod
