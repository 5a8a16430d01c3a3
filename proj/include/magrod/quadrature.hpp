#pragma once
/// @file quadrature.hpp
/// @brief Gauss-Legendre rules and the tensor-product rules over the actuation ball and disk.

#include <vector>

#include "magrod/liegroup.hpp"

namespace magrod {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
[[nodiscard]] GaussRule gauss_legendre(int n);

enum class Domain { ball, disk };

[[nodiscard]] const char* to_string(Domain d);

struct QuadratureSpec {
  Domain domain = Domain::disk;
  int radial = 8;
  /// Angular nodes per radius; on the ball these are split into `polar` rings.
  int angular = 32;
  int polar = 4;
  /// In-plane direction spanning the disk together with the tangent.
  Vec3d plane = Vec3d::UnitX();
};

struct QuadratureNode {
  Vec3d b = Vec3d::Zero();
  double weight = 0;
};

/// Nodes grouped by direction and sorted by increasing radius, so each line can be warm-started.
[[nodiscard]] std::vector<std::vector<QuadratureNode>> quadrature_lines(const QuadratureSpec& spec, double radius);

/// Total measure of the domain (pi R^2 or 4/3 pi R^3).
[[nodiscard]] double domain_measure(const QuadratureSpec& spec, double radius);

/// Unit normal of the disk plane.
[[nodiscard]] Vec3d plane_normal(const QuadratureSpec& spec);

}  // namespace magrod
