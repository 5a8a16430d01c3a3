#pragma once
/// @file linalg.hpp
/// @brief Small dense linear-algebra helpers.

#include <Eigen/Dense>

namespace magrod {

/// Default singular-value ratio for numerical rank decisions.
inline constexpr double kRankTolerance = 1e-8;

/// Number of singular values above ratio * sigma_max.
template <typename Derived>
[[nodiscard]] int numerical_rank(const Eigen::MatrixBase<Derived>& a, double ratio = kRankTolerance) {
  if (a.size() == 0) return 0;
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > ratio * s(0)) ++r;
  return r;
}

template <typename Derived> [[nodiscard]] double spectral_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
}

}  // namespace magrod
