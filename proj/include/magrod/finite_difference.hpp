#pragma once
/// @file finite_difference.hpp
/// @brief Central finite differences with optional Richardson extrapolation.

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

namespace magrod {

struct FdOptions {
  double step = 1e-6;
  /// Combine steps h and h/2 to cancel the leading truncation term.
  bool richardson = false;
};

namespace detail {

inline void require_finite(double v, Eigen::Index coord) {
  if (!std::isfinite(v))
    throw std::runtime_error("finite difference produced a non-finite value at coordinate " +
                             std::to_string(coord));
}

}  // namespace detail

/// Central-difference gradient of a scalar function.
template <typename F>
[[nodiscard]] Eigen::VectorXd fd_gradient(F&& f, const Eigen::VectorXd& x, FdOptions opt = {}) {
  auto central = [&](double h) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      xp(i) = x(i) + h;
      const double fp = f(xp);
      xp(i) = x(i) - h;
      const double fm = f(xp);
      xp(i) = x(i);
      detail::require_finite(fp, i);
      detail::require_finite(fm, i);
      g(i) = (fp - fm) / (2 * h);
    }
    return g;
  };
  if (!(opt.step > 0)) throw std::invalid_argument("finite difference step must be positive");
  if (!opt.richardson) return central(opt.step);
  const Eigen::VectorXd coarse = central(opt.step);
  const Eigen::VectorXd fine = central(opt.step / 2);
  return (4 * fine - coarse) / 3;
}

/// Central-difference Jacobian of a vector function; column j is the derivative along x_j.
template <typename F>
[[nodiscard]] Eigen::MatrixXd fd_jacobian(F&& f, const Eigen::VectorXd& x, FdOptions opt = {}) {
  auto central = [&](double h) {
    Eigen::MatrixXd jac;
    Eigen::VectorXd xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      xp(j) = x(j) + h;
      const Eigen::VectorXd fp = f(xp);
      xp(j) = x(j) - h;
      const Eigen::VectorXd fm = f(xp);
      xp(j) = x(j);
      if (j == 0) jac.resize(fp.size(), x.size());
      for (Eigen::Index i = 0; i < fp.size(); ++i) {
        detail::require_finite(fp(i), j);
        detail::require_finite(fm(i), j);
      }
      jac.col(j) = (fp - fm) / (2 * h);
    }
    return jac;
  };
  if (!(opt.step > 0)) throw std::invalid_argument("finite difference step must be positive");
  if (!opt.richardson) return central(opt.step);
  const Eigen::MatrixXd coarse = central(opt.step);
  const Eigen::MatrixXd fine = central(opt.step / 2);
  return (4 * fine - coarse) / 3;
}

}  // namespace magrod
