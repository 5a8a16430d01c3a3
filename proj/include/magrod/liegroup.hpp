#pragma once
/// @file liegroup.hpp
/// @brief SO(3)/SE(3) exponential maps, logarithms, adjoints and Jacobians.
///
/// All functions are templated on the scalar type and operate on fixed-size
/// Eigen types. Twists are ordered (omega, nu): rotation first, translation second.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace magrod {

template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Vec6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar> using Mat6 = Eigen::Matrix<Scalar, 6, 6>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using Vec6d = Vec6<double>;
using Mat6d = Mat6<double>;

/// Rigid pose (rotation r, translation p).
template <typename Scalar> struct RigidPose {
  Mat3<Scalar> r = Mat3<Scalar>::Identity();
  Vec3<Scalar> p = Vec3<Scalar>::Zero();

  [[nodiscard]] static RigidPose identity() { return {}; }

  [[nodiscard]] RigidPose operator*(const RigidPose& o) const { return {r * o.r, r * o.p + p}; }

  [[nodiscard]] RigidPose inverse() const {
    RigidPose out;
    out.r = r.transpose();
    out.p = -(out.r * p);
    return out;
  }

  [[nodiscard]] Vec3<Scalar> act(const Vec3<Scalar>& x) const { return r * x + p; }
};

using Pose = RigidPose<double>;

namespace detail {

/// Below this angle the coefficient functions switch to their power series.
/// The series are summed far enough to reach double precision on the whole branch.
inline constexpr double kSeriesAngle = 0.25;

/// f_m(t) = sum_n (-1)^n t^(2n) / (2n+m)!
template <typename Scalar> Scalar alternating_series(const Scalar& t2, int m) {
  Scalar fact = 1;
  for (int i = 2; i <= m; ++i) fact *= Scalar(i);
  Scalar term = Scalar(1) / fact;
  Scalar sum = term;
  for (int n = 1; n < 9; ++n) {
    term *= -t2 / (Scalar(2 * n + m - 1) * Scalar(2 * n + m));
    sum += term;
  }
  return sum;
}

/// f_m'(t)/t = sum_{n>=1} (-1)^n 2n t^(2n-2) / (2n+m)!
template <typename Scalar> Scalar alternating_series_dt(const Scalar& t2, int m) {
  Scalar fact = 1;
  for (int i = 2; i <= m + 2; ++i) fact *= Scalar(i);
  Scalar term = Scalar(-1) / fact;  // n = 1 term without the 2n factor
  Scalar sum = Scalar(2) * term;
  for (int n = 2; n < 10; ++n) {
    term *= -t2 / (Scalar(2 * n + m - 1) * Scalar(2 * n + m));
    sum += Scalar(2 * n) * term;
  }
  return sum;
}

/// Coefficients shared by the SO(3) maps, evaluated stably for any angle.
template <typename Scalar> struct So3Coefficients {
  Scalar sinc;  ///< sin t / t
  Scalar a;     ///< (1 - cos t) / t^2
  Scalar b;     ///< (t - sin t) / t^3
  Scalar d;     ///< (1 - cos t - t^2/2) / t^4
  Scalar e;     ///< (t - sin t - t^3/6) / t^5
  Scalar da;    ///< a'(t) / t
  Scalar db;    ///< b'(t) / t

  explicit So3Coefficients(const Scalar& t) {
    using std::cos;
    using std::sin;
    const Scalar t2 = t * t;
    if (t < Scalar(kSeriesAngle)) {
      sinc = alternating_series(t2, 1);
      a = alternating_series(t2, 2);
      b = alternating_series(t2, 3);
      d = -alternating_series(t2, 4);
      e = -alternating_series(t2, 5);
      da = alternating_series_dt(t2, 2);
      db = alternating_series_dt(t2, 3);
    } else {
      const Scalar s = sin(t);
      const Scalar c = cos(t);
      sinc = s / t;
      a = (Scalar(1) - c) / t2;
      b = (t - s) / (t2 * t);
      d = (Scalar(1) - c - t2 / Scalar(2)) / (t2 * t2);
      e = (t - s - t2 * t / Scalar(6)) / (t2 * t2 * t);
      da = (sinc - Scalar(2) * a) / t2;
      db = (a - Scalar(3) * b) / t2;
    }
  }
};

}  // namespace detail

/// Cross-product matrix: skew(v) * x = v x x.
template <typename Scalar> [[nodiscard]] Mat3<Scalar> skew(const Vec3<Scalar>& v) {
  Mat3<Scalar> m;
  m << Scalar(0), -v.z(), v.y(), v.z(), Scalar(0), -v.x(), -v.y(), v.x(), Scalar(0);
  return m;
}

/// Inverse of skew() applied to the skew-symmetric part of m.
template <typename Scalar> [[nodiscard]] Vec3<Scalar> vee(const Mat3<Scalar>& m) {
  return Vec3<Scalar>(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)) / Scalar(2);
}

template <typename Derived> [[nodiscard]] auto sym(const Eigen::MatrixBase<Derived>& a) {
  return (a + a.transpose()) / typename Derived::Scalar(2);
}

/// Rodrigues formula for exp([v]x).
template <typename Scalar> [[nodiscard]] Mat3<Scalar> exp_so3(const Vec3<Scalar>& v) {
  const detail::So3Coefficients<Scalar> c(v.norm());
  const Mat3<Scalar> k = skew(v);
  return Mat3<Scalar>::Identity() + c.sinc * k + c.a * k * k;
}

/// Principal logarithm of a rotation. Throws for angles within 1e-9 of pi.
template <typename Scalar> [[nodiscard]] Vec3<Scalar> log_so3(const Mat3<Scalar>& r) {
  using std::atan2;
  using std::sin;
  using std::sqrt;
  const Vec3<Scalar> w = vee(r);
  const Scalar s = w.norm();
  const Scalar c = (r.trace() - Scalar(1)) / Scalar(2);
  const Scalar t = atan2(s, c);
  if (t >= Scalar(M_PI - 1e-9)) throw std::domain_error("log_so3: rotation angle at or beyond pi");
  if (t < Scalar(1e-3)) {
    const Scalar t2 = t * t;
    // t / sin t
    const Scalar f = Scalar(1) + t2 / Scalar(6) + Scalar(7) * t2 * t2 / Scalar(360) +
                     Scalar(31) * t2 * t2 * t2 / Scalar(15120);
    return f * w;
  }
  if (c > Scalar(0)) return (t / sin(t)) * w;
  // Large angles: the axis is better conditioned from the symmetric part (1 - c) n n^T.
  const Mat3<Scalar> outer = (sym(r) - c * Mat3<Scalar>::Identity()) / (Scalar(1) - c);
  Eigen::Index i = 0;
  outer.diagonal().maxCoeff(&i);
  Vec3<Scalar> n = outer.col(i) / sqrt(outer(i, i));
  if (n.dot(w) < Scalar(0)) n = -n;
  return t * n;
}

/// Left Jacobian: exp(v + d) ~ exp([J_l(v) d]x) exp(v).
template <typename Scalar> [[nodiscard]] Mat3<Scalar> jac_left_so3(const Vec3<Scalar>& v) {
  const detail::So3Coefficients<Scalar> c(v.norm());
  const Mat3<Scalar> k = skew(v);
  return Mat3<Scalar>::Identity() + c.a * k + c.b * k * k;
}

/// Right Jacobian: exp(v + d) ~ exp(v) exp([J_r(v) d]x). Equals the transpose of the left one.
template <typename Scalar> [[nodiscard]] Mat3<Scalar> jac_right_so3(const Vec3<Scalar>& v) {
  return jac_left_so3(v).transpose();
}

template <typename Scalar> [[nodiscard]] Mat3<Scalar> jac_left_so3_inverse(const Vec3<Scalar>& v) {
  using std::cos;
  using std::sin;
  const Scalar t = v.norm();
  Scalar g;
  if (t < Scalar(detail::kSeriesAngle)) {
    const Scalar t2 = t * t;
    g = Scalar(1) / Scalar(12) + t2 / Scalar(720) + t2 * t2 / Scalar(30240) +
        t2 * t2 * t2 / Scalar(1209600);
  } else {
    g = Scalar(1) / (t * t) - (Scalar(1) + cos(t)) / (Scalar(2) * t * sin(t));
  }
  const Mat3<Scalar> k = skew(v);
  return Mat3<Scalar>::Identity() - k / Scalar(2) + g * k * k;
}

/// Three-term closed form for the derivative of the left Jacobian contracted with rho.
///
/// The result differs from the exact Jacobian of v -> J_l(v) rho by a skew-symmetric
/// matrix, so sym(Q) equals the symmetric part of that Jacobian. It is meant to be used
/// inside sym(), as in the diagonal Hessian blocks of the magnetic energy.
template <typename Scalar>
[[nodiscard]] Mat3<Scalar> jac_left_derivative_q(const Vec3<Scalar>& v, const Vec3<Scalar>& rho) {
  const detail::So3Coefficients<Scalar> c(v.norm());
  const Scalar c1 = Scalar(2) * c.b - c.a;
  const Scalar c2 = c.b + Scalar(2) * c.d;
  const Scalar c3 = c.d - Scalar(3) * c.e;
  const Mat3<Scalar> k = skew(v);
  const Mat3<Scalar> p = skew(rho);
  return c1 * k * p - c2 * k * k * p - c3 * k * p * k * k;
}

/// Exact Jacobian of v -> J_l(v) rho.
template <typename Scalar>
[[nodiscard]] Mat3<Scalar> jac_left_directional_derivative(const Vec3<Scalar>& v,
                                                           const Vec3<Scalar>& rho) {
  const detail::So3Coefficients<Scalar> c(v.norm());
  const Vec3<Scalar> vxr = v.cross(rho);
  const Vec3<Scalar> vvxr = v.cross(vxr);
  const Mat3<Scalar> dvvxr =
      v.dot(rho) * Mat3<Scalar>::Identity() + v * rho.transpose() - Scalar(2) * rho * v.transpose();
  return c.da * vxr * v.transpose() - c.a * skew(rho) + c.db * vvxr * v.transpose() + c.b * dvvxr;
}

/// Exponential of a twist xi = (omega, nu).
template <typename Scalar> [[nodiscard]] RigidPose<Scalar> exp_se3(const Vec6<Scalar>& xi) {
  const Vec3<Scalar> w = xi.template head<3>();
  const Vec3<Scalar> n = xi.template tail<3>();
  return {exp_so3(w), jac_left_so3(w) * n};
}

/// Principal logarithm of a pose. Throws for rotation angles within 1e-9 of pi.
template <typename Scalar> [[nodiscard]] Vec6<Scalar> log_se3(const RigidPose<Scalar>& h) {
  const Vec3<Scalar> w = log_so3(h.r);
  Vec6<Scalar> xi;
  xi << w, jac_left_so3_inverse(w) * h.p;
  return xi;
}

/// Adjoint map acting on (omega, nu) twists.
template <typename Scalar> [[nodiscard]] Mat6<Scalar> adjoint(const RigidPose<Scalar>& h) {
  Mat6<Scalar> ad = Mat6<Scalar>::Zero();
  ad.template topLeftCorner<3, 3>() = h.r;
  ad.template bottomRightCorner<3, 3>() = h.r;
  ad.template bottomLeftCorner<3, 3>() = skew(h.p) * h.r;
  return ad;
}

/// Coupling block of the SE(3) left Jacobian.
template <typename Scalar>
[[nodiscard]] Mat3<Scalar> se3_left_coupling(const Vec3<Scalar>& w, const Vec3<Scalar>& n) {
  const detail::So3Coefficients<Scalar> c(w.norm());
  const Mat3<Scalar> k = skew(w);
  const Mat3<Scalar> p = skew(n);
  const Mat3<Scalar> kp = k * p;
  const Mat3<Scalar> pk = p * k;
  const Mat3<Scalar> kpk = kp * k;
  return p / Scalar(2) + c.b * (kp + pk + kpk) - c.d * (k * kp + pk * k - Scalar(3) * kpk) +
         (Scalar(3) * c.e - c.d) / Scalar(2) * (kpk * k + k * kpk);
}

/// Left Jacobian of SE(3): exp(xi + d) ~ exp(J_l(xi) d) exp(xi).
template <typename Scalar> [[nodiscard]] Mat6<Scalar> jac_left_se3(const Vec6<Scalar>& xi) {
  const Vec3<Scalar> w = xi.template head<3>();
  const Vec3<Scalar> n = xi.template tail<3>();
  const Mat3<Scalar> jl = jac_left_so3(w);
  Mat6<Scalar> j = Mat6<Scalar>::Zero();
  j.template topLeftCorner<3, 3>() = jl;
  j.template bottomRightCorner<3, 3>() = jl;
  j.template bottomLeftCorner<3, 3>() = se3_left_coupling(w, n);
  return j;
}

}  // namespace magrod
