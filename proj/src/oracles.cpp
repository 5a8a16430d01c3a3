#include "magrod/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "magrod/parallel.hpp"

namespace magrod {

BeamDeflection euler_bernoulli_tip_deflection(double length, double youngs, double inertia, double tip_torque) {
  const double ei = youngs * inertia;
  BeamDeflection out;
  out.tip_angle = tip_torque * length / ei;
  out.transverse = tip_torque * length * length / (2 * ei);
  out.axial = 0;
  return out;
}

BeamDeflection magnet_cantilever_deflection(const RobotSpec& spec, double field) {
  if (spec.n_magnets() != 1) throw std::invalid_argument("cantilever oracle expects a single distal magnet");
  const double lf = spec.flexible_length;
  const double lm = spec.magnet_length;
  const double c = spec.dipole_moment * field * lf / (spec.youngs_flexible * spec.area_inertia);
  // phi = c cos(phi) has a unique root in [0, pi/2) for c >= 0; f is increasing and concave.
  double phi = std::atan(c);
  for (int it = 0; it < 100; ++it) {
    const double f = phi - c * std::cos(phi);
    const double step = f / (1 + c * std::sin(phi));
    phi -= step;
    if (std::abs(step) < 1e-16) break;
  }
  BeamDeflection out;
  out.tip_angle = phi;
  // Chord of the arc, with the straight-beam limit for small angles.
  const double sinc = std::abs(phi) < 1e-8 ? 1 - phi * phi / 6 : std::sin(phi) / phi;
  const double cosc = std::abs(phi) < 1e-8 ? phi / 2 : (1 - std::cos(phi)) / phi;
  const double x = lf * cosc + lm * std::sin(phi);
  const double z = lf * sinc + lm * std::cos(phi);
  out.transverse = x;
  out.axial = lf + lm - z;
  return out;
}

BeamDeflection chain_tip_deflection(const DiscretizedRobot& robot, double field) {
  const auto res = solve_equilibrium(robot, FieldSpec::make_uniform(Vec3d(field, 0, 0)));
  const Pose tip = forward_kinematics(robot, res.theta);
  BeamDeflection out;
  out.transverse = std::hypot(tip.p.x(), tip.p.y());
  out.axial = robot.total_length - tip.p.z();
  out.tip_angle = std::acos(std::clamp(tip.r(2, 2), -1.0, 1.0));
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

FieldSpec benchmark_field() { return FieldSpec::make_uniform(Vec3d(5e-3, 0, 0)); }

namespace {

/// Piecewise-linear interpolation of a centerline parameterized by reference arc length.
Vec3d interpolate(const std::vector<double>& s, const std::vector<Vec3d>& pts, double q) {
  const auto it = std::upper_bound(s.begin(), s.end(), q);
  const std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - s.begin()), 1, s.size() - 1);
  const std::size_t lo = hi - 1;
  const double t = (q - s[lo]) / (s[hi] - s[lo]);
  return (1 - t) * pts[lo] + t * pts[hi];
}

}  // namespace

ConvergenceStudy convergence_study(const RobotSpec& spec, const FieldSpec& field, const std::vector<int>& joint_counts,
                                   int reference_joints) {
  for (std::size_t i = 0; i < joint_counts.size(); ++i) {
    if (joint_counts[i] >= reference_joints) throw std::invalid_argument("reference must be finer than every study");
    if (i > 0 && joint_counts[i] <= joint_counts[i - 1])
      throw std::invalid_argument("joint counts must be strictly increasing");
  }
  const auto ref_robot = discretize(spec, reference_joints);
  const auto ref = solve_equilibrium(ref_robot, field);
  const auto ref_pts = centerline(ref_robot, ref.theta);
  const auto ref_s = centerline_arclength(ref_robot);
  const Pose ref_tip = forward_kinematics(ref_robot, ref.theta);

  ConvergenceStudy out;
  std::vector<double> xs, ys;
  for (int n : joint_counts) {
    out.joint_counts.push_back(n);
    const auto robot = discretize(spec, n);
    try {
      const auto res = solve_equilibrium(robot, field);
      const auto pts = centerline(robot, res.theta);
      const auto s = centerline_arclength(robot);
      double sq = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) sq += (pts[i] - interpolate(ref_s, ref_pts, s[i])).squaredNorm();
      const double rmse = std::sqrt(sq / static_cast<double>(pts.size())) / spec.total_length();
      const Pose tip = forward_kinematics(robot, res.theta);
      const double pos = (tip.p - ref_tip.p).norm();
      const double rot = log_so3(Mat3d(ref_tip.r.transpose() * tip.r)).norm();
      out.rmse.push_back(rmse);
      out.position_error.push_back(pos);
      out.rotation_error.push_back(rot);
      out.distal_error.push_back(std::hypot(pos, rot));
      out.solved.push_back(true);
      if (rmse > 0) {
        xs.push_back(n);
        ys.push_back(rmse);
      }
    } catch (const SolveFailure& e) {
      out.rmse.push_back(std::nan(""));
      out.position_error.push_back(std::nan(""));
      out.rotation_error.push_back(std::nan(""));
      out.distal_error.push_back(std::nan(""));
      out.solved.push_back(false);
    }
  }
  out.fitted_slope = xs.size() >= 2 ? loglog_slope(xs, ys) : std::nan("");
  return out;
}

MonteCarloEstimate mc_objective(const DesignTemplate& tmpl, const DesignVariables& design,
                                const ObjectiveOptions& options, int n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw std::invalid_argument("Monte-Carlo estimate needs at least 100 samples");
  const DiscretizedRobot robot = design_robot(tmpl, design);
  const QuadratureSpec& q = options.quadrature;
  const double radius = options.ball_radius;
  const bool disk = q.domain == Domain::disk;
  const Vec3d t = DiscretizedRobot::tangent();
  const Vec3d normal = plane_normal(q);
  const Vec3d v = normal.cross(t).normalized();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  std::vector<Vec3d> samples(n_samples);
  for (auto& b : samples) {
    if (disk) {
      const double r = radius * std::sqrt(unif(rng));
      const double a = 2 * std::numbers::pi * unif(rng);
      b = r * (std::cos(a) * v + std::sin(a) * t);
    } else {
      Vec3d dir(gauss(rng), gauss(rng), gauss(rng));
      while (dir.norm() == 0) dir = Vec3d(gauss(rng), gauss(rng), gauss(rng));
      b = radius * std::cbrt(unif(rng)) * dir.normalized();
    }
  }

  std::vector<double> zj(n_samples), jac(n_samples);
  parallel_for(n_samples, options.workers, [&](int i) {
    const FieldSpec field = FieldSpec::make_uniform(samples[i]);
    const auto res = solve_equilibrium(robot, field, {}, options.solve);
    const double j = immersion_gram_exact(robot, field, res.theta).jacobian;
    jac[i] = j;
    zj[i] = performance_density(options.index, robot, res.theta, disk ? &normal : nullptr) * j;
  });

  auto mean_and_error = [&](const std::vector<double>& x) {
    double mean = 0;
    for (double xi : x) mean += xi;
    mean /= n_samples;
    double var = 0;
    for (double xi : x) var += (xi - mean) * (xi - mean);
    var /= n_samples - 1;
    return std::pair{mean, std::sqrt(var / n_samples)};
  };
  const double measure = domain_measure(q, radius);
  MonteCarloEstimate out;
  out.samples = n_samples;
  const auto [m, e] = mean_and_error(zj);
  out.value = measure * m;
  out.standard_error = measure * e;
  const auto [mv, ev] = mean_and_error(jac);
  out.volume = measure * mv;
  out.volume_error = measure * ev;
  return out;
}

}  // namespace magrod
