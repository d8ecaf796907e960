#include "fput/scaling.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "fput/errors.hpp"

namespace fput {

namespace {

double lhs(double xi, double delta, const ShapeSolution& s) {
  const double m = s.m;
  return std::pow(delta, m / (m + 2.0)) *
         (xi * eval_shape(s, xi, ShapeField::Yp) + eval_shape(s, xi, ShapeField::Y));
}

double rhs(double xi, double m) { return std::pow(2.0 * xi, 2.0 / (m + 2.0)); }

// Smallest omega for which the equation has an admissible root, from the
// minimum over xi >= 1 of (xi Y' + Y) / (2 xi)^{2/(m+2)}.
double min_admissible_omega(const ShapeSolution& s) {
  const double m = s.m;
  auto ratio = [&](double lx) {
    const double xi = std::exp(lx);
    return (xi * eval_shape(s, xi, ShapeField::Yp) + eval_shape(s, xi, ShapeField::Y)) / rhs(xi, m);
  };
  const double hi = std::log(s.x_max());
  // Coarse scan, then Brent refinement around the best sample.
  constexpr int n = 64;
  int best = 0;
  double best_val = ratio(0.0);
  for (int i = 1; i <= n; ++i) {
    const double v = ratio(hi * i / n);
    if (v < best_val) best_val = v, best = i;
  }
  const double a = hi * std::max(0, best - 1) / n;
  const double b = hi * std::min(n, best + 1) / n;
  const auto res = boost::math::tools::brent_find_minima(ratio, a, b, 40);
  const double M = std::min(best_val, res.second);
  return std::pow(M, (m + 2.0) / 2.0);
}

}  // namespace

double scaling_guess(double omega, double m) {
  const double delta = std::pow(omega, -2.0 / m);
  const double yp_inf = 2.0 / std::sqrt(m * (m + 1.0));
  return std::pow(yp_inf, -(m + 2.0) / m) / (2.0 * delta);
}

double scaling_residual(double xi, double delta, const ShapeSolution& shape) {
  const double r = rhs(xi, shape.m);
  return std::abs(lhs(xi, delta, shape) - r) / r;
}

ScalingParams solve_scaling(double omega, const ShapeSolution& shape) {
  const double m = shape.m;
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidParameter("omega must be positive");
  const double delta = std::pow(omega, -2.0 / m);
  auto g = [&](double xi) { return lhs(xi, delta, shape) - rhs(xi, m); };
  auto no_root = [&](const std::string& why) {
    const double w = min_admissible_omega(shape);
    return NoLargeRoot("no admissible large root for omega=" + std::to_string(omega) + " (" + why +
                           "); minimal admissible omega is about " + std::to_string(w),
                       w);
  };
  auto check_range = [&](double xi) {
    if (xi > shape.x_max()) {
      throw ShapeRangeError("shape table ends at " + std::to_string(shape.x_max()) +
                            " but the scaling bracket needs " + std::to_string(xi));
    }
  };

  double xi0 = scaling_guess(omega, m);
  check_range(xi0);
  double lo, hi;
  if (g(xi0) < 0.0) {
    lo = xi0;
    hi = 2.0 * xi0;
    check_range(hi);
    while (g(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      check_range(hi);
    }
  } else {
    hi = xi0;
    lo = 0.5 * xi0;
    while (g(lo) >= 0.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-3) throw no_root("no sign change below the asymptotic guess");
    }
  }

  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  double xi = 0.5 * (bracket.first + bracket.second);
  if (std::abs(g(bracket.first)) < std::abs(g(xi))) xi = bracket.first;
  if (std::abs(g(bracket.second)) < std::abs(g(xi))) xi = bracket.second;
  if (xi < 1.0) throw no_root("large root xi=" + std::to_string(xi) + " < 1");

  ScalingParams p;
  p.m = m;
  p.omega = omega;
  p.delta = delta;
  p.xi = xi;
  p.alpha = std::pow(2.0 * delta * xi, -2.0 / (m + 2.0));
  p.beta = std::pow(p.alpha, (m + 2.0) / 2.0);
  return p;
}

}  // namespace fput
