#include "fput/shape_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "fput/errors.hpp"

namespace fput {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 6>;  // Y, Y', Te, Te', To, To'

constexpr double kMaxStep = 0.5;

// Value, first and second derivative of one tabulated field at a node.
struct Jet {
  double f, d1, d2;
};

double quintic_hermite(const Jet& a, const Jet& b, double h, double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h20 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h21 = 0.5 * (t3 - 2 * t4 + t5);
  return a.f * h00 + h * a.d1 * h10 + h * h * a.d2 * h20 + b.f * h01 + h * b.d1 * h11 + h * h * b.d2 * h21;
}

// Limit A of F(x) = A + x^{-p}(B + C/x + D/x^2) from F at X, X/2, X/4, X/8.
double extrapolate(const ShapeSolution& s, ShapeField f, double p) {
  constexpr int n = 4;
  const double X = s.x_max();
  double a[n][n + 1];
  for (int i = 0; i < n; ++i) {
    const double x = X / std::pow(2.0, i);
    a[i][0] = 1.0;
    for (int j = 1; j < n; ++j) a[i][j] = std::pow(x, -p - (j - 1));
    a[i][n] = eval_shape(s, x, f);
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double q = a[r][c] / a[c][c];
      for (int k = c; k <= n; ++k) a[r][k] -= q * a[c][k];
    }
  }
  return a[0][n] / a[0][0];
}

struct NodeJets {
  Jet y, yp, te, tep, to, top;
};

NodeJets jets(const ShapeSolution& s, std::size_t i) {
  const double m = s.m;
  const double y = s.Y[i], yp = s.Yp[i];
  const double inv = std::pow(y, -(m + 2.0));
  const double ypp = s.ypp(y);
  const double yppp = -2.0 * inv * yp;
  auto basis = [&](double t, double tp) {
    const double tpp = -2.0 * t * inv;
    const double tppp = -2.0 * tp * inv + 2.0 * (m + 2.0) * t * inv / y * yp;
    return std::pair<Jet, Jet>{{t, tp, tpp}, {tp, tpp, tppp}};
  };
  const auto [te, tep] = basis(s.T_even[i], s.T_even_p[i]);
  const auto [to, top] = basis(s.T_odd[i], s.T_odd_p[i]);
  return {{y, yp, ypp}, {yp, ypp, yppp}, te, tep, to, top};
}

}  // namespace

double ShapeSolution::ypp(double y) const { return 2.0 / (m + 1.0) * std::pow(y, -(m + 1.0)); }

double default_shape_extent(double xi) { return std::max(10.0 * xi, 100.0); }

ShapeSolution solve_shape(double m, double x_max, double tol) {
  if (!(m > 1.0)) throw InvalidParameter("shape ODE requires m > 1, got m=" + std::to_string(m));
  if (!(x_max > 0.0)) throw InvalidParameter("shape ODE requires x_max > 0");
  if (!(tol > 0.0)) throw InvalidParameter("shape ODE requires tol > 0");

  ShapeSolution s;
  s.m = m;
  const double c = 2.0 / (m + 1.0);
  auto rhs = [m, c](const State& u, State& du, double /*x*/) {
    const double inv = std::pow(u[0], -(m + 2.0));
    du[0] = u[1];
    du[1] = c * inv * u[0];
    du[2] = u[3];
    du[3] = -2.0 * u[2] * inv;
    du[4] = u[5];
    du[5] = -2.0 * u[4] * inv;
  };
  auto record = [&s](const State& u, double x) {
    s.grid.push_back(x);
    s.Y.push_back(u[0]);
    s.Yp.push_back(u[1]);
    s.T_even.push_back(u[2]);
    s.T_even_p.push_back(u[3]);
    s.T_odd.push_back(u[4]);
    s.T_odd_p.push_back(u[5]);
  };

  State u{1.0, 0.0, 1.0, 0.0, 0.0, 1.0};
  try {
    auto stepper = odeint::make_dense_output(tol, tol, kMaxStep, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_adaptive(stepper, rhs, u, 0.0, x_max, std::min(1e-3, x_max), record);
  } catch (const odeint::odeint_error& e) {
    throw ToleranceNotMet(std::string("shape ODE step control failed: ") + e.what());
  }
  for (double v : s.Y)
    if (!std::isfinite(v) || v <= 0.0) throw ToleranceNotMet("shape ODE produced a non-positive or non-finite Y");
  if (s.grid.back() < x_max) {
    // integrate_adaptive ends exactly at x_max; guard against rounding.
    s.grid.back() = x_max;
  }

  s.Yp_inf = 2.0 / std::sqrt(m * (m + 1.0));
  s.Te_p_inf = -std::sqrt(m / (m + 1.0));
  s.To_inf = std::sqrt((m + 1.0) / m);
  const double X = s.x_max();
  if (X >= 16.0) {
    s.Yflat_inf = extrapolate(s, ShapeField::Yflat, m - 1.0);
    s.Te_flat_inf = extrapolate(s, ShapeField::Teflat, m - 1.0);
    s.To_flat_inf = extrapolate(s, ShapeField::Toflat, m);
  } else {
    s.Yflat_inf = eval_shape(s, X, ShapeField::Yflat);
    s.Te_flat_inf = eval_shape(s, X, ShapeField::Teflat);
    s.To_flat_inf = eval_shape(s, X, ShapeField::Toflat);
  }
  return s;
}

double eval_shape(const ShapeSolution& s, double x, ShapeField which) {
  const double ax = std::abs(x);
  if (s.grid.empty() || ax > s.x_max() * (1.0 + 1e-12)) {
    throw OutOfRange("shape evaluated at |x|=" + std::to_string(ax) + " beyond x_max=" + std::to_string(s.x_max()));
  }
  auto it = std::upper_bound(s.grid.begin(), s.grid.end(), ax);
  std::size_t i = it == s.grid.begin() ? 0 : static_cast<std::size_t>(it - s.grid.begin()) - 1;
  if (i + 1 >= s.grid.size()) i = s.grid.size() - 2;
  const double h = s.grid[i + 1] - s.grid[i];
  const double t = std::clamp((ax - s.grid[i]) / h, 0.0, 1.0);
  const NodeJets a = jets(s, i), b = jets(s, i + 1);
  auto interp = [&](Jet NodeJets::*field) { return quintic_hermite(a.*field, b.*field, h, t); };

  // Even fields keep their sign under x -> -x, odd fields flip it.
  const double odd = x < 0.0 ? -1.0 : 1.0;
  switch (which) {
    case ShapeField::Y:
      return interp(&NodeJets::y);
    case ShapeField::Yp:
      return odd * interp(&NodeJets::yp);
    case ShapeField::Yflat:
      return ax * interp(&NodeJets::yp) - interp(&NodeJets::y);
    case ShapeField::Te:
      return interp(&NodeJets::te);
    case ShapeField::Tep:
      return odd * interp(&NodeJets::tep);
    case ShapeField::Teflat:
      return ax * interp(&NodeJets::tep) - interp(&NodeJets::te);
    case ShapeField::To:
      return odd * interp(&NodeJets::to);
    case ShapeField::Top:
      return interp(&NodeJets::top);
    case ShapeField::Toflat:
      return odd * (ax * interp(&NodeJets::top) - interp(&NodeJets::to));
  }
  return 0.0;
}

}  // namespace fput
