#pragma once

#include <vector>

namespace fput {

// Tabulated solution of the asymptotic shape ODE
//   Y'' = 2/(m+1) · Y^{-(m+1)},  Y(0) = 1, Y'(0) = 0,
// together with the even/odd basis of its linearization
//   T'' = -2 T / Y^{m+2},  T_even(0) = 1, T_even'(0) = 0, T_odd(0) = 0, T_odd'(0) = 1.
// Only x >= 0 is stored; negative arguments use parity.
struct ShapeSolution {
  double m = 0.0;
  std::vector<double> grid;
  std::vector<double> Y, Yp;
  std::vector<double> T_even, T_even_p;
  std::vector<double> T_odd, T_odd_p;

  // Closed-form limits.
  double Yp_inf = 0.0;    // lim Y'
  double Te_p_inf = 0.0;  // lim T_even'
  double To_inf = 0.0;    // lim T_odd
  // Measured limits of the flat transform F♭ = x F' - F.
  double Yflat_inf = 0.0;
  double Te_flat_inf = 0.0;
  double To_flat_inf = 0.0;

  double x_max() const { return grid.empty() ? 0.0 : grid.back(); }
  // Right-hand side Y'' as a function of Y.
  double ypp(double y) const;
};

enum class ShapeField { Y, Yp, Yflat, Te, Tep, Teflat, To, Top, Toflat };

// Adaptive Dormand-Prince integration on [0, x_max] with absolute and relative
// tolerance tol.
ShapeSolution solve_shape(double m, double x_max, double tol = 1e-10);

// Quintic Hermite interpolation between integrator steps. Throws OutOfRange
// for |x| > x_max.
double eval_shape(const ShapeSolution& s, double x, ShapeField which);

// Extent large enough for downstream use at half-width xi.
double default_shape_extent(double xi);

}  // namespace fput
