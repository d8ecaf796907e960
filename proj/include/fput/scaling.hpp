#pragma once

#include "fput/shape_ode.hpp"

namespace fput {

// Ties the lattice scale of a wave with speed omega to the shape ODE scale.
struct ScalingParams {
  double m = 0.0;
  double omega = 0.0;
  double delta = 0.0;  // omega^{-2/m}
  double xi = 0.0;     // half-width of the tip interval in scaled units
  double alpha = 0.0;  // (2 delta xi)^{-2/(m+2)}
  double beta = 0.0;   // alpha^{(m+2)/2}
};

// Leading-order location of the large root, used to size the shape table.
double scaling_guess(double omega, double m);

// Solves delta^{m/(m+2)} (xi Y'(xi) + Y(xi)) = (2 xi)^{2/(m+2)} for its larger
// root. Throws NoLargeRoot when omega is too small and ShapeRangeError when
// the shape table does not reach the bracket.
ScalingParams solve_scaling(double omega, const ShapeSolution& shape);

// Relative defect of the defining equation at xi.
double scaling_residual(double xi, double delta, const ShapeSolution& shape);

}  // namespace fput
