#pragma once

#include <span>
#include <string>
#include <vector>

#include "fput/potentials.hpp"
#include "fput/scaling.hpp"
#include "fput/shape_ode.hpp"

namespace fput {

struct WaveOptions {
  double tol = 1e-11;            // sup-norm defect of the fixed-point equation
  double max_spacing = 0.05;     // largest scaled grid spacing
  int min_points_per_xi = 200;   // lower bound for points on [0, xi]
  int points_per_xi = 0;         // if > 0, fixes the number of points on [0, xi]
  double tail_margin = 20.0;     // extra half-length beyond x = 1.5 in units of 1/a
  double min_tail = 2.0;         // lower bound for that extra length
  int max_newton = 40;
  int max_halvings = 30;
  double linear_tol = 1e-13;     // relative GMRES tolerance
};

// Travelling wave r_j(t) = R(j + 1/2 - omega t), v_j(t) = V(j - omega t) on a
// uniform periodic grid in the scaled variable x_tilde = x / (delta beta).
struct WaveProfile {
  ScalingParams scaling;
  Potential potential = Potential::inverse_monomial(2.0);
  double h = 0.0;  // spacing in x_tilde
  int n_xi = 0;    // xi / h
  std::vector<double> x_tilde;
  std::vector<double> R;
  std::vector<double> V;
  // Filled by solve_parameter_derivative. Q is the scaled parameter
  // derivative, dR_ddelta and dV_ddelta the derivatives with respect to delta
  // at fixed lattice coordinate.
  std::vector<double> Q;
  std::vector<double> dR_ddelta;
  std::vector<double> dV_ddelta;
  double energy = 0.0;
  double tail_rate = 0.0;
  double residual = 0.0;
  int newton_iterations = 0;
  std::vector<std::string> log;

  std::size_t size() const { return x_tilde.size(); }
  // Scaled-to-lattice conversion factor delta * beta.
  double lattice_scale() const { return scaling.delta * scaling.beta; }
  double x(std::size_t i) const { return lattice_scale() * x_tilde[i]; }
  double spacing_x() const { return lattice_scale() * h; }
  // Half-length of the grid in lattice units.
  double half_length_x() const;
  // Profiles at a lattice coordinate; zero outside the grid.
  double R_at(double x) const;
  double V_at(double x) const;
};

// Explicit approximations evaluated on the scaled grid. Throw ShapeRangeError
// when the shape table does not reach 3 xi.
std::vector<double> approx_distance(const ScalingParams& s, const ShapeSolution& shape,
                                    std::span<const double> x_tilde);
std::vector<double> approx_velocity(const ScalingParams& s, const ShapeSolution& shape,
                                    std::span<const double> x_tilde);
std::vector<double> approx_parameter_derivative(const ScalingParams& s, const ShapeSolution& shape,
                                                std::span<const double> x_tilde);
// Constant c in (m+2) Q = (1 + m c) Y + (m+2) c Y♭ fixed by xi Q'(xi) + Q(xi) = 0.
double approx_q_constant(const ScalingParams& s, const ShapeSolution& shape);

// Newton iteration on R = K * (delta alpha)^{m+2} Φ'(R) started from the
// explicit approximation. K is the tent convolution of half-width 2 xi.
WaveProfile solve_exact(const ScalingParams& s, const ShapeSolution& shape, const Potential& p,
                        const WaveOptions& opts = {});

struct ParameterDerivative {
  std::vector<double> Q;
  std::vector<double> Q_breve;
};

// Solves the linear equation Q = K * (P Q + K_tilde) and fills Q, dR_ddelta
// and dV_ddelta on the wave.
ParameterDerivative solve_parameter_derivative(WaveProfile& wave, const ShapeSolution& shape);

// Positive root a of omega^2 = Φ''(0) 4 sinh^2(a/2) / a^2.
double tail_rate(double omega, const Potential& p);

struct EnergyDerivative {
  std::vector<double> delta;
  std::vector<double> dh_ddelta;
  // delta^{m+1} dh/ddelta, which tends to -m/2.
  std::vector<double> normalized;
};

// Three-point finite differences of the energy over delta at interior ladder
// points. Needs at least three waves.
EnergyDerivative energy_derivative(std::span<const WaveProfile> waves);

// Relative sup defect of the second-order form omega^2 R'' = ΔΦ'(R).
double second_order_defect(const WaveProfile& wave);

// Grid with the layout used by solve_exact.
std::vector<double> wave_grid(const ScalingParams& s, const Potential& p, const WaveOptions& opts, double* spacing,
                              int* n_xi);

}  // namespace fput
