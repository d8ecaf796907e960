#pragma once

#include <span>
#include <vector>

#include "fput/io.hpp"
#include "fput/shape_ode.hpp"
#include "fput/wave_solver.hpp"

namespace fput {

// Shape table long enough for every speed up to omega_max.
ShapeSolution shape_for(const RunConfig& cfg, double omega_max);

// Exact waves for each speed, solved in parallel (FPUT_THREADS caps the pool).
std::vector<WaveProfile> solve_ladder(const Potential& p, const ShapeSolution& shape, std::span<const double> omegas,
                                      const WaveOptions& opts, bool with_derivative);

struct WaveMetrics {
  double omega = 0.0;
  double delta = 0.0;
  double xi = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_limit = 0.0;         // (4 / (m (m+1)))^{1/m}
  double delta_alpha_Y = 0.0;       // δ α Y(ξ)
  double delta_alpha_xi_Yp = 0.0;   // δ α ξ Y'(ξ)
  double err_inf_R = 0.0;           // sup |R - R̆|
  double err_local_R = 0.0;         // same on |x_tilde| <= 1
  double err_inf_V = 0.0;           // sup |V - V̆|
  double V0_hat = 0.0;              // V(0) / ω
  double V09_hat = 0.0;             // V(0.9) / ω
  double tail_slope = 0.0;          // fitted decay rate of |R| on [1.6, 2.5]
  double tail_rate = 0.0;
  double energy = 0.0;
  double residual = 0.0;
  json to_json() const;
};

WaveMetrics wave_metrics(const WaveProfile& wave, const ShapeSolution& shape);

// Least-squares decay rate of log |R| over lattice coordinates in [lo, hi].
double measured_tail_slope(const WaveProfile& wave, double lo, double hi);

// Each pipeline writes its files and manifest.json into cfg.out_dir and
// returns a summary. run() dispatches on cfg.experiment.
json run_shape_ode(const RunConfig& cfg);
json run_scaling(const RunConfig& cfg);
json run_wave(const RunConfig& cfg);
json run_spectrum(const RunConfig& cfg);
json run_simulate(const RunConfig& cfg);
json run_sweep(const RunConfig& cfg);
json run_repro_figures(const RunConfig& cfg);
json run(const RunConfig& cfg);

}  // namespace fput
