#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fput/potentials.hpp"
#include "fput/wave_solver.hpp"

namespace fput {

// Distances r_j and velocities v_j of a finite chain with free ends. The
// spring to the right of the last particle does not exist, so r.back() stays 0.
struct ChainState {
  std::vector<double> r;
  std::vector<double> v;
  double t = 0.0;
  long origin = 0;  // lattice index of element 0, moved by recentring

  ChainState() = default;
  explicit ChainState(std::size_t n) : r(n, 0.0), v(n, 0.0) {}
  std::size_t size() const { return v.size(); }
  double energy(const Potential& p) const;
  double momentum() const;
};

struct StepOptions {
  // A step is halved (recursively) while some spring changes 1 + r by more
  // than the fraction theta or dt sqrt(Φ''(r)) exceeds theta.
  double theta = 0.05;
  int max_depth = 12;
};

struct StepStats {
  long substeps = 0;
  int deepest = 0;
};

// One position-Verlet step (half drift, kick, half drift) of
// r_j' = v_{j+1} - v_j, v_j' = Φ'(r_j) - Φ'(r_{j-1}).
// Throws CollisionError when 1 + r_j < 1e-10 and SubstepLimit past max_depth.
ChainState step(const ChainState& state, double dt, const Potential& p, const StepOptions& opts = {},
                StepStats* stats = nullptr);

struct Perturbation {
  enum class Kind { None, VelocityBump, DistanceBump, Packet };
  Kind kind = Kind::None;
  double amplitude = 0.0;
  double offset = -2.0;  // position relative to the wave centre, in sites
  double width = 1.5;
};

// Samples r_j = R(j + 1/2 - tau0), v_j = V(j - tau0) and adds the
// perturbation. Throws DomainTooSmall when the profile at either end exceeds 1e-8.
ChainState launch_wave(const WaveProfile& wave, std::size_t n, double tau0, const Perturbation& pert = {});

struct TrackOptions {
  double a = 1.0;            // weight in |e^{a(j - tau)}(u - U)|
  double cone_speed = 0.0;   // cone j - tau0 >= speed * t; 0 picks the midpoint of sound speed and omega
  double tau0 = 0.0;         // initial wave position for the cone
  double ambiguity = 0.9;    // second correlation peak above this share of the first loses the track
};

struct OrbitTrack {
  std::vector<double> times;
  std::vector<double> tau;
  std::vector<double> omega_fit;
  std::vector<double> weighted_err;
  std::vector<double> l2_err;
  std::vector<double> cone_err;
  double cone_speed = 0.0;
  double speed = 0.0;        // least-squares slope of tau(t)
  double b0_fit = 0.0;       // decay rate of weighted_err above its late-time level
  double omega_inf = 0.0;
  double tau_inf = 0.0;      // tau(t) ≈ tau_inf + omega_inf t at late times
  double max_l2_err = 0.0;
};

// Fits (tau, omega) at every state against a ladder of profiles with
// increasing speed. Throws TrackLost on an ambiguous correlation peak.
OrbitTrack track_orbit(std::span<const ChainState> states, std::span<const WaveProfile> family,
                       const TrackOptions& opts = {});

// Least-squares decay rate b of err ≈ C e^{-b t}, fitted until the error
// first drops below floor_ratio times its initial value.
double fit_decay_rate(std::span<const double> times, std::span<const double> err, double floor_ratio = 1e-3);

// Sup distance between V/omega and the indicator of |x| < 1/2, over wave grid
// nodes farther than band from x = ±1/2.
double hard_sphere_distance(const WaveProfile& wave, double band);

struct SimulationConfig {
  double T = 2.0;
  double dt = 0.0;            // 0 picks 0.1 / omega
  std::size_t n = 0;          // 0 picks 40 + 6 omega T
  double tau0 = 0.0;          // 0 places the wave 20 sites plus its half-width from the left end
  // Stored states including t = 0. 0 stores one state per site crossing
  // (interval 1/omega), which keeps the collision phase fixed across samples.
  int samples = 0;
  Perturbation perturbation;
  StepOptions step;
  TrackOptions track;
  // Shift the window left once the wave comes within this many sites of the
  // right end; 0 disables recentring.
  double recenter_margin = 0.0;
};

struct SimulationResult {
  std::vector<ChainState> states;
  OrbitTrack track;
  StepStats stats;
  double energy_drift = 0.0;  // relative, between first and last state
  long window_shift = 0;      // total sites dropped by recentring
};

// Launches wave (the family member closest to its speed is not required to be
// the wave itself), integrates to T and tracks the orbit.
SimulationResult simulate(const WaveProfile& wave, std::span<const WaveProfile> family, const SimulationConfig& cfg);

}  // namespace fput
