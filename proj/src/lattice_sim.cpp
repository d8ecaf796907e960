#include "fput/lattice_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "fput/errors.hpp"

namespace fput {

double ChainState::energy(const Potential& p) const {
  double e = 0.0;
  for (std::size_t j = 0; j < size(); ++j) e += 0.5 * v[j] * v[j] + p.value(r[j]);
  return e;
}

double ChainState::momentum() const {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

namespace {

constexpr double kCollision = 1e-10;

void drift(ChainState& s, double h) {
  const std::size_t n = s.size();
  for (std::size_t j = 0; j + 1 < n; ++j) s.r[j] += h * (s.v[j + 1] - s.v[j]);
}

void kick(ChainState& s, double h, const Potential& p) {
  double left = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double f = s.r[j] == 0.0 ? 0.0 : p.d1(s.r[j]);
    s.v[j] += h * (f - left);
    left = f;
  }
}

bool collided(const std::vector<double>& r) {
  for (double x : r)
    if (!(1.0 + x >= kCollision)) return true;
  return false;
}

enum class Outcome { Accepted, Refine, Collision };

// Trial step. The acceptance test is symmetric in the start and end states
// and uses the midpoint distances, so a reversed step makes the same choice.
Outcome trial(const ChainState& s, double dt, const Potential& p, double theta, ChainState& out) {
  out = s;
  drift(out, 0.5 * dt);
  if (collided(out.r)) return Outcome::Collision;
  const double limit = theta * theta / (dt * dt);
  for (double x : out.r)
    if (x < 0.0 && p.d2(x) > limit) return Outcome::Refine;
  kick(out, dt, p);
  drift(out, 0.5 * dt);
  if (collided(out.r)) return Outcome::Collision;
  out.t = s.t + dt;
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    const double lo = std::min(1.0 + s.r[j], 1.0 + out.r[j]);
    if (std::abs(out.r[j] - s.r[j]) > theta * lo) return Outcome::Refine;
    if (out.r[j] < 0.0 && p.d2(out.r[j]) > limit) return Outcome::Refine;
    if (s.r[j] < 0.0 && p.d2(s.r[j]) > limit) return Outcome::Refine;
  }
  return Outcome::Accepted;
}

ChainState advance(const ChainState& s, double dt, const Potential& p, const StepOptions& opts, int depth,
                   StepStats& stats) {
  ChainState out;
  const Outcome o = trial(s, dt, p, opts.theta, out);
  if (o == Outcome::Accepted) {
    ++stats.substeps;
    stats.deepest = std::max(stats.deepest, depth);
    return out;
  }
  if (depth >= opts.max_depth) {
    if (o == Outcome::Collision)
      throw CollisionError("1 + r fell below 1e-10 at t = " + std::to_string(s.t));
    throw SubstepLimit("step at t = " + std::to_string(s.t) + " needs more than " +
                       std::to_string(opts.max_depth) + " halvings");
  }
  const ChainState mid = advance(s, 0.5 * dt, p, opts, depth + 1, stats);
  return advance(mid, 0.5 * dt, p, opts, depth + 1, stats);
}

}  // namespace

ChainState step(const ChainState& state, double dt, const Potential& p, const StepOptions& opts, StepStats* stats) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
  if (!(opts.theta > 0.0 && opts.theta < 1.0)) throw InvalidParameter("theta must lie in (0, 1)");
  if (state.r.size() != state.v.size() || state.size() < 2)
    throw InvalidParameter("chain needs matching r and v with at least two sites");
  StepStats local;
  ChainState out = advance(state, dt, p, opts, 0, stats ? *stats : local);
  out.origin = state.origin;
  return out;
}

ChainState launch_wave(const WaveProfile& wave, std::size_t n, double tau0, const Perturbation& pert) {
  if (n < 2) throw InvalidParameter("chain needs at least two sites");
  const double tail = 1e-8;
  const double last = static_cast<double>(n - 1);
  if (std::abs(wave.R_at(0.5 - tau0)) > tail || std::abs(wave.V_at(-tau0)) > tail ||
      std::abs(wave.R_at(last + 0.5 - tau0)) > tail || std::abs(wave.V_at(last - tau0)) > tail)
    throw DomainTooSmall("profile does not decay to 1e-8 at the chain ends; n = " + std::to_string(n) +
                         ", tau0 = " + std::to_string(tau0));

  ChainState s(n);
  for (std::size_t j = 0; j + 1 < n; ++j) s.r[j] = wave.R_at(static_cast<double>(j) + 0.5 - tau0);
  for (std::size_t j = 0; j < n; ++j) s.v[j] = wave.V_at(static_cast<double>(j) - tau0);

  if (pert.kind == Perturbation::Kind::None || pert.amplitude == 0.0) return s;
  if (!(pert.width > 0.0)) throw InvalidParameter("perturbation width must be positive");
  const double centre = tau0 + pert.offset;
  const double eta = pert.amplitude;
  const double w = pert.width;
  auto gauss = [&](double x) { return std::exp(-(x / w) * (x / w)); };
  switch (pert.kind) {
    case Perturbation::Kind::VelocityBump:
      for (std::size_t j = 0; j < n; ++j) s.v[j] += eta * gauss(static_cast<double>(j) - centre);
      break;
    case Perturbation::Kind::DistanceBump:
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const double x = static_cast<double>(j) + 0.5 - centre;
        if (std::abs(x) < w) {
          const double c = std::cos(0.5 * std::numbers::pi * x / w);
          s.r[j] += eta * c * c;
        }
      }
      break;
    case Perturbation::Kind::Packet: {
      // Long-wave packet moving left at the sound speed.
      const double sound = std::sqrt(wave.potential.curvature());
      for (std::size_t j = 0; j + 1 < n; ++j) s.r[j] += eta * gauss(static_cast<double>(j) + 0.5 - centre);
      for (std::size_t j = 0; j < n; ++j) s.v[j] += sound * eta * gauss(static_cast<double>(j) - centre);
      break;
    }
    case Perturbation::Kind::None:
      break;
  }
  if (collided(s.r)) throw CollisionError("perturbation pushes 1 + r below 1e-10");
  return s;
}

namespace {

struct Fit {
  double tau = 0.0;
  double misfit = 0.0;
};

// Sites [lo, hi) around the wave where the profiles are supported.
struct Window {
  long lo = 0;
  long hi = 0;
};

// Squared misfit of the state against one profile translated to tau, with
// velocities scaled by 1/speed so both components are O(1).
double misfit(const ChainState& s, const WaveProfile& w, double tau, double speed, Window win) {
  double e = 0.0;
  const long n = static_cast<long>(s.size());
  for (long j = std::max(0L, win.lo); j < std::min(n, win.hi); ++j) {
    const double x = static_cast<double>(j + s.origin) - tau;
    const double dr = j + 1 < n ? s.r[j] - w.R_at(x + 0.5) : 0.0;
    const double dv = (s.v[j] - w.V_at(x)) / speed;
    e += dr * dr + dv * dv;
  }
  return e;
}

Fit fit_tau(const ChainState& s, const WaveProfile& w, double guess, double speed, Window win) {
  double best = guess;
  double best_e = std::numeric_limits<double>::infinity();
  for (int i = -12; i <= 12; ++i) {
    const double tau = guess + i / 12.0;
    const double e = misfit(s, w, tau, speed, win);
    if (e < best_e) {
      best_e = e;
      best = tau;
    }
  }
  auto f = [&](double tau) { return misfit(s, w, tau, speed, win); };
  const auto r = boost::math::tools::brent_find_minima(f, best - 1.0 / 12.0, best + 1.0 / 12.0, 52);
  return {r.first, r.second};
}

// Coarse wave position from the correlation of v with the sampled template.
double correlate(const ChainState& s, const WaveProfile& w, double ambiguity) {
  const long n = static_cast<long>(s.size());
  const long reach = static_cast<long>(std::ceil(w.half_length_x())) + 1;
  std::vector<double> templ(2 * reach + 1);
  for (long i = -reach; i <= reach; ++i) templ[i + reach] = w.V_at(static_cast<double>(i));
  std::vector<double> c(n, 0.0);
  for (long k = 0; k < n; ++k) {
    double acc = 0.0;
    for (long i = -reach; i <= reach; ++i)
      if (k + i >= 0 && k + i < n) acc += s.v[k + i] * templ[i + reach];
    c[k] = acc;
  }
  const long kmax = std::distance(c.begin(), std::max_element(c.begin(), c.end()));
  if (!(c[kmax] > 0.0)) throw TrackLost("no positive correlation with the wave template");
  double second = 0.0;
  for (long k = 1; k + 1 < n; ++k)
    if (std::abs(k - kmax) > 2 && c[k] >= c[k - 1] && c[k] >= c[k + 1]) second = std::max(second, c[k]);
  if (second > ambiguity * c[kmax])
    throw TrackLost("correlation peak is ambiguous at t = " + std::to_string(s.t) + " (ratio " +
                    std::to_string(second / c[kmax]) + ")");
  double pos = static_cast<double>(kmax);
  if (kmax > 0 && kmax + 1 < n) {
    const double den = c[kmax - 1] - 2.0 * c[kmax] + c[kmax + 1];
    if (den < 0.0) pos += 0.5 * (c[kmax - 1] - c[kmax + 1]) / den;
  }
  return pos + static_cast<double>(s.origin);
}

// Quadratic Lagrange weights of x on three nodes.
std::array<double, 3> lagrange3(const std::array<double, 3>& nodes, double x) {
  std::array<double, 3> l{};
  for (int i = 0; i < 3; ++i) {
    double v = 1.0;
    for (int k = 0; k < 3; ++k)
      if (k != i) v *= (x - nodes[k]) / (nodes[i] - nodes[k]);
    l[i] = v;
  }
  return l;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

}  // namespace

double fit_decay_rate(std::span<const double> times, std::span<const double> err, double floor_ratio) {
  if (times.size() != err.size()) throw InvalidParameter("times and errors differ in length");
  if (err.empty() || !(err[0] > 0.0)) throw InvalidParameter("decay fit needs a positive initial error");
  std::vector<double> t, y;
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (!(err[i] > floor_ratio * err[0])) break;
    t.push_back(times[i]);
    y.push_back(std::log(err[i]));
  }
  if (t.size() < 2) throw InvalidParameter("decay fit needs two samples above the floor");
  return -least_squares_slope(t, y);
}

OrbitTrack track_orbit(std::span<const ChainState> states, std::span<const WaveProfile> family,
                       const TrackOptions& opts) {
  if (states.empty()) throw InvalidParameter("no states to track");
  if (family.size() < 3) throw InsufficientLadder("tracking needs at least three profiles");
  for (std::size_t i = 1; i < family.size(); ++i)
    if (!(family[i].scaling.omega > family[i - 1].scaling.omega))
      throw InvalidParameter("profile ladder must have increasing speed");

  const WaveProfile& ref = family[family.size() / 2];
  const double omega_ref = ref.scaling.omega;
  const long reach = static_cast<long>(std::ceil(ref.half_length_x())) + 3;
  const double sound = std::sqrt(ref.potential.curvature());

  OrbitTrack tr;
  tr.cone_speed = opts.cone_speed > 0.0 ? opts.cone_speed : 0.5 * (sound + omega_ref);

  for (const ChainState& s : states) {
    const double guess = correlate(s, ref, opts.ambiguity);
    const long centre = std::lround(guess) - s.origin;
    const Window win{centre - reach, centre + reach + 1};

    std::vector<Fit> fits;
    fits.reserve(family.size());
    for (const WaveProfile& w : family) fits.push_back(fit_tau(s, w, guess, omega_ref, win));
    std::size_t ib = 0;
    for (std::size_t i = 1; i < fits.size(); ++i)
      if (fits[i].misfit < fits[ib].misfit) ib = i;
    const std::size_t i0 = std::clamp<std::size_t>(ib, 1, fits.size() - 2) - 1;
    const std::array<double, 3> om{family[i0].scaling.omega, family[i0 + 1].scaling.omega,
                                   family[i0 + 2].scaling.omega};
    const std::array<double, 3> e{fits[i0].misfit, fits[i0 + 1].misfit, fits[i0 + 2].misfit};
    // Vertex of the parabola through the three misfits.
    const double d1 = (e[1] - e[0]) / (om[1] - om[0]);
    const double d2 = (e[2] - e[1]) / (om[2] - om[1]);
    const double curv = (d2 - d1) / (om[2] - om[0]);
    double omega = om[1];
    if (curv > 0.0) omega = 0.5 * (om[0] + om[1]) - d1 / (2.0 * curv);
    omega = std::clamp(omega, family.front().scaling.omega, family.back().scaling.omega);
    const auto l = lagrange3(om, omega);
    const double tau = l[0] * fits[i0].tau + l[1] * fits[i0 + 1].tau + l[2] * fits[i0 + 2].tau;

    // Residual against the translate interpolated between the three profiles.
    const long n = static_cast<long>(s.size());
    double l2 = 0.0, weighted = 0.0, cone = 0.0;
    const double cone_start = opts.tau0 + tr.cone_speed * s.t;
    const double front = static_cast<double>(reach);
    for (long j = 0; j < n; ++j) {
      const double x = static_cast<double>(j + s.origin) - tau;
      double R = 0.0, V = 0.0;
      for (int k = 0; k < 3; ++k) {
        R += l[k] * family[i0 + k].R_at(x + 0.5);
        V += l[k] * family[i0 + k].V_at(x);
      }
      const double dr = j + 1 < n ? s.r[j] - R : 0.0;
      const double dv = s.v[j] - V;
      const double sq = dr * dr + dv * dv;
      l2 += sq;
      if (x <= front) weighted += std::exp(2.0 * opts.a * x) * sq;
      if (static_cast<double>(j + s.origin) >= cone_start) cone += sq;
    }
    tr.times.push_back(s.t);
    tr.tau.push_back(tau);
    tr.omega_fit.push_back(omega);
    tr.l2_err.push_back(std::sqrt(l2));
    tr.weighted_err.push_back(std::sqrt(weighted));
    tr.cone_err.push_back(std::sqrt(cone));
  }

  tr.max_l2_err = *std::max_element(tr.l2_err.begin(), tr.l2_err.end());
  if (tr.times.size() >= 2) tr.speed = least_squares_slope(tr.times, tr.tau);
  const std::size_t late = tr.times.size() - std::max<std::size_t>(1, tr.times.size() / 4);
  double om_sum = 0.0, tau_sum = 0.0;
  for (std::size_t i = late; i < tr.times.size(); ++i) om_sum += tr.omega_fit[i];
  tr.omega_inf = om_sum / static_cast<double>(tr.times.size() - late);
  for (std::size_t i = late; i < tr.times.size(); ++i) tau_sum += tr.tau[i] - tr.omega_inf * tr.times[i];
  tr.tau_inf = tau_sum / static_cast<double>(tr.times.size() - late);
  // Decay of the excess over the late-time level, which is integration noise.
  std::vector<double> tail(tr.weighted_err.begin() + static_cast<long>(late), tr.weighted_err.end());
  std::nth_element(tail.begin(), tail.begin() + static_cast<long>(tail.size() / 2), tail.end());
  const double floor = tail[tail.size() / 2];
  std::vector<double> excess;
  for (double e : tr.weighted_err) excess.push_back(std::max(e - floor, 0.0));
  tr.b0_fit = 0.0;
  if (excess[0] > 0.0) {
    try {
      tr.b0_fit = fit_decay_rate(tr.times, excess, 1e-2);
    } catch (const InvalidParameter&) {
      tr.b0_fit = 0.0;
    }
  }
  return tr;
}

double hard_sphere_distance(const WaveProfile& wave, double band) {
  if (!(band >= 0.0)) throw InvalidParameter("band must be non-negative");
  const double omega = wave.scaling.omega;
  double sup = 0.0;
  for (std::size_t i = 0; i < wave.size(); ++i) {
    const double x = wave.x(i);
    if (std::abs(std::abs(x) - 0.5) <= band) continue;
    const double indicator = std::abs(x) < 0.5 ? 1.0 : 0.0;
    sup = std::max(sup, std::abs(wave.V[i] / omega - indicator));
  }
  return sup;
}

SimulationResult simulate(const WaveProfile& wave, std::span<const WaveProfile> family, const SimulationConfig& cfg) {
  const double omega = wave.scaling.omega;
  if (!(cfg.T > 0.0)) throw InvalidParameter("simulation time must be positive");
  if (cfg.samples == 1 || cfg.samples < 0) throw InvalidParameter("need at least two samples");
  const double dt = cfg.dt > 0.0 ? cfg.dt : 0.1 / omega;
  const std::size_t n =
      cfg.n > 0 ? cfg.n : static_cast<std::size_t>(std::ceil(40.0 + 6.0 * omega * cfg.T));
  const double tau0 = cfg.tau0 > 0.0 ? cfg.tau0 : 20.0 + std::ceil(wave.half_length_x());

  SimulationResult res;
  ChainState s = launch_wave(wave, n, tau0, cfg.perturbation);
  const double e0 = s.energy(wave.potential);
  res.states.push_back(s);

  const int samples = cfg.samples > 0 ? cfg.samples : static_cast<int>(std::floor(omega * cfg.T + 1e-9)) + 1;
  if (samples < 2) throw InvalidParameter("run too short for one site crossing");
  const double interval = cfg.samples > 0 ? cfg.T / (samples - 1) : 1.0 / omega;
  const long per = std::max(1L, static_cast<long>(std::ceil(interval / dt - 1e-9)));
  const double h = interval / static_cast<double>(per);
  for (int k = 1; k < samples; ++k) {
    for (long i = 0; i < per; ++i) s = step(s, h, wave.potential, cfg.step, &res.stats);
    s.t = k * interval;
    if (cfg.recenter_margin > 0.0) {
      const auto peak = std::distance(s.v.begin(), std::max_element(s.v.begin(), s.v.end()));
      if (static_cast<double>(static_cast<long>(n) - peak) < cfg.recenter_margin) {
        const long shift = static_cast<long>(n / 2);
        s.r.erase(s.r.begin(), s.r.begin() + shift);
        s.v.erase(s.v.begin(), s.v.begin() + shift);
        s.r.resize(n, 0.0);
        s.v.resize(n, 0.0);
        s.r.back() = 0.0;
        s.origin += shift;
        res.window_shift += shift;
      }
    }
    res.states.push_back(s);
  }
  const double e1 = s.energy(wave.potential);
  res.energy_drift = (e1 - e0) / std::abs(e0);

  TrackOptions topts = cfg.track;
  if (topts.tau0 == 0.0) topts.tau0 = tau0;
  res.track = track_orbit(res.states, family, topts);
  return res;
}

}  // namespace fput
