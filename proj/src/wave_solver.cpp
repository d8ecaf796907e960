#include "fput/wave_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "fourier.hpp"
#include "fput/errors.hpp"
#include "linear_solve.hpp"

namespace fput {

namespace {

using detail::PeriodicFft;

// Tent and box convolutions of half-widths 2 xi and xi on the periodic grid.
struct Kernels {
  PeriodicFft fft;
  std::vector<double> tent, box;
  Kernels(int n, double h, double xi) : fft(n, h) {
    tent = fft.sample([xi](double k) { return detail::tent_symbol(k, xi); });
    box = fft.sample([xi](double k) { return detail::box_symbol(k, xi); });
  }
  std::vector<double> conv_tent(std::span<const double> f) const { return fft.apply(f, tent); }
  std::vector<double> conv_box(std::span<const double> f) const { return fft.apply(f, box); }
};

// Averages u with its reflection x -> -x.
void symmetrize(std::span<double> u) {
  const std::size_t n = u.size();
  for (std::size_t i = 1; i < n / 2; ++i) {
    const double avg = 0.5 * (u[i] + u[n - i]);
    u[i] = avg;
    u[n - i] = avg;
  }
}

double sup_norm(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s = std::max(s, std::abs(v));
  return s;
}

double l2_norm(std::span<const double> u) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s);
}

void check_consistent(const ScalingParams& s, const ShapeSolution& shape) {
  if (std::abs(s.m - shape.m) > 1e-12) {
    throw InvalidParameter("scaling and shape solution use different m");
  }
  if (shape.x_max() < s.xi) {
    throw ShapeRangeError("shape table ends at " + std::to_string(shape.x_max()) + " but xi=" + std::to_string(s.xi));
  }
}

// Continuation of a function known on [0, xi] to [xi, 3 xi] by the
// convolution structure: u(x) = u(xi)/2 - u(x - 2 xi)/2 + u'(xi)(x - 3 xi)/2.
template <class F, class dF>
double base_extension(double ax, double xi, F u, dF du) {
  return 0.5 * u(xi) - 0.5 * u(ax - 2.0 * xi) + 0.5 * du(xi) * (ax - 3.0 * xi);
}

}  // namespace

double WaveProfile::half_length_x() const { return lattice_scale() * h * static_cast<double>(size() / 2); }

double WaveProfile::R_at(double x) const {
  return detail::lagrange8(R, x / lattice_scale() / h + static_cast<double>(size() / 2));
}

double WaveProfile::V_at(double x) const {
  return detail::lagrange8(V, x / lattice_scale() / h + static_cast<double>(size() / 2));
}

std::vector<double> approx_distance(const ScalingParams& s, const ShapeSolution& shape,
                                    std::span<const double> x_tilde) {
  check_consistent(s, shape);
  const double da = s.delta * s.alpha;
  const double xi = s.xi;
  auto u = [&](double x) { return -1.0 + da * eval_shape(shape, x, ShapeField::Y); };
  auto du = [&](double x) { return da * eval_shape(shape, x, ShapeField::Yp); };
  std::vector<double> out(x_tilde.size(), 0.0);
  for (std::size_t i = 0; i < x_tilde.size(); ++i) {
    const double ax = std::abs(x_tilde[i]);
    if (ax <= xi)
      out[i] = u(ax);
    else if (ax < 3.0 * xi)
      out[i] = base_extension(ax, xi, u, du);
  }
  return out;
}

std::vector<double> approx_velocity(const ScalingParams& s, const ShapeSolution& shape,
                                    std::span<const double> x_tilde) {
  check_consistent(s, shape);
  const double amp = -0.5 * s.omega * std::pow(s.alpha, -0.5 * s.m);
  const double edge = eval_shape(shape, s.xi, ShapeField::Yp);
  std::vector<double> out(x_tilde.size(), 0.0);
  for (std::size_t i = 0; i < x_tilde.size(); ++i) {
    const double ax = std::abs(x_tilde[i]);
    if (ax < 2.0 * s.xi) out[i] = amp * (eval_shape(shape, ax - s.xi, ShapeField::Yp) - edge);
  }
  return out;
}

double approx_q_constant(const ScalingParams& s, const ShapeSolution& shape) {
  check_consistent(s, shape);
  const double m = s.m, xi = s.xi;
  const double Y = eval_shape(shape, xi, ShapeField::Y);
  const double Yp = eval_shape(shape, xi, ShapeField::Yp);
  const double Yflat = xi * Yp - Y;
  const double lin = xi * Yp + Y;
  const double curv = xi * xi * shape.ypp(Y) + Yflat;
  return -lin / (m * lin + (m + 2.0) * curv);
}

std::vector<double> approx_parameter_derivative(const ScalingParams& s, const ShapeSolution& shape,
                                                std::span<const double> x_tilde) {
  const double c = approx_q_constant(s, shape);
  const double m = s.m, xi = s.xi;
  auto q = [&](double x) {
    return ((1.0 + m * c) * eval_shape(shape, x, ShapeField::Y) + (m + 2.0) * c * eval_shape(shape, x, ShapeField::Yflat)) /
           (m + 2.0);
  };
  auto dq = [&](double x) {
    const double y = eval_shape(shape, x, ShapeField::Y);
    const double sgn = x < 0.0 ? -1.0 : 1.0;
    return ((1.0 + m * c) * eval_shape(shape, x, ShapeField::Yp) + (m + 2.0) * c * sgn * std::abs(x) * shape.ypp(y)) /
           (m + 2.0);
  };
  std::vector<double> out(x_tilde.size(), 0.0);
  for (std::size_t i = 0; i < x_tilde.size(); ++i) {
    const double ax = std::abs(x_tilde[i]);
    if (ax <= xi)
      out[i] = q(ax);
    else if (ax < 3.0 * xi)
      out[i] = base_extension(ax, xi, q, dq);
  }
  return out;
}

double tail_rate(double omega, const Potential& p) {
  const double c = p.curvature();
  if (!(c > 0.0)) throw InvalidParameter("tail rate needs a positive sound speed");
  const double q = omega / std::sqrt(c);
  if (!(q > 1.0)) {
    throw SubsonicError("omega=" + std::to_string(omega) + " does not exceed the sound speed " +
                        std::to_string(std::sqrt(c)));
  }
  // With s = a/2 the identity reads sinh(s)/s = q.
  auto f = [q](double s) { return (s < 1e-4 ? 1.0 + s * s / 6.0 : std::sinh(s) / s) - q; };
  double lo = 1e-12, hi = 1.0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return r.first + r.second;  // a = 2 s
}

std::vector<double> wave_grid(const ScalingParams& s, const Potential& p, const WaveOptions& opts, double* spacing,
                              int* n_xi) {
  const double a = tail_rate(s.omega, p);
  const double half_x = 1.5 + std::max(opts.tail_margin / a, opts.min_tail);
  const double half_scaled = half_x / (s.delta * s.beta);
  int nx = opts.points_per_xi;
  if (nx <= 0) nx = std::max(opts.min_points_per_xi, static_cast<int>(std::ceil(s.xi / opts.max_spacing)));
  const double h = s.xi / nx;
  const int n = detail::fft_friendly_size(2 * static_cast<int>(std::ceil(half_scaled / h)));
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = (i - n / 2) * h;
  *spacing = h;
  *n_xi = nx;
  return grid;
}

WaveProfile solve_exact(const ScalingParams& s, const ShapeSolution& shape, const Potential& p,
                        const WaveOptions& opts) {
  require_valid(p);
  if (std::abs(p.m() - s.m) > 1e-12) throw InvalidParameter("potential order does not match the scaling m");
  check_consistent(s, shape);

  WaveProfile w;
  w.scaling = s;
  w.potential = p;
  w.tail_rate = tail_rate(s.omega, p);
  w.x_tilde = wave_grid(s, p, opts, &w.h, &w.n_xi);
  const int n = static_cast<int>(w.size());
  const Kernels ker(n, w.h, s.xi);

  const double da = s.delta * s.alpha;
  const double cf = std::pow(da, s.m + 2.0);
  auto residual = [&](const std::vector<double>& r) {
    std::vector<double> f(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) f[i] = cf * p.d1(r[i]);
    auto kf = ker.conv_tent(f);
    for (std::size_t i = 0; i < r.size(); ++i) kf[i] = r[i] - kf[i];
    return kf;
  };

  std::vector<double> R = approx_distance(s, shape, w.x_tilde);
  std::vector<double> F = residual(R);
  double fnorm = l2_norm(F);
  int it = 0;
  for (; it < opts.max_newton && sup_norm(F) > opts.tol; ++it) {
    std::vector<double> P(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) P[i] = cf * p.d2(R[i]);
    detail::LinearMap J(n, [&](const Eigen::VectorXd& u, Eigen::VectorXd& y) {
      std::vector<double> pu(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) pu[static_cast<std::size_t>(i)] = P[static_cast<std::size_t>(i)] * u[i];
      const auto kpu = ker.conv_tent(pu);
      for (int i = 0; i < n; ++i) y[i] = u[i] - kpu[static_cast<std::size_t>(i)];
    });
    Eigen::VectorXd rhs(n), d = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) rhs[i] = -F[static_cast<std::size_t>(i)];
    const auto lin = detail::gmres(J, rhs, d, opts.linear_tol, 3000, 200);
    if (!lin.converged && lin.error > 1e-8) {
      std::ostringstream os;
      os << "Newton step " << it << ": linear solve stalled at relative residual " << lin.error;
      w.log.push_back(os.str());
    }
    std::vector<double> step(d.data(), d.data() + n);
    symmetrize(step);

    double lambda = 1.0;
    bool accepted = false, range_hit = false;
    for (int k = 0; k <= opts.max_halvings; ++k, lambda *= 0.5) {
      std::vector<double> trial(R.size());
      bool ok = true;
      for (std::size_t i = 0; i < R.size(); ++i) {
        trial[i] = R[i] + lambda * step[i];
        if (!(trial[i] > -1.0)) ok = false;
      }
      if (!ok) {
        range_hit = true;
        continue;
      }
      auto Ft = residual(trial);
      const double tn = l2_norm(Ft);
      if (tn <= (1.0 - 1e-4 * lambda) * fnorm || sup_norm(Ft) <= opts.tol) {
        if (k > 0) {
          std::ostringstream os;
          os << "Newton step " << it << ": damped to lambda=" << lambda;
          w.log.push_back(os.str());
        }
        R = std::move(trial);
        F = std::move(Ft);
        fnorm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "no acceptable step after " << opts.max_halvings << " halvings at iteration " << it
         << " (residual " << sup_norm(F) << ")";
      if (range_hit) throw RangeViolation(os.str() + "; every trial left the domain R > -1");
      throw NewtonDiverged(os.str());
    }
  }
  w.residual = sup_norm(F);
  w.newton_iterations = it;
  if (w.residual > opts.tol) {
    std::ostringstream os;
    os << "Newton stopped after " << it << " iterations with residual " << w.residual;
    throw NewtonDiverged(os.str());
  }

  std::vector<double> f(R.size());
  const double cv = std::pow(da, 0.5 * s.m + 1.0);
  for (std::size_t i = 0; i < R.size(); ++i) f[i] = cv * p.d1(R[i]);
  auto V = ker.conv_box(f);
  for (double& v : V) v = -v;
  w.R = std::move(R);
  w.V = std::move(V);

  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) e += 0.5 * w.V[i] * w.V[i] + p.value(w.R[i]);
  w.energy = e * w.lattice_scale() * w.h;

  const double edge = std::max(std::abs(w.R.front()), std::abs(w.V.front()) / s.omega);
  if (edge > 1e-8) {
    std::ostringstream os;
    os << "profile at the grid edge is " << edge << "; the domain may be too short";
    w.log.push_back(os.str());
  }
  return w;
}

ParameterDerivative solve_parameter_derivative(WaveProfile& wave, const ShapeSolution& shape) {
  if (wave.R.empty()) throw InvalidParameter("wave has not been solved");
  const auto& s = wave.scaling;
  const auto& p = wave.potential;
  const int n = static_cast<int>(wave.size());
  const Kernels ker(n, wave.h, s.xi);
  const double da = s.delta * s.alpha;
  const double cf = std::pow(da, s.m + 2.0);
  const double ck = std::pow(da, s.m + 1.0);

  std::vector<double> P(wave.size()), Kt(wave.size());
  for (std::size_t i = 0; i < wave.size(); ++i) {
    P[i] = cf * p.d2(wave.R[i]);
    Kt[i] = ck * p.d1(wave.R[i]);
  }
  const auto kk = ker.conv_tent(Kt);
  detail::LinearMap A(n, [&](const Eigen::VectorXd& u, Eigen::VectorXd& y) {
    std::vector<double> pu(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pu[static_cast<std::size_t>(i)] = P[static_cast<std::size_t>(i)] * u[i];
    const auto kpu = ker.conv_tent(pu);
    for (int i = 0; i < n; ++i) y[i] = u[i] - kpu[static_cast<std::size_t>(i)];
  });
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(kk.data(), n);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  const auto lin = detail::gmres(A, rhs, q, 1e-13, 4000, 200);

  // Verify the solve directly since GMRES only reports an estimate.
  Eigen::VectorXd aq(n);
  A.apply(q, aq);
  const double rel = (aq - rhs).norm() / rhs.norm();
  if (!std::isfinite(rel) || rel > 1e-9) {
    std::ostringstream os;
    os << "parameter-derivative system is numerically singular (relative residual " << rel << " after "
       << lin.iterations << " GMRES iterations)";
    throw SingularSystem(os.str());
  }

  ParameterDerivative out;
  out.Q.assign(q.data(), q.data() + n);
  symmetrize(out.Q);
  out.Q_breve = approx_parameter_derivative(s, shape, wave.x_tilde);

  wave.Q = out.Q;
  wave.dR_ddelta.resize(wave.size());
  const double ma = s.m * s.alpha;
  std::vector<double> g(wave.size());
  for (std::size_t i = 0; i < wave.size(); ++i) {
    wave.dR_ddelta[i] = ma * out.Q[i];
    g[i] = p.d2(wave.R[i]) * wave.dR_ddelta[i];
  }
  const double cv = std::pow(da, 0.5 * s.m + 1.0);
  const auto bg = ker.conv_box(g);
  wave.dV_ddelta.resize(wave.size());
  for (std::size_t i = 0; i < wave.size(); ++i) {
    wave.dV_ddelta[i] = 0.5 * s.m / s.delta * wave.V[i] - cv * bg[i];
  }
  return out;
}

EnergyDerivative energy_derivative(std::span<const WaveProfile> waves) {
  if (waves.size() < 3) throw InsufficientLadder("energy derivative needs at least three waves");
  std::vector<std::size_t> order(waves.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return waves[a].scaling.delta < waves[b].scaling.delta; });
  const double m = waves[order[0]].scaling.m;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!(waves[order[i]].scaling.delta > waves[order[i - 1]].scaling.delta)) {
      throw InsufficientLadder("ladder contains repeated delta values");
    }
    if (std::abs(waves[order[i]].scaling.m - m) > 1e-12) throw InsufficientLadder("ladder mixes different m");
  }
  EnergyDerivative out;
  for (std::size_t i = 1; i + 1 < order.size(); ++i) {
    const auto& a = waves[order[i - 1]];
    const auto& b = waves[order[i]];
    const auto& c = waves[order[i + 1]];
    const double d0 = b.scaling.delta - a.scaling.delta;
    const double d1 = c.scaling.delta - b.scaling.delta;
    const double dh = -d1 / (d0 * (d0 + d1)) * a.energy + (d1 - d0) / (d0 * d1) * b.energy +
                      d0 / (d1 * (d0 + d1)) * c.energy;
    out.delta.push_back(b.scaling.delta);
    out.dh_ddelta.push_back(dh);
    out.normalized.push_back(std::pow(b.scaling.delta, m + 1.0) * dh);
  }
  return out;
}

double second_order_defect(const WaveProfile& wave) {
  const auto& s = wave.scaling;
  const int n = static_cast<int>(wave.size());
  PeriodicFft fft(n, wave.h);
  const auto k2 = fft.sample([](double k) { return -k * k; });
  const auto rpp = fft.apply(wave.R, k2);
  const double cf = std::pow(s.delta * s.alpha, s.m + 2.0);
  std::vector<double> f(wave.size());
  for (std::size_t i = 0; i < wave.size(); ++i) f[i] = cf * wave.potential.d1(wave.R[i]);
  const int shift = 2 * wave.n_xi;
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lap = f[static_cast<std::size_t>((i + shift) % n)] + f[static_cast<std::size_t>((i - shift + n) % n)] -
                       2.0 * f[static_cast<std::size_t>(i)];
    worst = std::max(worst, std::abs(rpp[static_cast<std::size_t>(i)] - lap));
    scale = std::max(scale, std::abs(lap));
  }
  return worst / scale;
}

}  // namespace fput
