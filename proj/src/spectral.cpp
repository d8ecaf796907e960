#include "fput/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <lapacke.h>

#include "fourier.hpp"
#include "fput/errors.hpp"

namespace fput {

namespace {

constexpr double kPi = std::numbers::pi;

// Node density 1 + Σ B / (1 + ((x - c)/w)^2) on [-X, X) and its primitive.
// Nodes are equidistant in the primitive, which makes the map smooth and
// periodic up to the small Lorentzian tails.
class NodeDensity {
 public:
  NodeDensity(double half_length, std::vector<double> centers, double width, double amplitude)
      : X_(half_length), centers_(std::move(centers)), w_(width), B_(amplitude) {}

  double density(double x) const {
    double r = 1.0;
    for (double c : centers_) {
      const double z = (x - c) / w_;
      r += B_ / (1.0 + z * z);
    }
    return r;
  }

  double primitive(double x) const {
    double r = x + X_;
    for (double c : centers_) r += B_ * w_ * (std::atan((x - c) / w_) - std::atan((-X_ - c) / w_));
    return r;
  }

  double total() const { return primitive(X_); }

  double invert(double target) const {
    if (target <= 0.0) return -X_;
    if (target >= total()) return X_;
    auto f = [&](double x) { return primitive(x) - target; };
    boost::uintmax_t iters = 200;
    auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-15 * (1.0 + std::abs(lo)); };
    const auto r = boost::math::tools::toms748_solve(f, -X_, X_, f(-X_), f(X_), tol, iters);
    return 0.5 * (r.first + r.second);
  }

 private:
  double X_;
  std::vector<double> centers_;
  double w_;
  double B_;
};

struct Nodes {
  std::vector<double> x;
  std::vector<double> dx_ds;  // derivative of the map from s ∈ [0, 2π)
  double half_length = 0.0;
  NodeDensity density{1.0, {}, 1.0, 0.0};
  // Position of a lattice point on the s-circle.
  double s_of(double xv) const { return 2.0 * kPi * density.primitive(xv) / density.total(); }
};

Nodes make_nodes(double half_length, double spacing, std::vector<double> centers, double width, double amplitude) {
  Nodes g;
  g.half_length = half_length;
  g.density = NodeDensity(half_length, std::move(centers), width, amplitude);
  const double total = g.density.total();
  int n = static_cast<int>(std::lround(total / spacing));
  // The clustered grid uses an odd count: with even n the Nyquist mode lies in
  // the kernel of the differentiation matrix and produces spurious eigenvalues.
  // The uniform grid keeps n = 2X / h so that half-shifts hit nodes exactly.
  if (amplitude != 0.0 && n % 2 == 0) ++n;
  g.x.resize(static_cast<std::size_t>(n));
  g.dx_ds.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double xj = amplitude == 0.0 ? -half_length + 2.0 * half_length * j / n : g.density.invert(total * j / n);
    g.x[static_cast<std::size_t>(j)] = xj;
    g.dx_ds[static_cast<std::size_t>(j)] = total / (2.0 * kPi * g.density.density(xj));
  }
  return g;
}

// Row of the trigonometric interpolant on n equispaced angles evaluated at s.
void interpolation_row(int n, double s, Eigen::Ref<Eigen::RowVectorXd> row) {
  const double pos = s * n / (2.0 * kPi);
  const double nearest = std::round(pos);
  row.setZero();
  if (std::abs(pos - nearest) < 1e-10) {
    int j = static_cast<int>(nearest) % n;
    if (j < 0) j += n;
    row[j] = 1.0;
    return;
  }
  for (int j = 0; j < n; ++j) {
    const double t = s - 2.0 * kPi * j / n;
    row[j] = std::sin(0.5 * n * t) / (n * (n % 2 == 0 ? std::tan(0.5 * t) : std::sin(0.5 * t)));
  }
}

Eigen::MatrixXd differentiation_matrix(const Nodes& g) {
  const int n = static_cast<int>(g.x.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double sign = (i - j) % 2 == 0 ? 1.0 : -1.0;
      const double t = kPi * (i - j) / n;
      const double core = n % 2 == 0 ? 1.0 / std::tan(t) : 1.0 / std::sin(t);
      D(i, j) = 0.5 * sign * core / g.dx_ds[static_cast<std::size_t>(i)];
    }
  }
  return D;
}

// Weighted difference e^{-a/2} U(x + 1/2) - e^{a/2} U(x - 1/2) on the periodic domain.
Eigen::MatrixXd difference_matrix(const Nodes& g, double a) {
  const int n = static_cast<int>(g.x.size());
  const double L = 2.0 * g.half_length;
  Eigen::MatrixXd N(n, n);
  Eigen::RowVectorXd plus(n), minus(n);
  for (int i = 0; i < n; ++i) {
    auto wrap = [&](double xv) {
      while (xv >= g.half_length) xv -= L;
      while (xv < -g.half_length) xv += L;
      return xv;
    };
    interpolation_row(n, g.s_of(wrap(g.x[static_cast<std::size_t>(i)] + 0.5)), plus);
    interpolation_row(n, g.s_of(wrap(g.x[static_cast<std::size_t>(i)] - 0.5)), minus);
    N.row(i) = std::exp(-0.5 * a) * plus - std::exp(0.5 * a) * minus;
  }
  return N;
}

DiscreteOperator build(const Nodes& g, double omega, double a, double c, std::vector<double> coefficient) {
  const int n = static_cast<int>(g.x.size());
  DiscreteOperator op;
  op.omega = omega;
  op.a = a;
  op.curvature = c;
  op.x = g.x;
  op.weight.resize(g.x.size());
  for (std::size_t i = 0; i < g.x.size(); ++i) op.weight[i] = g.dx_ds[i] * 2.0 * kPi / n;
  op.coefficient = std::move(coefficient);

  const Eigen::MatrixXd D = differentiation_matrix(g) - a * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd N = difference_matrix(g, a) / omega;
  const Eigen::Map<const Eigen::VectorXd> P(op.coefficient.data(), n);
  op.matrix.resize(2 * n, 2 * n);
  op.matrix.topLeftCorner(n, n) = D;
  op.matrix.topRightCorner(n, n) = N;
  op.matrix.bottomLeftCorner(n, n) = N * P.asDiagonal();
  op.matrix.bottomRightCorner(n, n) = D;
  return op;
}

void check_spacing(const SpectralConfig& cfg) {
  const double ratio = 0.5 / cfg.spacing;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw GridMismatch("grid spacing " + std::to_string(cfg.spacing) + " does not divide 1/2");
  }
}

void check_weight(double a, double rate) {
  if (!(a < rate)) {
    std::ostringstream os;
    os << "weight a=" << a << " is not below the tail rate " << rate;
    throw WeightTooLarge(os.str());
  }
}

std::vector<double> smallest_singular_values(Eigen::MatrixXd M, int count) {
  const int n = static_cast<int>(M.rows());
  std::vector<double> s(static_cast<std::size_t>(n));
  const int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', n, n, M.data(), n, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw EigensolverFailure("dgesdd failed with info " + std::to_string(info));
  std::sort(s.begin(), s.end());
  s.resize(static_cast<std::size_t>(std::min(count, n)));
  return s;
}

// Samples a wave-grid array at lattice points; zero outside the grid.
std::vector<double> resample(const JordanModes& modes, std::span<const double> f, std::span<const double> at) {
  const double x0 = modes.x.front();
  const double dx = modes.x[1] - modes.x[0];
  std::vector<double> out(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) out[i] = detail::lagrange8(f, (at[i] - x0) / dx);
  return out;
}

double weighted_overlap(const DiscreteOperator& op, const Eigen::VectorXcd& u, const Eigen::VectorXd& v) {
  const std::size_t n = op.points();
  complex dot = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double w = op.weight[i % n];
    dot += w * u[static_cast<Eigen::Index>(i)] * v[static_cast<Eigen::Index>(i)];
    nv += w * v[static_cast<Eigen::Index>(i)] * v[static_cast<Eigen::Index>(i)];
  }
  const double nu = op.norm(u);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::abs(dot) / (nu * std::sqrt(nv));
}

}  // namespace

SpectralConfig SpectralConfig::refined() const {
  SpectralConfig r = *this;
  r.spacing = 0.5 * spacing;
  r.half_length = 1.5 * half_length;
  r.cluster_spacing = cluster_spacing / 1.5;
  return r;
}

void SpectralConfig::validate() const {
  if (!(a > 0.0)) throw InvalidParameter("weight a must be positive");
  if (!(spacing > 0.0) || !(half_length > 1.0)) throw InvalidParameter("grid spacing and half-length must be positive");
  if (!(cluster_width > 0.0) || !(cluster_spacing > 0.0) || cluster_reach < 0) {
    throw InvalidParameter("cluster parameters must be positive");
  }
  if (!(margin >= 0.0 && margin < 1.0)) throw InvalidParameter("margin must lie in [0, 1)");
  if (!(residual_tol > 0.0) || !(zero_radius > 0.0) || !(jordan_ratio > 0.0)) {
    throw InvalidParameter("tolerances must be positive");
  }
  if (curve_samples < 2) throw InvalidParameter("curve_samples must be at least 2");
  check_spacing(*this);
}

Eigen::VectorXd DiscreteOperator::weighted(std::span<const double> S, std::span<const double> W) const {
  const std::size_t n = points();
  Eigen::VectorXd u(2 * static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(a * x[i]);
    u[static_cast<Eigen::Index>(i)] = e * S[i];
    u[static_cast<Eigen::Index>(i + n)] = e * W[i];
  }
  return u;
}

double DiscreteOperator::norm(const Eigen::VectorXcd& u) const {
  const std::size_t n = points();
  double s = 0.0;
  for (std::size_t i = 0; i < 2 * n; ++i) s += weight[i % n] * std::norm(u[static_cast<Eigen::Index>(i)]);
  return std::sqrt(s);
}

DiscreteOperator assemble_operator(const WaveProfile& wave, const SpectralConfig& cfg) {
  cfg.validate();
  if (wave.R.empty()) throw InvalidParameter("wave has not been solved");
  check_weight(cfg.a, wave.tail_rate);
  const double tip = wave.lattice_scale();
  std::vector<double> centers;
  for (int k = -cfg.cluster_reach; k <= cfg.cluster_reach; ++k) centers.push_back(0.5 * k);
  const double width = cfg.cluster_width * tip;
  const double amplitude = std::max(0.0, cfg.spacing / (cfg.cluster_spacing * tip) - 1.0);
  const Nodes g = make_nodes(cfg.half_length, cfg.spacing, centers, width, amplitude);
  std::vector<double> P(g.x.size());
  for (std::size_t i = 0; i < g.x.size(); ++i) P[i] = wave.potential.d2(wave.R_at(g.x[i]));
  return build(g, wave.scaling.omega, cfg.a, wave.potential.curvature(), std::move(P));
}

DiscreteOperator assemble_constant_operator(double omega, const Potential& p, const SpectralConfig& cfg) {
  cfg.validate();
  const double cells = 2.0 * cfg.half_length / cfg.spacing;
  if (std::abs(cells - std::round(cells)) > 1e-9) {
    throw GridMismatch("grid spacing does not divide the domain length");
  }
  const Nodes g = make_nodes(cfg.half_length, cfg.spacing, {}, 1.0, 0.0);
  std::vector<double> P(g.x.size(), p.curvature());
  return build(g, omega, cfg.a, p.curvature(), std::move(P));
}

complex essential_point(double kappa, int sign, double omega, double a, double c) {
  return complex(-a, -kappa) + static_cast<double>(sign) * 2.0 / omega * std::sqrt(c) * std::sinh(complex(0.5 * a, 0.5 * kappa));
}

std::vector<EssentialBranch> essential_spectrum(double omega, const SpectralConfig& cfg, const Potential& p) {
  const double c = p.curvature();
  if (!(c > 0.0)) throw InvalidParameter("essential spectrum needs a positive curvature at 0");
  std::vector<EssentialBranch> out;
  for (int sign : {1, -1}) {
    EssentialBranch b;
    b.sign = sign;
    for (int i = 0; i < cfg.curve_samples; ++i) {
      const double kappa = -2.0 * kPi + 4.0 * kPi * i / (cfg.curve_samples - 1);
      b.kappa.push_back(kappa);
      b.lambda.push_back(essential_point(kappa, sign, omega, cfg.a, c));
    }
    out.push_back(std::move(b));
  }
  return out;
}

double distance_to_essential(complex lambda, double omega, double a, double c) {
  // Im λ(κ) stays within 2 ω^{-1} sqrt(c) cosh(a/2) of -κ.
  const double spread = 2.0 / omega * std::sqrt(c) * std::cosh(0.5 * a);
  const double centre = -lambda.imag();
  const double half = spread + 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int sign : {1, -1}) {
    auto dist = [&](double k) { return std::abs(lambda - essential_point(k, sign, omega, a, c)); };
    constexpr int kSamples = 400;
    double kbest = centre;
    double dbest = dist(centre);
    for (int i = 0; i <= kSamples; ++i) {
      const double k = centre - half + 2.0 * half * i / kSamples;
      const double d = dist(k);
      if (d < dbest) {
        dbest = d;
        kbest = k;
      }
    }
    const double step = 2.0 * half / kSamples;
    double k = boost::math::tools::brent_find_minima(dist, kbest - step, kbest + step, 52).first;
    // Newton on d/dκ |λ(κ) - λ|^2 / 2 = 0 removes the sqrt(eps) limit of Brent.
    const double amp = static_cast<double>(sign) * 2.0 / omega * std::sqrt(c);
    for (int it = 0; it < 4; ++it) {
      const complex z(0.5 * a, 0.5 * k);
      const complex e = essential_point(k, sign, omega, a, c) - lambda;
      const complex d1 = complex(0.0, -1.0) + amp * std::cosh(z) * complex(0.0, 0.5);
      const complex d2 = -0.25 * amp * std::sinh(z);
      const double g = std::real(e * std::conj(d1));
      const double gp = std::norm(d1) + std::real(e * std::conj(d2));
      if (!(gp > 0.0)) break;
      k -= g / gp;
    }
    best = std::min({best, dbest, dist(k)});
  }
  return best;
}

std::vector<double> inverse_difference(const WaveProfile& wave, std::span<const double> f, double b) {
  const int n = static_cast<int>(wave.size());
  detail::PeriodicFft fft(n, wave.h);
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = std::exp(-b * wave.x(i)) * f[i];
  auto spec = fft.forward(g);
  const double xi = wave.scaling.xi;
  for (int j = 0; j < n; ++j) {
    const double k = fft.wavenumber(j);
    const detail::cplx shift = std::polar(1.0, k * xi);
    spec[static_cast<std::size_t>(j)] /= std::exp(0.5 * b) * shift - std::exp(-0.5 * b) / shift;
  }
  auto out = fft.inverse_real(std::move(spec));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::exp(b * wave.x(i));
  return out;
}

JordanModes jordan_modes(const WaveProfile& wave, const SpectralConfig& cfg) {
  if (wave.R.empty()) throw InvalidParameter("wave has not been solved");
  if (wave.dR_ddelta.size() != wave.size() || wave.dV_ddelta.size() != wave.size()) {
    throw LadderRequired("the parameter derivative of the wave is not available");
  }
  check_weight(cfg.a, wave.tail_rate);
  const auto& s = wave.scaling;
  const int n = static_cast<int>(wave.size());
  const std::size_t nn = wave.size();
  const double scale = wave.lattice_scale();
  detail::PeriodicFft fft(n, wave.h);

  JordanModes j;
  j.x.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) j.x[i] = wave.x(i);
  j.S_star = fft.derivative(wave.R);
  j.W_star = fft.derivative(wave.V);
  for (std::size_t i = 0; i < nn; ++i) {
    j.S_star[i] /= scale;
    j.W_star[i] /= scale;
  }
  j.S_sharp = wave.dR_ddelta;
  j.W_sharp = wave.dV_ddelta;

  const int shift = wave.n_xi;
  auto nabla = [&](const std::vector<double>& u) {
    std::vector<double> out(nn);
    for (int i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          u[static_cast<std::size_t>((i + shift) % n)] - u[static_cast<std::size_t>((i - shift + n) % n)];
    }
    return out;
  };
  auto apply = [&](const std::vector<double>& S, const std::vector<double>& W, std::vector<double>& r1,
                   std::vector<double>& r2) {
    auto dS = fft.derivative(S);
    auto dW = fft.derivative(W);
    std::vector<double> PS(nn);
    for (std::size_t i = 0; i < nn; ++i) PS[i] = wave.potential.d2(wave.R[i]) * S[i];
    const auto nW = nabla(W);
    const auto nPS = nabla(PS);
    r1.resize(nn);
    r2.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      r1[i] = dS[i] / scale + nW[i] / s.omega;
      r2[i] = dW[i] / scale + nPS[i] / s.omega;
    }
  };
  const double hx = wave.spacing_x();
  auto wnorm = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double t = 0.0;
    for (std::size_t i = 0; i < nn; ++i) t += std::exp(2.0 * cfg.a * j.x[i]) * (u[i] * u[i] + v[i] * v[i]);
    return std::sqrt(t * hx);
  };

  std::vector<double> r1, r2;
  apply(j.S_star, j.W_star, r1, r2);
  j.residual_star = wnorm(r1, r2);

  apply(j.S_sharp, j.W_sharp, r1, r2);
  const double lam = 0.5 * s.m / s.delta;
  std::vector<double> t1(nn), t2(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    t1[i] = lam * j.S_star[i];
    t2[i] = lam * j.W_star[i];
    r1[i] -= t1[i];
    r2[i] -= t2[i];
  }
  j.residual_sharp = wnorm(r1, r2);
  j.reference_sharp = wnorm(t1, t2);

  // The inverse difference of a localized function does not depend on the
  // weight as long as it stays below the tail rate; half of it keeps the
  // periodic wrap-around negligible on this domain.
  const double b = 0.5 * wave.tail_rate;
  auto sigma = [&](const std::vector<double>& Sp, const std::vector<double>& Wp, const std::vector<double>& Sm,
                   const std::vector<double>& Wm) {
    const auto gW = inverse_difference(wave, Wm, b);
    const auto gS = inverse_difference(wave, Sm, b);
    double t = 0.0;
    for (std::size_t i = 0; i < nn; ++i) t += Sp[i] * gW[i] + Wp[i] * gS[i];
    return t * hx;
  };
  j.sigma = sigma(j.S_star, j.W_star, j.S_sharp, j.W_sharp);
  j.sigma_star_star = sigma(j.S_star, j.W_star, j.S_star, j.W_star);
  j.normalized_sigma = std::pow(s.delta, 0.5 * s.m + 1.0) * j.sigma;
  return j;
}

std::string to_string(Verdict v) { return v == Verdict::NoUnstableModes ? "NoUnstableModes" : "SuspectModes"; }

std::vector<complex> operator_eigenvalues(const DiscreteOperator& op) {
  const int n = static_cast<int>(op.matrix.rows());
  Eigen::MatrixXd A = op.matrix;
  std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n)), scale(static_cast<std::size_t>(n));
  std::vector<double> rce(static_cast<std::size_t>(n)), rcv(static_cast<std::size_t>(n));
  lapack_int ilo = 0, ihi = 0;
  double abnrm = 0.0;
  const lapack_int info = LAPACKE_dgeevx(LAPACK_COL_MAJOR, 'B', 'N', 'N', 'N', n, A.data(), n, wr.data(), wi.data(),
                                         nullptr, 1, nullptr, 1, &ilo, &ihi, scale.data(), &abnrm, rce.data(),
                                         rcv.data());
  if (info != 0) throw EigensolverFailure("dgeevx failed with info " + std::to_string(info));
  std::vector<complex> out(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = complex(wr[i], wi[i]);
  return out;
}

ScanResult point_spectrum_scan(const DiscreteOperator& op, const SpectralConfig& cfg, const JordanModes* modes) {
  cfg.validate();
  const auto all = operator_eigenvalues(op);
  ScanResult res;
  res.total_eigenvalues = all.size();
  const double re_min = -cfg.a * (1.0 - cfg.margin);
  const std::size_t n = op.points();
  const Eigen::Index dim = op.matrix.rows();

  Eigen::VectorXd u_star, u_sharp;
  if (modes != nullptr) {
    u_star = op.weighted(resample(*modes, modes->S_star, op.x), resample(*modes, modes->W_star, op.x));
    u_sharp = op.weighted(resample(*modes, modes->S_sharp, op.x), resample(*modes, modes->W_sharp, op.x));
  }

  std::vector<complex> region;
  for (const auto& l : all) {
    if (l.real() > re_min && std::abs(l.imag()) <= kPi) region.push_back(l);
  }
  std::sort(region.begin(), region.end(), [](complex x, complex y) {
    return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
  });

  const Eigen::MatrixXcd Ac = op.matrix.cast<complex>();
  for (const auto& l : region) {
    ComputedEigenvalue e;
    e.lambda = l;
    // Inverse iteration from a fixed start vector with a slightly offset shift.
    const complex mu = l + complex(1e-10, 1e-10) * (1.0 + std::abs(l));
    Eigen::MatrixXcd M = Ac;
    M.diagonal().array() -= mu;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    Eigen::VectorXcd u = Eigen::VectorXcd::Ones(dim);
    for (int it = 0; it < 3; ++it) {
      u = lu.solve(u);
      u /= op.norm(u);
    }
    // The weighted quotient minimises |A u - λ u| over λ for this u.
    const Eigen::VectorXcd Au = Ac * u;
    complex num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double w = op.weight[static_cast<std::size_t>(i) % n];
      num += w * std::conj(u[i]) * Au[i];
      den += w * std::norm(u[i]);
    }
    if (std::abs(num / den - l) < 1e-3 * (1.0 + std::abs(l))) e.lambda = num / den;
    e.residual = op.norm(Au - e.lambda * u);
    double inside = 0.0, total = 0.0;
    e.profile.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double m2 = std::norm(u[static_cast<Eigen::Index>(i)]) + std::norm(u[static_cast<Eigen::Index>(i + n)]);
      e.profile[i] = std::sqrt(m2);
      total += op.weight[i] * m2;
      if (std::abs(op.x[i]) <= cfg.mass_radius) inside += op.weight[i] * m2;
    }
    e.mass_fraction = total > 0.0 ? inside / total : 0.0;
    if (modes != nullptr) {
      e.overlap_star = weighted_overlap(op, u, u_star);
      e.overlap_sharp = weighted_overlap(op, u, u_sharp);
    }
    e.zero_cluster = std::abs(e.lambda) <= cfg.zero_radius;
    e.accepted = e.residual <= cfg.residual_tol && e.mass_fraction >= cfg.mass_fraction;
    if (e.zero_cluster) ++res.zero.cluster_size;
    (e.accepted ? res.eigenvalues : res.rejected).push_back(std::move(e));
  }

  res.zero.singular_L = smallest_singular_values(op.matrix, 3);
  res.zero.singular_L2 = smallest_singular_values(op.matrix * op.matrix, 3);
  const auto& sl = res.zero.singular_L;
  const auto& sl2 = res.zero.singular_L2;
  res.zero.consistent = res.zero.cluster_size == 2 && sl.size() == 3 && sl[0] <= cfg.jordan_ratio * sl[1] &&
                        sl2[1] <= cfg.jordan_ratio * sl2[2];

  for (const auto& e : res.eigenvalues) {
    if (!e.zero_cluster) res.suspects.push_back(e.lambda);
  }
  res.verdict = res.suspects.empty() && res.zero.consistent ? Verdict::NoUnstableModes : Verdict::SuspectModes;
  return res;
}

SpectralReport analyze_spectrum(const WaveProfile& wave, const SpectralConfig& cfg) {
  SpectralReport rep;
  rep.essential_curves = essential_spectrum(wave.scaling.omega, cfg, wave.potential);
  rep.jordan = jordan_modes(wave, cfg);
  const auto op = assemble_operator(wave, cfg);
  rep.scan = point_spectrum_scan(op, cfg, &rep.jordan);
  rep.verdict = rep.scan.verdict;
  return rep;
}

}  // namespace fput
