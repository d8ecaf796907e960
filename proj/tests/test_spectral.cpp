#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fput/errors.hpp"
#include "fput/spectral.hpp"

using Catch::Approx;
using fput::complex;
using fput::Potential;
using fput::SpectralConfig;
using fput::WaveProfile;

namespace {

constexpr double kPi = std::numbers::pi;

const fput::ShapeSolution& shape(double m) {
  static std::map<double, fput::ShapeSolution> cache;
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, fput::solve_shape(m, 3000.0)).first;
  return it->second;
}

WaveProfile wave_with_derivative(const Potential& p, double omega, const fput::WaveOptions& o = {}) {
  const auto& s = shape(p.m());
  auto w = fput::solve_exact(fput::solve_scaling(omega, s), s, p, o);
  fput::solve_parameter_derivative(w, s);
  return w;
}

const WaveProfile& m2_wave() {
  static const WaveProfile w = wave_with_derivative(Potential::inverse_monomial(2.0), 40.0);
  return w;
}

}  // namespace

TEST_CASE("essential spectrum curves", "[spectral]") {
  // a = 1, c = 1, omega = 10, kappa = 0: -1 ± 0.2 sinh(1/2).
  const double half = 0.2 * std::sinh(0.5);
  CHECK(half == Approx(0.104219).epsilon(1e-5));
  CHECK(fput::essential_point(0.0, 1, 10.0, 1.0, 1.0).real() == Approx(-1.0 + half).epsilon(1e-14));
  CHECK(fput::essential_point(0.0, -1, 10.0, 1.0, 1.0).real() == Approx(-1.0 - half).epsilon(1e-14));

  // Independent route: eigenvalues of the 2x2 symbol matrix of the
  // constant-coefficient operator.
  for (double omega : {3.0, 10.0, 40.0}) {
    for (double c : {0.4, 1.0, 2.0}) {
      for (double kappa : {-5.0, -1.3, 0.0, 0.7, 3.1}) {
        const double a = 0.8;
        const complex s = -2.0 / omega * std::sinh(complex(0.5 * a, 0.5 * kappa));
        Eigen::Matrix2cd M;
        M << complex(-a, -kappa), s, c * s, complex(-a, -kappa);
        const Eigen::Vector2cd ev = M.eigenvalues();
        for (int i = 0; i < 2; ++i) {
          const double d = std::min(std::abs(ev[i] - fput::essential_point(kappa, 1, omega, a, c)),
                                    std::abs(ev[i] - fput::essential_point(kappa, -1, omega, a, c)));
          CHECK(d < 1e-13);
        }
      }
    }
  }

  // Confinement around Re λ = -a: the spread is exactly 2 ω^{-1} sqrt(c) sinh(a/2).
  SpectralConfig cfg;
  cfg.a = 1.0;
  const auto p = Potential::inverse_monomial(2.0);
  double prev = INFINITY;
  for (double omega : {5.0, 20.0, 80.0, 320.0}) {
    const auto curves = fput::essential_spectrum(omega, cfg, p);
    REQUIRE(curves.size() == 2);
    double spread = 0.0;
    for (const auto& b : curves) {
      REQUIRE(b.lambda.size() == static_cast<std::size_t>(cfg.curve_samples));
      CHECK(b.kappa.front() == Approx(-2 * kPi));
      CHECK(b.kappa.back() == Approx(2 * kPi));
      for (const auto& l : b.lambda) spread = std::max(spread, std::abs(l.real() + cfg.a));
    }
    CHECK(spread == Approx(2.0 / omega * std::sqrt(p.curvature()) * std::sinh(0.5)).epsilon(1e-9));
    CHECK(spread < prev);
    prev = spread;
  }

  CHECK_THROWS_AS(fput::essential_spectrum(10.0, cfg, Potential::two_term(3.0, 0.0)), fput::InvalidParameter);
}

TEST_CASE("distance to the essential spectrum", "[spectral]") {
  const double omega = 7.0, a = 1.0, c = 0.5;
  for (double kappa : {-4.0, -0.5, 0.0, 2.5}) {
    for (int sign : {1, -1}) {
      const complex l = fput::essential_point(kappa, sign, omega, a, c);
      CHECK(fput::distance_to_essential(l, omega, a, c) < 1e-9);
    }
  }
  // Far to the right of both branches the distance is set by the real part.
  const complex far(0.0, 1.0);
  const double d = fput::distance_to_essential(far, omega, a, c);
  CHECK(d > a - 2.0 / omega * std::sqrt(c) * std::cosh(0.5) - 1e-12);
  CHECK(d < a + 1e-12);
}

TEST_CASE("constant-coefficient discretization", "[spectral]") {
  SpectralConfig cfg;
  cfg.half_length = 10.0;
  const auto p = Potential::lennard_jones(2.0);
  const double omega = 12.0;
  const auto op = fput::assemble_constant_operator(omega, p, cfg);
  CHECK(op.points() == 400);
  for (double c : op.coefficient) CHECK(c == p.curvature());
  const auto ev = fput::operator_eigenvalues(op);
  REQUIRE(ev.size() == 800);
  double worst = 0.0;
  for (const auto& l : ev) worst = std::max(worst, fput::distance_to_essential(l, omega, cfg.a, p.curvature()));
  CHECK(worst < 1e-6);

  // No point spectrum off the curves.
  const auto scan = fput::point_spectrum_scan(op, cfg);
  CHECK(scan.eigenvalues.empty());
  CHECK(scan.suspects.empty());
  CHECK(scan.zero.cluster_size == 0);

  SpectralConfig bad = cfg;
  bad.spacing = 0.03;
  CHECK_THROWS_AS(fput::assemble_constant_operator(omega, p, bad), fput::GridMismatch);
  bad = cfg;
  bad.half_length = 10.01;
  CHECK_THROWS_AS(fput::assemble_constant_operator(omega, p, bad), fput::GridMismatch);
}

TEST_CASE("inverse difference", "[spectral]") {
  const auto& w = m2_wave();
  const std::size_t n = w.size();
  // Dual route: G(x) = Σ_{j>=0} f(x - 1/2 - j) evaluated with exact grid shifts.
  std::vector<double> f(w.dV_ddelta);
  const auto G = fput::inverse_difference(w, f, 0.5 * w.tail_rate);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double g = 0.0;
    for (long k = static_cast<long>(i) - w.n_xi; k >= 0; k -= 2 * w.n_xi) g += f[static_cast<std::size_t>(k)];
    if (std::abs(w.x(i)) < 2.0) worst = std::max(worst, std::abs(G[i] - g));
    scale = std::max(scale, std::abs(g));
  }
  CHECK(worst < 1e-9 * scale);

  // The result does not depend on the weight while it stays below the tail rate.
  const auto G2 = fput::inverse_difference(w, f, 0.3 * w.tail_rate);
  double diff = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(w.x(i)) < 1.5) diff = std::max(diff, std::abs(G[i] - G2[i]));
  }
  CHECK(diff < 1e-8 * scale);
}

TEST_CASE("Jordan modes", "[spectral]") {
  SpectralConfig cfg;
  const auto& w = m2_wave();
  const auto j = fput::jordan_modes(w, cfg);
  REQUIRE(j.S_star.size() == w.size());
  CHECK(j.residual_star <= 1e-5);
  CHECK(j.residual_sharp <= 1e-4 * j.reference_sharp);
  CHECK(j.reference_sharp == Approx(1.0 / w.scaling.delta * 266.957).epsilon(1e-3));
  CHECK(std::abs(j.sigma_star_star) < 1e-9 * std::abs(j.sigma));
  // δ^{m/2+1} σ(U*, U#) → -m/2 = -1; at ω = 40 the gap is below 1e-5.
  CHECK(j.normalized_sigma == Approx(-1.0).epsilon(1e-5));

  // ω σ(U*, U#) against the energy derivative from a nearby ladder.
  const auto& sh = shape(2.0);
  fput::WaveOptions o;
  o.points_per_xi = w.n_xi;
  std::vector<WaveProfile> ladder;
  for (double f : {1.0 - 1e-3, 1.0, 1.0 + 1e-3}) {
    const double d = w.scaling.delta * f;
    ladder.push_back(fput::solve_exact(fput::solve_scaling(1.0 / d, sh), sh, w.potential, o));
  }
  const auto dh = fput::energy_derivative(ladder);
  CHECK(w.scaling.omega * j.sigma == Approx(dh.dh_ddelta[0]).epsilon(1e-3));

  WaveProfile bare = w;
  bare.dR_ddelta.clear();
  CHECK_THROWS_AS(fput::jordan_modes(bare, cfg), fput::LadderRequired);
  SpectralConfig heavy;
  heavy.a = w.tail_rate + 0.1;
  CHECK_THROWS_AS(fput::jordan_modes(w, heavy), fput::WeightTooLarge);
  CHECK_THROWS_AS(fput::assemble_operator(w, heavy), fput::WeightTooLarge);
}

TEST_CASE("operator acts on the neutral modes", "[spectral]") {
  SpectralConfig cfg;
  const auto& w = m2_wave();
  const auto j = fput::jordan_modes(w, cfg);
  const auto op = fput::assemble_operator(w, cfg);
  CHECK(op.points() % 2 == 1);
  auto sample = [&](const std::vector<double>& f) {
    std::vector<double> out(op.points());
    const double dx = j.x[1] - j.x[0];
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double pos = (op.x[i] - j.x[0]) / dx;
      const long i0 = static_cast<long>(std::floor(pos)) - 3;
      if (i0 < 0 || i0 + 7 >= static_cast<long>(f.size())) continue;
      double v = 0.0;
      for (long a = 0; a < 8; ++a) {
        double l = 1.0;
        for (long b = 0; b < 8; ++b)
          if (b != a) l *= (pos - static_cast<double>(i0 + b)) / static_cast<double>(a - b);
        v += l * f[static_cast<std::size_t>(i0 + a)];
      }
      out[i] = v;
    }
    return out;
  };
  const Eigen::VectorXd us = op.weighted(sample(j.S_star), sample(j.W_star));
  const Eigen::VectorXd uh = op.weighted(sample(j.S_sharp), sample(j.W_sharp));
  const double lam = 0.5 * w.scaling.m / w.scaling.delta;
  const Eigen::VectorXcd r1 = (op.matrix * us).cast<complex>();
  const Eigen::VectorXcd r2 = (op.matrix * uh - lam * us).cast<complex>();
  const double n_star = op.norm(us.cast<complex>());
  CHECK(op.norm(r1) < 1e-6 * n_star);
  CHECK(op.norm(r2) < 1e-7 * lam * n_star);
}

TEST_CASE("point spectrum scan", "[spectral]") {
  SpectralConfig cfg;
  const auto& w = m2_wave();
  const auto rep = fput::analyze_spectrum(w, cfg);
  const auto& scan = rep.scan;
  CHECK(rep.verdict == fput::Verdict::NoUnstableModes);
  CHECK(fput::to_string(rep.verdict) == "NoUnstableModes");
  CHECK(scan.suspects.empty());
  CHECK(scan.zero.cluster_size == 2);
  CHECK(scan.zero.consistent);
  REQUIRE(scan.zero.singular_L.size() == 3);
  CHECK(scan.zero.singular_L[0] < 1e-6 * scan.zero.singular_L[1]);
  CHECK(scan.zero.singular_L2[1] < 1e-6 * scan.zero.singular_L2[2]);
  REQUIRE(scan.eigenvalues.size() == 2);
  for (const auto& e : scan.eigenvalues) {
    CHECK(e.zero_cluster);
    CHECK(std::abs(e.lambda) < 1e-3);
    CHECK(e.residual <= cfg.residual_tol);
    CHECK(e.mass_fraction >= 0.99);
    CHECK(e.overlap_star == Approx(1.0).epsilon(1e-4));
    CHECK(e.profile.size() == scan.total_eigenvalues / 2);
  }
  CHECK(scan.rejected.empty());

  // The zero cluster repeats at ±2πi.
  const auto op = fput::assemble_operator(w, cfg);
  const auto ev = fput::operator_eigenvalues(op);
  for (double shift : {-2 * kPi, 2 * kPi}) {
    int near = 0;
    for (const auto& l : ev) near += std::abs(l - complex(0.0, shift)) < 1e-3;
    CHECK(near == 2);
  }
}

TEST_CASE("spectral configuration", "[spectral]") {
  SpectralConfig cfg;
  const auto r = cfg.refined();
  CHECK(r.spacing == Approx(0.025));
  CHECK(r.half_length == Approx(9.0));
  CHECK(r.cluster_spacing < cfg.cluster_spacing);
  CHECK_NOTHROW(r.validate());
  SpectralConfig bad;
  bad.a = -1.0;
  CHECK_THROWS_AS(bad.validate(), fput::InvalidParameter);
  bad = SpectralConfig{};
  bad.spacing = 0.3;
  CHECK_THROWS_AS(bad.validate(), fput::GridMismatch);
  bad = SpectralConfig{};
  bad.margin = 1.0;
  CHECK_THROWS_AS(bad.validate(), fput::InvalidParameter);
}
