// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "fput/errors.hpp"
#include "fput/io.hpp"
#include "fput/lattice_sim.hpp"
#include "fput/pipelines.hpp"
#include "fput/scaling.hpp"
#include "fput/shape_ode.hpp"
#include "fput/spectral.hpp"
#include "fput/wave_solver.hpp"

namespace fs = std::filesystem;
using fput::Potential;
using fput::WaveProfile;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Report {
 public:
  void add(int id, const std::string& title, const std::function<Verdict()>& body) {
    Verdict v;
    const auto t0 = Clock::now();
    try {
      v = body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures_ += !v.pass;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// Smallest ratio between successive gaps.
double min_shrink(const std::vector<double>& gaps) {
  double r = INFINITY;
  for (std::size_t i = 1; i < gaps.size(); ++i) r = std::min(r, gaps[i - 1] / gaps[i]);
  return r;
}

std::string join(const std::vector<double>& v, const char* f = "%.3g") {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(f, v[i]);
  return s + "}";
}

fput::ShapeSolution shape_up_to(double m, double omega_max) {
  return fput::solve_shape(m, std::max(100.0, fput::default_shape_extent(1.5 * fput::scaling_guess(omega_max, m))));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Lennard-Jones n = 2 ladder shared by criteria 4, 5, 6 and 8.
struct LjLadder {
  Potential potential = Potential::lennard_jones(2.0);
  std::vector<double> omegas{20.0, 40.0, 80.0, 160.0};
  fput::ShapeSolution shape;
  std::vector<WaveProfile> waves;
  std::vector<fput::WaveMetrics> metrics;
  double seconds = 0.0;

  void build() {
    if (!waves.empty()) return;
    const auto t0 = Clock::now();
    shape = shape_up_to(potential.m(), omegas.back());
    waves = fput::solve_ladder(potential, shape, omegas, {}, true);
    for (const auto& w : waves) metrics.push_back(fput::wave_metrics(w, shape));
    seconds = seconds_since(t0);
  }
};

Verdict shape_conservation() {
  const auto t0 = Clock::now();
  std::vector<fput::ShapeSolution> sols;
  for (double m : {2.0, 4.0, 8.0}) sols.push_back(fput::solve_shape(m, 100.0));
  const double elapsed = seconds_since(t0);
  std::vector<double> worst;
  for (const auto& s : sols) {
    const double level = 2.0 / (s.m * (s.m + 1.0));
    double e = 0.0;
    auto check = [&](double y, double yp) { e = std::max(e, std::abs(0.5 * yp * yp + level / std::pow(y, s.m) - level)); };
    for (std::size_t i = 0; i < s.grid.size(); ++i) check(s.Y[i], s.Yp[i]);
    for (int i = 0; i <= 100000; ++i) {
      const double x = 100.0 * i / 100000.0;
      check(fput::eval_shape(s, x, fput::ShapeField::Y), fput::eval_shape(s, x, fput::ShapeField::Yp));
    }
    worst.push_back(e);
  }
  const bool ok = *std::max_element(worst.begin(), worst.end()) <= 1e-9 && elapsed < 1.0;
  return {ok, "sup energy residual for m=2,4,8: " + join(worst) + fmt(", solve time %.3f s", elapsed)};
}

Verdict closed_form_m2() {
  const auto s = fput::solve_shape(2.0, 50.0);
  double eY = 0, eTe = 0, eTo = 0;
  for (int i = 0; i <= 50000; ++i) {
    const double x = 50.0 * i / 50000.0;
    const double root = std::sqrt(9.0 + 6.0 * x * x);
    eY = std::max(eY, std::abs(fput::eval_shape(s, x, fput::ShapeField::Y) - root / 3.0));
    eTe = std::max(eTe, std::abs(fput::eval_shape(s, x, fput::ShapeField::Te) - (3.0 - 2.0 * x * x) / root));
    eTo = std::max(eTo, std::abs(fput::eval_shape(s, x, fput::ShapeField::To) - 3.0 * x / root));
  }
  const bool ok = std::max({eY, eTe, eTo}) <= 1e-8;
  return {ok, fmt("sup errors Y %.2e, T_even %.2e, T_odd %.2e on [0,50]", eY, eTe, eTo)};
}

Verdict scaling_limits() {
  const double m = 2.0;
  const std::vector<double> omegas{20, 40, 80, 160, 320};
  const auto shape = shape_up_to(m, omegas.back());
  const double limit = std::pow(4.0 / (m * (m + 1.0)), 1.0 / m);
  std::vector<double> alpha, gap_alpha, gap_Y, gap_xYp;
  for (double w : omegas) {
    const auto s = fput::solve_scaling(w, shape);
    alpha.push_back(s.alpha);
    gap_alpha.push_back(std::abs(s.alpha - limit));
    gap_Y.push_back(std::abs(s.delta * s.alpha * fput::eval_shape(shape, s.xi, fput::ShapeField::Y) - 0.5));
    gap_xYp.push_back(std::abs(s.delta * s.alpha * s.xi * fput::eval_shape(shape, s.xi, fput::ShapeField::Yp) - 0.5));
  }
  bool monotone = true;
  for (std::size_t i = 2; i < alpha.size(); ++i)
    monotone = monotone && (alpha[i] - alpha[i - 1]) * (alpha[i - 1] - alpha[i - 2]) > 0;
  const double shrink = std::min(min_shrink(gap_Y), min_shrink(gap_xYp));
  const bool ok = monotone && strictly_decreasing(gap_alpha) && shrink >= 1.5;
  return {ok, "m=2, |alpha-limit| " + join(gap_alpha) + ", |delta alpha Y(xi)-1/2| " + join(gap_Y) +
                  ", |delta alpha xi Y'(xi)-1/2| " + join(gap_xYp) + fmt(", min gap ratio %.3f", shrink)};
}

Verdict wave_rate(LjLadder& lj) {
  lj.build();
  std::vector<double> delta, glob, loc;
  for (const auto& m : lj.metrics) {
    delta.push_back(m.delta);
    glob.push_back(m.err_inf_R);
    loc.push_back(m.err_local_R);
  }
  const double sg = loglog_slope(delta, glob);
  const double sl = loglog_slope(delta, loc);
  const bool ok = std::abs(sg - 2.0) <= 0.3 && std::abs(sl - 3.0) <= 0.4 && lj.seconds < 120.0;
  return {ok, fmt("LJ n=2, omega 20..160: global sup-error slope %.3f (target 2.0 +- 0.3), local slope %.3f "
                  "(target 3.0 +- 0.4), ladder time %.1f s",
                  sg, sl, lj.seconds)};
}

Verdict velocity_limit(LjLadder& lj) {
  lj.build();
  std::vector<double> g0, g9;
  for (const auto& m : lj.metrics) {
    g0.push_back(std::abs(m.V0_hat - 1.0));
    g9.push_back(std::abs(m.V09_hat));
  }
  const bool ok = strictly_decreasing(g0) && strictly_decreasing(g9) && g0.back() < 0.05 && g9.back() < 0.05;
  return {ok, "|V(0)/omega - 1| " + join(g0) + ", |V(0.9)/omega| " + join(g9)};
}

Verdict tail_identity(LjLadder& lj) {
  lj.build();
  std::vector<double> gaps;
  for (const auto& m : lj.metrics) gaps.push_back(std::abs(m.tail_slope - m.tail_rate) / m.tail_rate);
  const auto& m = lj.metrics.back();
  return {gaps.back() <= 0.1, fmt("omega %.0f: measured slope %.4f, identity %.4f; relative gaps along the ladder ",
                                  m.omega, m.tail_slope, m.tail_rate) +
                                  join(gaps)};
}

Verdict jordan_identities() {
  const auto p = Potential::inverse_monomial(2.0);
  const auto shape = shape_up_to(2.0, 40.0);
  auto w = fput::solve_exact(fput::solve_scaling(40.0, shape), shape, p);
  fput::solve_parameter_derivative(w, shape);
  fput::SpectralConfig cfg;
  cfg.a = 1.0;
  const auto j = fput::jordan_modes(w, cfg);
  const double rel = j.residual_sharp / j.reference_sharp;
  const bool ok = j.residual_star <= 1e-5 && rel <= 1e-4;
  return {ok, fmt("m=2, omega 40, a=1: |L U*| %.2e, |L U# - (m/2delta) U*| / |(m/2delta) U*| %.2e", j.residual_star, rel)};
}

Verdict symplectic(LjLadder& lj) {
  lj.build();
  fput::SpectralConfig cfg;
  const double half_m = lj.potential.m() / 2.0;
  std::vector<double> nsig, gap;
  fput::JordanModes top;
  for (const auto& w : lj.waves) {
    top = fput::jordan_modes(w, cfg);
    nsig.push_back(top.normalized_sigma);
    gap.push_back(std::abs(top.normalized_sigma + half_m) / half_m);
  }

  // ω σ against ∂_δ h from waves at δ (1 ± 1e-3) on the same grid.
  const WaveProfile& w = lj.waves.back();
  fput::WaveOptions o;
  o.points_per_xi = w.n_xi;
  std::vector<WaveProfile> near;
  for (double f : {1.0 - 1e-3, 1.0, 1.0 + 1e-3}) {
    const double omega = std::pow(w.scaling.delta * f, -half_m);
    near.push_back(fput::solve_exact(fput::solve_scaling(omega, lj.shape), lj.shape, lj.potential, o));
  }
  const double dh = fput::energy_derivative(near).dh_ddelta.at(0);
  const double cross = std::abs(w.scaling.omega * top.sigma - dh) / std::abs(dh);

  const bool ok = gap.back() <= 0.15 && strictly_decreasing(gap) && cross <= 1e-3;
  return {ok, "LJ n=2, delta^{m/2+1} sigma " + join(nsig, "%.4f") + fmt(" (target %.1f), relative gaps ", -half_m) +
                  join(gap) + fmt(", |omega sigma - dh/ddelta| / |dh/ddelta| %.2e at omega %.0f", cross, w.scaling.omega)};
}

Verdict essential_spectrum() {
  const auto p = Potential::lennard_jones(2.0);
  const double c = p.curvature();
  fput::SpectralConfig cfg;
  cfg.a = 1.0;

  // Horizontal spread of the curves against the stated bound.
  double worst_ratio = 0.0;
  std::string spread;
  for (double omega : {20.0, 40.0, 80.0, 160.0}) {
    double dev = 0.0;
    for (const auto& b : fput::essential_spectrum(omega, cfg, p))
      for (const auto& l : b.lambda) dev = std::max(dev, std::abs(l.real() + cfg.a));
    const double bound = std::sqrt(c) * std::sinh(cfg.a / 2.0) / omega * 1.01;
    worst_ratio = std::max(worst_ratio, dev / bound);
    spread += fmt("%s%.4g/%.4g", spread.empty() ? "" : ", ", dev, bound);
  }

  // Constant-coefficient discretization on h = 0.05, X = 40.
  const double omega = 40.0;
  cfg.spacing = 0.05;
  cfg.half_length = 40.0;
  const auto op = fput::assemble_constant_operator(omega, p, cfg);
  const auto ev = fput::operator_eigenvalues(op);
  double to_curve = 0.0;
  for (const auto& l : ev) to_curve = std::max(to_curve, fput::distance_to_essential(l, omega, cfg.a, c));
  double coverage = 0.0;
  for (const auto& b : fput::essential_spectrum(omega, cfg, p))
    for (const auto& l : b.lambda) {
      double d = INFINITY;
      for (const auto& e : ev) d = std::min(d, std::abs(e - l));
      coverage = std::max(coverage, d);
    }
  const double kappa_gap = std::numbers::pi / (2.0 * cfg.half_length);

  const bool ok = worst_ratio <= 1.0 && to_curve <= 1e-2;
  return {ok, "max|Re lambda + a| vs bound at omega 20..160: " + spread + fmt(" (worst ratio %.3f); ", worst_ratio) +
                  fmt("h=0.05, X=40: %zu eigenvalues, max distance to curves %.2e, curve points to nearest eigenvalue "
                      "%.3f (kappa half-spacing %.3f)",
                      ev.size(), to_curve, coverage, kappa_gap)};
}

Verdict point_spectrum() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  for (double m : {2.0, 4.0}) {
    const auto p = Potential::inverse_monomial(m);
    const std::vector<double> omegas{40.0, 80.0};
    const auto shape = shape_up_to(m, omegas.back());
    auto waves = fput::solve_ladder(p, shape, omegas, {}, true);
    for (const auto& w : waves) {
      fput::SpectralConfig base;
      base.a = 1.0;
      for (const bool refined : {false, true}) {
        const fput::SpectralConfig cfg = refined ? base.refined() : base;
        const auto rep = fput::analyze_spectrum(w, cfg);
        bool only_zero = rep.scan.zero.cluster_size == 2;
        for (const auto& e : rep.scan.eigenvalues) only_zero = only_zero && e.zero_cluster;
        const bool good = rep.verdict == fput::Verdict::NoUnstableModes && only_zero;
        ok = ok && good;
        detail += fmt("%sm=%g omega=%g %s: %s, zero cluster %d, accepted %zu", detail.empty() ? "" : "; ", m,
                      w.scaling.omega, refined ? "refined" : "base", fput::to_string(rep.verdict).c_str(),
                      rep.scan.zero.cluster_size, rep.scan.eigenvalues.size());
      }
    }
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 600.0;
  return {ok, detail + fmt("; total %.0f s", elapsed)};
}

Verdict simulation() {
  const auto p = Potential::inverse_monomial(2.0);
  const double omega = 40.0;
  std::vector<double> speeds;
  for (int k = -2; k <= 2; ++k) speeds.push_back(omega * (1.0 + 0.005 * k));
  const auto shape = shape_up_to(2.0, speeds.back());
  const auto family = fput::solve_ladder(p, shape, speeds, {}, false);

  fput::SimulationConfig cfg;
  cfg.T = 2.0;
  const auto clean = fput::simulate(family[2], family, cfg);

  const double eta = 1e-3;
  cfg.perturbation.kind = fput::Perturbation::Kind::VelocityBump;
  cfg.perturbation.amplitude = eta;
  const auto kicked = fput::simulate(family[2], family, cfg);
  const auto& tr = kicked.track;

  // ω(t) over the last quarter stays near its limit.
  const std::size_t n = tr.omega_fit.size();
  double late = 0.0;
  for (std::size_t i = n - n / 4; i < n; ++i) late = std::max(late, std::abs(tr.omega_fit[i] - tr.omega_inf));
  double early = 0.0;
  for (std::size_t i = 0; i < n / 4; ++i) early = std::max(early, std::abs(tr.omega_fit[i] - tr.omega_inf));

  const bool ok = clean.track.max_l2_err <= 1e-3 && tr.b0_fit > 0.0 && tr.max_l2_err <= 20.0 * eta &&
                  late <= 1e-3 * omega && late <= early;
  return {ok, fmt("omega 40, t=2: unperturbed max l2 error %.2e; eta=1e-3: b0 %.2f, max l2 error %.2e (bound %.0e), "
                  "omega_inf %.5f, late |omega - omega_inf| %.2e vs early %.2e",
                  clean.track.max_l2_err, tr.b0_fit, tr.max_l2_err, 20.0 * eta, tr.omega_inf, late, early)};
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "fput_acceptance_repro";
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("'") + FPUT_CLI_PATH + "' repro-figures --out '" + (root / run).string() +
                            "' > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) return {false, std::string("repro-figures run ") + run + " failed"};
  }
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path other = root / "b" / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "b")) ++files_b;
  fs::remove_all(root);
  const bool ok = files > 1 && files == files_b && differing == 0;
  return {ok, fmt("%zu files per run, %zu differ", files, differing)};
}

}  // namespace

int main() {
  Report report;
  LjLadder lj;
  report.add(1, "shape ODE conservation", shape_conservation);
  report.add(2, "closed form for m=2", closed_form_m2);
  report.add(3, "scaling limits", scaling_limits);
  report.add(4, "wave approximation rate", [&] { return wave_rate(lj); });
  report.add(5, "velocity limit", [&] { return velocity_limit(lj); });
  report.add(6, "tail identity", [&] { return tail_identity(lj); });
  report.add(7, "Jordan identities", jordan_identities);
  report.add(8, "symplectic asymptote", [&] { return symplectic(lj); });
  report.add(9, "essential spectrum", essential_spectrum);
  report.add(10, "point-spectrum scan", point_spectrum);
  report.add(11, "simulation stability", simulation);
  report.add(12, "determinism", determinism);
  std::printf("%d of 12 criteria failed\n", report.failures());
  return report.failures() == 0 ? 0 : 1;
}
