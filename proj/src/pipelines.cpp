#include "fput/pipelines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "fput/errors.hpp"
#include "fput/scaling.hpp"
#include "fput/spectral.hpp"

namespace fput {

namespace {

// Runs f(0..n-1) on up to thread_limit() threads. The exception of the
// lowest failing index is rethrown, so failures do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(thread_limit()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string tag(double omega) { return "omega" + format_number(omega); }

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("cannot write " + path.string());
}

// Directory and file name for pipelines whose --out may name a .csv file.
std::pair<std::filesystem::path, std::string> target(const RunConfig& cfg, const std::string& fallback) {
  if (cfg.out_dir.extension() == ".csv") {
    const auto dir = cfg.out_dir.has_parent_path() ? cfg.out_dir.parent_path() : std::filesystem::path(".");
    return {dir, cfg.out_dir.filename().string()};
  }
  return {cfg.out_dir, fallback};
}

double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

SpectralConfig spectral_config(const RunConfig& cfg) {
  SpectralConfig s = cfg.spectral;
  s.a = cfg.a;
  return cfg.refine ? s.refined() : s;
}

json finish(const RunConfig& cfg, Manifest& manifest, json summary) {
  manifest.set("experiment", cfg.experiment);
  manifest.set("config", cfg.to_json());
  manifest.set("results", summary);
  manifest.write();
  return summary;
}

}  // namespace

ShapeSolution shape_for(const RunConfig& cfg, double omega_max) {
  const double m = cfg.potential.make().m();
  const double extent = std::max(cfg.shape_xmax, default_shape_extent(1.5 * scaling_guess(omega_max, m)));
  return solve_shape(m, extent, cfg.shape_tol);
}

std::vector<WaveProfile> solve_ladder(const Potential& p, const ShapeSolution& shape, std::span<const double> omegas,
                                      const WaveOptions& opts, bool with_derivative) {
  std::vector<WaveProfile> waves(omegas.size());
  parallel_for(omegas.size(), [&](std::size_t i) {
    waves[i] = solve_exact(solve_scaling(omegas[i], shape), shape, p, opts);
    if (with_derivative) solve_parameter_derivative(waves[i], shape);
  });
  return waves;
}

json WaveMetrics::to_json() const {
  return {{"omega", omega},
          {"delta", delta},
          {"xi", xi},
          {"alpha", alpha},
          {"beta", beta},
          {"alpha_limit", alpha_limit},
          {"delta_alpha_Y", delta_alpha_Y},
          {"delta_alpha_xi_Yp", delta_alpha_xi_Yp},
          {"err_inf_R", err_inf_R},
          {"err_local_R", err_local_R},
          {"err_inf_V", err_inf_V},
          {"V0_hat", V0_hat},
          {"V09_hat", V09_hat},
          {"tail_slope", tail_slope},
          {"tail_rate", tail_rate},
          {"energy", energy},
          {"residual", residual}};
}

double measured_tail_slope(const WaveProfile& wave, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t i = 0; i < wave.size(); ++i) {
    const double x = wave.x(i);
    if (x < lo || x > hi || wave.R[i] == 0.0) continue;
    const double y = std::log(std::abs(wave.R[i]));
    sx += x, sy += y, sxx += x * x, sxy += x * y, n += 1;
  }
  if (n < 2) throw DomainTooSmall("tail window lies outside the wave grid");
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

WaveMetrics wave_metrics(const WaveProfile& wave, const ShapeSolution& shape) {
  const auto& s = wave.scaling;
  WaveMetrics w;
  w.omega = s.omega;
  w.delta = s.delta;
  w.xi = s.xi;
  w.alpha = s.alpha;
  w.beta = s.beta;
  w.alpha_limit = std::pow(4.0 / (s.m * (s.m + 1.0)), 1.0 / s.m);
  w.delta_alpha_Y = s.delta * s.alpha * eval_shape(shape, s.xi, ShapeField::Y);
  w.delta_alpha_xi_Yp = s.delta * s.alpha * s.xi * eval_shape(shape, s.xi, ShapeField::Yp);
  const auto Rb = approx_distance(s, shape, wave.x_tilde);
  const auto Vb = approx_velocity(s, shape, wave.x_tilde);
  w.err_inf_R = sup_abs_diff(wave.R, Rb);
  w.err_inf_V = sup_abs_diff(wave.V, Vb);
  for (std::size_t i = 0; i < wave.size(); ++i)
    if (std::abs(wave.x_tilde[i]) <= 1.0) w.err_local_R = std::max(w.err_local_R, std::abs(wave.R[i] - Rb[i]));
  w.V0_hat = wave.V_at(0.0) / s.omega;
  w.V09_hat = wave.V_at(0.9) / s.omega;
  w.tail_slope = measured_tail_slope(wave, 1.6, 2.5);
  w.tail_rate = wave.tail_rate;
  w.energy = wave.energy;
  w.residual = wave.residual;
  return w;
}

json run_shape_ode(const RunConfig& cfg) {
  const double m = cfg.potential.make().m();
  const ShapeSolution s = solve_shape(m, cfg.shape_xmax, cfg.shape_tol);
  const auto [dir, name] = target(cfg, "shape_ode.csv");
  Manifest manifest(dir);
  const std::vector<std::string> header{"x", "Y", "Yp", "Te", "Tep", "To", "Top"};
  const std::vector<std::vector<double>> cols{s.grid, s.Y, s.Yp, s.T_even, s.T_even_p, s.T_odd, s.T_odd_p};
  write_csv(dir / name, header, cols);
  manifest.record(dir / name);

  double energy = 0.0, wronskian = 0.0;
  const double level = 2.0 / (m * (m + 1.0));
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    energy = std::max(energy, std::abs(0.5 * s.Yp[i] * s.Yp[i] + level / std::pow(s.Y[i], m) - level));
    wronskian = std::max(wronskian, std::abs(s.T_odd_p[i] * s.T_even[i] - s.T_even_p[i] * s.T_odd[i] - 1.0));
  }
  return finish(cfg, manifest,
                {{"m", m},
                 {"points", s.grid.size()},
                 {"x_max", s.x_max()},
                 {"energy_residual", energy},
                 {"wronskian_residual", wronskian},
                 {"Yp_inf", s.Yp_inf}});
}

json run_scaling(const RunConfig& cfg) {
  const ShapeSolution shape = shape_for(cfg, cfg.omegas.back());
  json out = json::array();
  for (double omega : cfg.omegas) {
    const ScalingParams s = solve_scaling(omega, shape);
    out.push_back({{"omega", s.omega}, {"delta", s.delta}, {"xi", s.xi}, {"alpha", s.alpha}, {"beta", s.beta}});
  }
  return out.size() == 1 ? out[0] : out;
}

json run_wave(const RunConfig& cfg) {
  const Potential p = cfg.potential.make();
  const ShapeSolution shape = shape_for(cfg, cfg.omegas.back());
  const auto waves = solve_ladder(p, shape, cfg.omegas, cfg.wave, true);
  const auto [dir, name] = target(cfg, "wave.csv");
  Manifest manifest(dir);
  json summary = json::array();
  for (const WaveProfile& w : waves) {
    const std::string stem = waves.size() == 1 ? std::filesystem::path(name).stem().string()
                                               : std::filesystem::path(name).stem().string() + "_" + tag(w.scaling.omega);
    std::vector<double> x(w.size()), r_inf(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      x[i] = w.x(i);
      r_inf[i] = std::min(0.0, -1.0 + std::abs(x[i]));
    }
    const auto Rb = approx_distance(w.scaling, shape, w.x_tilde);
    const auto Vb = approx_velocity(w.scaling, shape, w.x_tilde);
    const std::vector<std::string> header{"x_tilde", "x", "R", "V", "Q", "R_breve", "V_breve", "R_infty"};
    const std::vector<std::vector<double>> cols{w.x_tilde, x, w.R, w.V, w.Q, Rb, Vb, r_inf};
    write_csv(dir / (stem + ".csv"), header, cols);
    manifest.record(dir / (stem + ".csv"));
    const json side = {{"omega", w.scaling.omega},
                       {"delta", w.scaling.delta},
                       {"alpha", w.scaling.alpha},
                       {"beta", w.scaling.beta},
                       {"xi", w.scaling.xi},
                       {"energy", w.energy},
                       {"tail_rate", w.tail_rate},
                       {"residual", w.residual},
                       {"newton_iterations", w.newton_iterations},
                       {"err_inf_R", sup_abs_diff(w.R, Rb)},
                       {"err_inf_V", sup_abs_diff(w.V, Vb)}};
    write_json(dir / (stem + ".json"), side);
    manifest.record(dir / (stem + ".json"));
    summary.push_back(side);
  }
  return finish(cfg, manifest, summary.size() == 1 ? summary[0] : summary);
}

namespace {

json spectral_json(const WaveProfile& wave, const SpectralConfig& sc, const SpectralReport& rep) {
  const auto& j = rep.jordan;
  const auto& z = rep.scan.zero;
  json accepted = json::array();
  for (const auto& e : rep.scan.eigenvalues)
    accepted.push_back({{"re", e.lambda.real()},
                        {"im", e.lambda.imag()},
                        {"residual", e.residual},
                        {"mass_fraction", e.mass_fraction},
                        {"zero_cluster", e.zero_cluster}});
  json suspects = json::array();
  for (const auto& s : rep.scan.suspects) suspects.push_back({{"re", s.real()}, {"im", s.imag()}});
  return {{"omega", wave.scaling.omega},
          {"a", sc.a},
          {"verdict", to_string(rep.verdict)},
          {"grid", {{"spacing", sc.spacing}, {"half_length", sc.half_length}}},
          {"total_eigenvalues", rep.scan.total_eigenvalues},
          {"accepted", accepted},
          {"rejected", rep.scan.rejected.size()},
          {"suspects", suspects},
          {"zero_cluster",
           {{"size", z.cluster_size},
            {"singular_L", z.singular_L},
            {"singular_L2", z.singular_L2},
            {"consistent", z.consistent}}},
          {"jordan",
           {{"residual_star", j.residual_star},
            {"residual_sharp", j.residual_sharp},
            {"reference_sharp", j.reference_sharp},
            {"sigma", j.sigma},
            {"sigma_star_star", j.sigma_star_star},
            {"normalized_sigma", j.normalized_sigma}}}};
}

void write_essential(const std::filesystem::path& path, const std::vector<EssentialBranch>& curves) {
  std::vector<double> branch, kappa, re, im;
  for (const auto& b : curves)
    for (std::size_t i = 0; i < b.kappa.size(); ++i) {
      branch.push_back(b.sign);
      kappa.push_back(b.kappa[i]);
      re.push_back(b.lambda[i].real());
      im.push_back(b.lambda[i].imag());
    }
  const std::vector<std::string> header{"branch", "kappa", "re", "im"};
  write_csv(path, header, std::vector<std::vector<double>>{branch, kappa, re, im});
}

void write_scan(const std::filesystem::path& path, const ScanResult& scan) {
  std::vector<std::vector<double>> cols(8);
  auto add = [&](const ComputedEigenvalue& e) {
    const double row[] = {e.lambda.real(), e.lambda.imag(), e.residual, e.mass_fraction, e.overlap_star,
                          e.overlap_sharp, e.accepted ? 1.0 : 0.0, e.zero_cluster ? 1.0 : 0.0};
    for (int i = 0; i < 8; ++i) cols[i].push_back(row[i]);
  };
  for (const auto& e : scan.eigenvalues) add(e);
  for (const auto& e : scan.rejected) add(e);
  const std::vector<std::string> header{"re", "im", "residual", "mass_fraction", "overlap_star", "overlap_sharp",
                                        "accepted", "zero_cluster"};
  write_csv(path, header, cols);
}

}  // namespace

json run_spectrum(const RunConfig& cfg) {
  const Potential p = cfg.potential.make();
  const ShapeSolution shape = shape_for(cfg, cfg.omegas.back());
  const auto waves = solve_ladder(p, shape, cfg.omegas, cfg.wave, true);
  const SpectralConfig sc = spectral_config(cfg);
  std::vector<SpectralReport> reports(waves.size());
  parallel_for(waves.size(), [&](std::size_t i) { reports[i] = analyze_spectrum(waves[i], sc); });

  Manifest manifest(cfg.out_dir);
  json summary = json::array();
  for (std::size_t i = 0; i < waves.size(); ++i) {
    const std::string prefix = waves.size() == 1 ? "" : tag(waves[i].scaling.omega) + "_";
    const json rep = spectral_json(waves[i], sc, reports[i]);
    const auto report = cfg.out_dir / (prefix + "report.json");
    write_json(report, rep);
    write_essential(cfg.out_dir / (prefix + "essential.csv"), reports[i].essential_curves);
    write_scan(cfg.out_dir / (prefix + "eigenvalues.csv"), reports[i].scan);
    for (const char* f : {"report.json", "essential.csv", "eigenvalues.csv"}) manifest.record(cfg.out_dir / (prefix + f));
    summary.push_back({{"omega", waves[i].scaling.omega},
                       {"verdict", rep["verdict"]},
                       {"zero_cluster", rep["zero_cluster"]["size"]},
                       {"normalized_sigma", rep["jordan"]["normalized_sigma"]}});
  }
  return finish(cfg, manifest, summary.size() == 1 ? summary[0] : summary);
}

json run_simulate(const RunConfig& cfg) {
  const Potential p = cfg.potential.make();
  const double omega = cfg.omegas.front();
  std::vector<double> speeds;
  for (int k = -2; k <= 2; ++k) speeds.push_back(omega * (1.0 + k * cfg.ladder_step));
  const ShapeSolution shape = shape_for(cfg, speeds.back());
  const auto family = solve_ladder(p, shape, speeds, cfg.wave, false);

  SimulationConfig sim = cfg.simulation;
  sim.track.a = cfg.a;
  const SimulationResult res = simulate(family[2], family, sim);

  Manifest manifest(cfg.out_dir);
  const std::size_t stride = std::max<std::size_t>(1, (res.states.size() + 19) / 20);
  std::vector<double> t, j, r, v;
  for (std::size_t k = 0; k < res.states.size(); k += stride) {
    const auto& s = res.states[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      t.push_back(s.t);
      j.push_back(static_cast<double>(static_cast<long>(i) + s.origin));
      r.push_back(s.r[i]);
      v.push_back(s.v[i]);
    }
  }
  write_csv(cfg.out_dir / "states.csv", std::vector<std::string>{"t", "j", "r", "v"},
            std::vector<std::vector<double>>{t, j, r, v});
  const auto& tr = res.track;
  write_csv(cfg.out_dir / "track.csv",
            std::vector<std::string>{"t", "tau", "omega_fit", "weighted_err", "l2_err", "cone_err"},
            std::vector<std::vector<double>>{tr.times, tr.tau, tr.omega_fit, tr.weighted_err, tr.l2_err, tr.cone_err});
  const json summary = {{"omega", omega},
                        {"eta", sim.perturbation.amplitude},
                        {"b0_fit", tr.b0_fit},
                        {"omega_inf", tr.omega_inf},
                        {"tau_inf", tr.tau_inf},
                        {"max_l2_err", tr.max_l2_err},
                        {"speed", tr.speed},
                        {"cone_speed", tr.cone_speed},
                        {"energy_drift", res.energy_drift},
                        {"substeps", res.stats.substeps},
                        {"deepest_halving", res.stats.deepest},
                        {"window_shift", res.window_shift}};
  write_json(cfg.out_dir / "summary.json", summary);
  for (const char* f : {"states.csv", "track.csv", "summary.json"}) manifest.record(cfg.out_dir / f);
  return finish(cfg, manifest, summary);
}

json run_sweep(const RunConfig& cfg) {
  const Potential p = cfg.potential.make();
  const ShapeSolution shape = shape_for(cfg, cfg.omegas.back());
  const auto waves = solve_ladder(p, shape, cfg.omegas, cfg.wave, false);
  std::vector<WaveMetrics> metrics(waves.size());
  parallel_for(waves.size(), [&](std::size_t i) { metrics[i] = wave_metrics(waves[i], shape); });

  const std::vector<std::string> header{"omega",     "delta",       "xi",          "alpha",        "beta",
                                        "alpha_limit", "delta_alpha_Y", "delta_alpha_xi_Yp", "err_inf_R",
                                        "err_local_R", "err_inf_V",   "V0_hat",      "V09_hat",      "tail_slope",
                                        "tail_rate",   "energy",      "residual"};
  std::vector<std::vector<double>> cols(header.size());
  json summary = json::array();
  for (const auto& m : metrics) {
    const double row[] = {m.omega,     m.delta,       m.xi,       m.alpha,     m.beta,      m.alpha_limit,
                          m.delta_alpha_Y, m.delta_alpha_xi_Yp, m.err_inf_R, m.err_local_R, m.err_inf_V,
                          m.V0_hat,    m.V09_hat,     m.tail_slope, m.tail_rate, m.energy,  m.residual};
    for (std::size_t i = 0; i < header.size(); ++i) cols[i].push_back(row[i]);
    summary.push_back(m.to_json());
  }
  Manifest manifest(cfg.out_dir);
  write_csv(cfg.out_dir / "sweep.csv", header, cols);
  manifest.record(cfg.out_dir / "sweep.csv");
  return finish(cfg, manifest, summary);
}

json run_repro_figures(const RunConfig& cfg) {
  const Potential p = cfg.potential.make();
  const ShapeSolution shape = shape_for(cfg, cfg.omegas.back());
  const auto waves = solve_ladder(p, shape, cfg.omegas, cfg.wave, true);
  Manifest manifest(cfg.out_dir);
  const auto& dir = cfg.out_dir;

  // Profiles on |x| <= 1.5 in lattice units, one block per speed.
  std::vector<std::vector<double>> dist(6), vel(4), err(5), deriv(5);
  for (const WaveProfile& w : waves) {
    const auto Rb = approx_distance(w.scaling, shape, w.x_tilde);
    const double omega = w.scaling.omega;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double x = w.x(i);
      if (std::abs(x) > 1.5) continue;
      const double d[] = {omega, w.scaling.delta, x, w.R[i], Rb[i], std::min(0.0, -1.0 + std::abs(x))};
      for (int c = 0; c < 6; ++c) dist[c].push_back(d[c]);
      const double v[] = {omega, x, w.V[i] / omega, std::abs(x) <= 0.5 ? 1.0 : 0.0};
      for (int c = 0; c < 4; ++c) vel[c].push_back(v[c]);
      const double e[] = {omega, w.scaling.delta, w.x_tilde[i], x, w.R[i] - Rb[i]};
      for (int c = 0; c < 5; ++c) err[c].push_back(e[c]);
      const double q[] = {omega, w.x_tilde[i], x, w.Q[i], w.dR_ddelta[i]};
      for (int c = 0; c < 5; ++c) deriv[c].push_back(q[c]);
    }
  }
  auto emit = [&](const std::string& name, std::vector<std::string> header,
                  const std::vector<std::vector<double>>& cols) {
    write_csv(dir / name, header, cols);
    manifest.record(dir / name);
  };
  emit("fig_distance_profiles.csv", {"omega", "delta", "x", "R_exact", "R_breve", "R_infty"}, dist);
  emit("fig_velocity_profiles.csv", {"omega", "x", "V_hat", "V_hat_infty"}, vel);
  emit("fig_distance_error.csv", {"omega", "delta", "x_tilde", "x", "R_minus_R_breve"}, err);
  emit("fig_distance_derivative.csv", {"omega", "x_tilde", "x", "Q", "dR_ddelta"}, deriv);

  // Spectrum of the operator for the median speed.
  const WaveProfile& w = waves[(waves.size() - 1) / 2];
  const SpectralConfig sc = spectral_config(cfg);
  const DiscreteOperator op = assemble_operator(w, sc);
  std::vector<complex> ev = operator_eigenvalues(op);
  std::sort(ev.begin(), ev.end(), [](complex x, complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  std::vector<double> re, im;
  for (complex z : ev) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  emit("fig_spectrum_points.csv", {"re", "im"}, {re, im});
  write_essential(dir / "fig_spectrum_essential.csv", essential_spectrum(w.scaling.omega, sc, p));
  manifest.record(dir / "fig_spectrum_essential.csv");

  json summary = {{"potential", cfg.potential.to_json()}, {"omegas", cfg.omegas}, {"spectrum_omega", w.scaling.omega},
                  {"eigenvalues", ev.size()}};
  return finish(cfg, manifest, summary);
}

json run(const RunConfig& cfg) {
  cfg.validate();
  const std::string& e = cfg.experiment;
  if (e == "shape-ode") return run_shape_ode(cfg);
  if (e == "scaling") return run_scaling(cfg);
  if (e == "wave") return run_wave(cfg);
  if (e == "spectrum") return run_spectrum(cfg);
  if (e == "simulate") return run_simulate(cfg);
  if (e == "sweep") return run_sweep(cfg);
  if (e == "repro-figures") return run_repro_figures(cfg);
  throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace fput
