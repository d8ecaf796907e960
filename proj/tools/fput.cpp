// Command-line front end: one subcommand per pipeline. Values come from the
// defaults of each subcommand, then an optional JSON config, then flags.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fput/errors.hpp"
#include "fput/io.hpp"
#include "fput/pipelines.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string potential;
  double m = 0, n = 0, k = 0;
  std::vector<double> omegas;
  double a = 0;
  // shape-ode
  double xmax = 0, tol = 0;
  // wave
  int points_per_xi = 0;
  double wave_tol = 0;
  // spectrum
  std::vector<double> grid;
  bool refine = false;
  // simulate
  double eta = 0, T = 0, dt = 0, offset = 0, width = 0, theta = 0;
  std::string perturbation;
  int samples = 0;
  std::size_t sites = 0;
};

std::string potential_kind(const std::string& s) {
  if (s == "im" || s == "inverse_monomial") return "inverse_monomial";
  if (s == "lj" || s == "lennard_jones") return "lennard_jones";
  if (s == "two_term") return "two_term";
  throw fput::ConfigError("unknown potential '" + s + "' (use im, lj or two_term)");
}

fput::RunConfig defaults(const std::string& experiment) {
  fput::RunConfig c;
  c.experiment = experiment;
  if (experiment == "repro-figures") {
    c.potential.kind = "lennard_jones";
    c.potential.n = 2.0;
    c.omegas = {20.0, 40.0, 80.0, 160.0};
    c.out_dir = "figures";
  } else if (experiment == "sweep") {
    c.omegas = {20.0, 40.0, 80.0, 160.0, 320.0};
  } else if (experiment == "shape-ode") {
    c.out_dir = "shape_ode.csv";
  } else if (experiment == "wave") {
    c.out_dir = "wave.csv";
  }
  return c;
}

class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& help) : name_(name) {
    sub_ = app.add_subcommand(name, help);
    add("--config", f_.config, "JSON config file; flags override it");
    add("--out", f_.out, "output directory (or .csv file for shape-ode and wave)");
    add("--potential", f_.potential, "im, lj or two_term");
    add("--m", f_.m, "singularity order (im, two_term)");
    add("--n", f_.n, "Lennard-Jones exponent");
    add("--k", f_.k, "correction exponent (two_term)");
    sub_->add_option("--omega", f_.omegas, "speed, or comma-separated increasing ladder")->delimiter(',');
    add("--a", f_.a, "exponential weight");
  }

  template <class T>
  CLI::Option* add(const std::string& flag, T& var, const std::string& help) {
    return sub_->add_option(flag, var, help);
  }
  CLI::App* app() { return sub_; }
  Flags& flags() { return f_; }
  bool given(const std::string& flag) const {
    const CLI::Option* o = sub_->get_option_no_throw(flag);
    return o && o->count() > 0;
  }

  fput::RunConfig build() const {
    fput::RunConfig c = defaults(name_);
    if (given("--config")) c = fput::load_config(f_.config, c);
    c.experiment = name_;
    if (given("--out")) c.out_dir = f_.out;
    if (given("--potential")) c.potential.kind = potential_kind(f_.potential);
    else if (given("--n") && !given("--m")) c.potential.kind = "lennard_jones";
    else if (given("--k")) c.potential.kind = "two_term";
    if (given("--m")) c.potential.m = f_.m;
    if (given("--n")) c.potential.n = f_.n;
    if (given("--k")) c.potential.k = f_.k;
    if (given("--omega")) c.omegas = f_.omegas;
    if (given("--a")) c.a = f_.a;
    if (given("--xmax")) c.shape_xmax = f_.xmax;
    if (given("--tol")) c.shape_tol = f_.tol;
    if (given("--points-per-xi")) c.wave.points_per_xi = f_.points_per_xi;
    if (given("--wave-tol")) c.wave.tol = f_.wave_tol;
    if (given("--grid")) {
      if (f_.grid.size() != 2) throw fput::ConfigError("--grid expects h,X");
      c.spectral.spacing = f_.grid[0];
      c.spectral.half_length = f_.grid[1];
    }
    if (given("--refine")) c.refine = f_.refine;
    auto& s = c.simulation;
    if (given("--eta")) {
      s.perturbation.amplitude = f_.eta;
      if (s.perturbation.kind == fput::Perturbation::Kind::None)
        s.perturbation.kind = fput::Perturbation::Kind::VelocityBump;
    }
    if (given("--perturbation")) {
      c = fput::config_from_json({{"simulation", {{"perturbation", f_.perturbation}}}}, c);
    }
    if (given("--T")) s.T = f_.T;
    if (given("--dt")) s.dt = f_.dt;
    if (given("--offset")) s.perturbation.offset = f_.offset;
    if (given("--width")) s.perturbation.width = f_.width;
    if (given("--theta")) s.step.theta = f_.theta;
    if (given("--samples")) s.samples = f_.samples;
    if (given("--sites")) s.n = f_.sites;
    return c;
  }

 private:
  std::string name_;
  CLI::App* sub_ = nullptr;
  Flags f_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-energy travelling waves in FPUT chains: shape ODE, exact waves, spectra and simulations"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](const std::string& name, const std::string& help) {
    commands.push_back(std::make_unique<Command>(app, name, help));
    return commands.back().get();
  };
  Command* shape = make("shape-ode", "tabulate the asymptotic shape ODE and its linearization");
  shape->add("--xmax", shape->flags().xmax, "table extent");
  shape->add("--tol", shape->flags().tol, "integrator tolerance");
  make("scaling", "print the scaling parameters as JSON");
  Command* wave = make("wave", "solve exact travelling waves");
  wave->add("--points-per-xi", wave->flags().points_per_xi, "grid points on [0, xi]");
  wave->add("--wave-tol", wave->flags().wave_tol, "Newton tolerance");
  Command* spectrum = make("spectrum", "essential spectrum, neutral modes and point-spectrum scan");
  spectrum->app()->add_option("--grid", spectrum->flags().grid, "background spacing and half-length h,X")->delimiter(',');
  spectrum->app()->add_flag("--refine", spectrum->flags().refine, "use the refined grid");
  Command* sim = make("simulate", "launch a wave on the lattice and track its orbit");
  auto& sf = sim->flags();
  sim->add("--eta", sf.eta, "perturbation amplitude");
  sim->add("--perturbation", sf.perturbation, "none, velocity, distance or packet");
  sim->add("--offset", sf.offset, "perturbation position relative to the wave");
  sim->add("--width", sf.width, "perturbation width");
  sim->add("--T", sf.T, "final time");
  sim->add("--dt", sf.dt, "base time step");
  sim->add("--theta", sf.theta, "substep threshold");
  sim->add("--samples", sf.samples, "stored states (0: one per site crossing)");
  sim->add("--sites", sf.sites, "chain length (0: automatic)");
  make("sweep", "wave metrics along a speed ladder");
  make("repro-figures", "data behind the profile, error and spectrum figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << fput::error_json(fput::ConfigError(e.what())).dump() << '\n';
    return 2;
  }

  for (const auto& c : commands) {
    if (!c->app()->parsed()) continue;
    try {
      const fput::RunConfig cfg = c->build();
      std::cout << fput::run(cfg).dump(2) << '\n';
      return 0;
    } catch (const fput::ConfigError& e) {
      std::cerr << fput::error_json(e).dump() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << fput::error_json(e).dump() << '\n';
      return 1;
    }
  }
  return 1;
}
