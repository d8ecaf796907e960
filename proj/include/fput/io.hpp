#pragma once

#include <exception>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fput/lattice_sim.hpp"
#include "fput/potentials.hpp"
#include "fput/spectral.hpp"
#include "fput/wave_solver.hpp"

namespace fput {

using json = nlohmann::json;

// {kind, m | n, k}: inverse_monomial uses m, lennard_jones uses n, two_term
// uses m and k.
struct PotentialSpec {
  std::string kind = "inverse_monomial";
  double m = 2.0;
  double n = 2.0;
  double k = 3.0;

  Potential make() const;
  json to_json() const;
};

struct RunConfig {
  std::string experiment;
  PotentialSpec potential;
  std::vector<double> omegas{40.0};
  double a = 1.0;
  double shape_xmax = 100.0;
  double shape_tol = 1e-10;
  WaveOptions wave;
  SpectralConfig spectral;
  bool refine = false;
  SimulationConfig simulation;
  double ladder_step = 0.005;  // relative speed spacing of the tracking profiles
  std::filesystem::path out_dir = "out";

  // Throws ConfigError.
  void validate() const;
  json to_json() const;
};

// Reads the keys present in j on top of base. Unknown keys are errors.
RunConfig config_from_json(const json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Shortest text that reads back to the same double ("%.17g").
std::string format_number(double x);

// Header row plus one row per index; all columns must have equal length.
void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               std::span<const std::vector<double>> columns);

std::string sha256_file(const std::filesystem::path& path);

// manifest.json in the output directory: tool version, configuration,
// results and every emitted file with its SHA-256. Contains no timestamps.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir);
  // Registers a file written below the directory.
  void record(const std::filesystem::path& file);
  void set(const std::string& key, json value);
  const std::filesystem::path& dir() const { return dir_; }
  json to_json() const;
  // Writes manifest.json and returns its path.
  std::filesystem::path write() const;

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  json fields_ = json::object();
};

// {"error": {"type": ..., "message": ...}}
json error_json(const std::exception& e);

// FPUT_THREADS if set to a positive integer, else the hardware concurrency.
int thread_limit();

}  // namespace fput
