#include "fput/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "fput/errors.hpp"

namespace fput {

namespace {

constexpr const char* kVersion = "1.0.0";

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError("'" + key + "' must be true or false");
  return j.get<bool>();
}

Perturbation::Kind perturbation_kind(const std::string& s) {
  if (s == "none") return Perturbation::Kind::None;
  if (s == "velocity") return Perturbation::Kind::VelocityBump;
  if (s == "distance") return Perturbation::Kind::DistanceBump;
  if (s == "packet") return Perturbation::Kind::Packet;
  throw ConfigError("perturbation must be none, velocity, distance or packet, got '" + s + "'");
}

std::string perturbation_name(Perturbation::Kind k) {
  switch (k) {
    case Perturbation::Kind::VelocityBump: return "velocity";
    case Perturbation::Kind::DistanceBump: return "distance";
    case Perturbation::Kind::Packet: return "packet";
    case Perturbation::Kind::None: break;
  }
  return "none";
}

}  // namespace

Potential PotentialSpec::make() const {
  if (kind == "inverse_monomial") return Potential::inverse_monomial(m);
  if (kind == "lennard_jones") return Potential::lennard_jones(n);
  if (kind == "two_term") return Potential::two_term(m, k);
  throw ConfigError("potential kind must be inverse_monomial, lennard_jones or two_term, got '" + kind + "'");
}

json PotentialSpec::to_json() const {
  if (kind == "lennard_jones") return {{"kind", kind}, {"n", n}};
  if (kind == "two_term") return {{"kind", kind}, {"m", m}, {"k", k}};
  return {{"kind", kind}, {"m", m}};
}

void RunConfig::validate() const {
  if (omegas.empty()) throw ConfigError("speed ladder is empty");
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > 0.0)) throw ConfigError("speeds must be positive");
    if (i > 0 && !(omegas[i] > omegas[i - 1])) throw ConfigError("speed ladder must be strictly increasing");
  }
  if (!(a > 0.0)) throw ConfigError("weight a must be positive");
  if (!(shape_xmax > 0.0)) throw ConfigError("shape xmax must be positive");
  if (!(shape_tol > 0.0) || !(wave.tol > 0.0) || !(wave.linear_tol > 0.0) || !(spectral.residual_tol > 0.0))
    throw ConfigError("tolerances must be positive");
  if (!(wave.max_spacing > 0.0)) throw ConfigError("wave spacing must be positive");
  if (!(simulation.T > 0.0)) throw ConfigError("simulation time must be positive");
  if (simulation.dt < 0.0) throw ConfigError("time step must not be negative");
  if (!(simulation.step.theta > 0.0 && simulation.step.theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (!(ladder_step > 0.0 && ladder_step < 0.1)) throw ConfigError("ladder step must lie in (0, 0.1)");
  if (out_dir.empty()) throw ConfigError("output directory is empty");
  try {
    spectral.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("spectral grid: ") + e.what());
  }
  const Potential p = potential.make();
  const auto report = fput::validate(p);
  if (!report.pass()) throw ConfigError("potential " + p.name() + " fails: " + report.failures());
}

json RunConfig::to_json() const {
  const auto& s = simulation;
  return {
      {"experiment", experiment},
      {"potential", potential.to_json()},
      {"omegas", omegas},
      {"a", a},
      {"shape", {{"xmax", shape_xmax}, {"tol", shape_tol}}},
      {"wave",
       {{"tol", wave.tol}, {"max_spacing", wave.max_spacing}, {"points_per_xi", wave.points_per_xi},
        {"tail_margin", wave.tail_margin}}},
      {"spectral",
       {{"spacing", spectral.spacing}, {"half_length", spectral.half_length}, {"margin", spectral.margin},
        {"residual_tol", spectral.residual_tol}, {"refine", refine}}},
      {"simulation",
       {{"T", s.T}, {"dt", s.dt}, {"n", s.n}, {"samples", s.samples}, {"theta", s.step.theta},
        {"perturbation", perturbation_name(s.perturbation.kind)}, {"eta", s.perturbation.amplitude},
        {"offset", s.perturbation.offset}, {"width", s.perturbation.width}, {"ladder_step", ladder_step},
        {"recenter_margin", s.recenter_margin}}},
  };
}

namespace {

RunConfig parse_config(const json& j, RunConfig c) {
  check_keys(j, "config",
             {"experiment", "potential", "omega", "omegas", "a", "shape", "wave", "spectral", "simulation", "out"});
  if (j.contains("experiment")) c.experiment = j["experiment"].get<std::string>();
  if (j.contains("potential")) {
    const json& p = j["potential"];
    check_keys(p, "potential", {"kind", "m", "n", "k"});
    if (p.contains("kind")) c.potential.kind = p["kind"].get<std::string>();
    if (p.contains("m")) c.potential.m = number(p["m"], "m");
    if (p.contains("n")) c.potential.n = number(p["n"], "n");
    if (p.contains("k")) c.potential.k = number(p["k"], "k");
  }
  if (j.contains("omega") && j.contains("omegas")) throw ConfigError("give either omega or omegas");
  if (j.contains("omega")) c.omegas = {number(j["omega"], "omega")};
  if (j.contains("omegas")) {
    if (!j["omegas"].is_array()) throw ConfigError("'omegas' must be an array");
    c.omegas.clear();
    for (const auto& x : j["omegas"]) c.omegas.push_back(number(x, "omegas"));
  }
  if (j.contains("a")) c.a = number(j["a"], "a");
  if (j.contains("shape")) {
    const json& s = j["shape"];
    check_keys(s, "shape", {"xmax", "tol"});
    if (s.contains("xmax")) c.shape_xmax = number(s["xmax"], "xmax");
    if (s.contains("tol")) c.shape_tol = number(s["tol"], "tol");
  }
  if (j.contains("wave")) {
    const json& w = j["wave"];
    check_keys(w, "wave", {"tol", "max_spacing", "points_per_xi", "tail_margin"});
    if (w.contains("tol")) c.wave.tol = number(w["tol"], "tol");
    if (w.contains("max_spacing")) c.wave.max_spacing = number(w["max_spacing"], "max_spacing");
    if (w.contains("points_per_xi")) c.wave.points_per_xi = integer(w["points_per_xi"], "points_per_xi");
    if (w.contains("tail_margin")) c.wave.tail_margin = number(w["tail_margin"], "tail_margin");
  }
  if (j.contains("spectral")) {
    const json& s = j["spectral"];
    check_keys(s, "spectral", {"spacing", "half_length", "margin", "residual_tol", "refine"});
    if (s.contains("spacing")) c.spectral.spacing = number(s["spacing"], "spacing");
    if (s.contains("half_length")) c.spectral.half_length = number(s["half_length"], "half_length");
    if (s.contains("margin")) c.spectral.margin = number(s["margin"], "margin");
    if (s.contains("residual_tol")) c.spectral.residual_tol = number(s["residual_tol"], "residual_tol");
    if (s.contains("refine")) c.refine = boolean(s["refine"], "refine");
  }
  if (j.contains("simulation")) {
    const json& s = j["simulation"];
    check_keys(s, "simulation",
               {"T", "dt", "n", "samples", "theta", "perturbation", "eta", "offset", "width", "ladder_step",
                "recenter_margin"});
    auto& sim = c.simulation;
    if (s.contains("T")) sim.T = number(s["T"], "T");
    if (s.contains("dt")) sim.dt = number(s["dt"], "dt");
    if (s.contains("n")) {
      const int n = integer(s["n"], "n");
      if (n < 0) throw ConfigError("chain length must not be negative");
      sim.n = static_cast<std::size_t>(n);
    }
    if (s.contains("samples")) sim.samples = integer(s["samples"], "samples");
    if (s.contains("theta")) sim.step.theta = number(s["theta"], "theta");
    if (s.contains("perturbation")) sim.perturbation.kind = perturbation_kind(s["perturbation"].get<std::string>());
    if (s.contains("eta")) sim.perturbation.amplitude = number(s["eta"], "eta");
    if (s.contains("offset")) sim.perturbation.offset = number(s["offset"], "offset");
    if (s.contains("width")) sim.perturbation.width = number(s["width"], "width");
    if (s.contains("ladder_step")) c.ladder_step = number(s["ladder_step"], "ladder_step");
    if (s.contains("recenter_margin")) sim.recenter_margin = number(s["recenter_margin"], "recenter_margin");
  }
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  return c;
}

}  // namespace

RunConfig config_from_json(const json& j, RunConfig base) {
  try {
    return parse_config(j, std::move(base));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const std::filesystem::path& path, std::span<const std::string> header,
               std::span<const std::vector<double>> columns) {
  if (header.size() != columns.size()) throw InvalidParameter("header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (const auto& c : columns)
    if (c.size() != rows) throw InvalidParameter("columns differ in length in " + path.string());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << format_number(columns[i][r]);
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("HashError", "SHA-256 unavailable");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[digest[i] >> 4];
    s += hex[digest[i] & 15];
  }
  return s;
}

Manifest::Manifest(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void Manifest::record(const std::filesystem::path& file) { files_.push_back(file); }

void Manifest::set(const std::string& key, json value) { fields_[key] = std::move(value); }

json Manifest::to_json() const {
  json j = {{"tool", "fput"}, {"version", kVersion}};
  for (const auto& [k, v] : fields_.items()) j[k] = v;
  std::vector<std::pair<std::string, std::filesystem::path>> files;
  for (const auto& f : files_) files.emplace_back(std::filesystem::relative(f, dir_).generic_string(), f);
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const auto& [rel, full] : files)
    list.push_back({{"path", rel}, {"bytes", std::filesystem::file_size(full)}, {"sha256", sha256_file(full)}});
  j["files"] = list;
  return j;
}

std::filesystem::path Manifest::write() const {
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  out << to_json().dump(2) << '\n';
  if (!out) throw ConfigError("cannot write " + path.string());
  return path;
}

json error_json(const std::exception& e) {
  std::string type = "Error";
  if (const auto* fe = dynamic_cast<const Error*>(&e)) type = fe->kind();
  return {{"error", {{"type", type}, {"message", e.what()}}}};
}

int thread_limit() {
  if (const char* env = std::getenv("FPUT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace fput
