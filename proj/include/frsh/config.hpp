#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "frsh/io.hpp"
#include "frsh/profiles.hpp"
#include "frsh/propagator.hpp"

namespace frsh {

enum class ExperimentKind {
  kEvolve,
  kDecompose,
  kWaveOperator,
  kBlowupScan,
  kMinimalMass,
  kNonlinearCheck,
};

inline const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kEvolve: return "evolve";
    case ExperimentKind::kDecompose: return "decompose";
    case ExperimentKind::kWaveOperator: return "wave-operator";
    case ExperimentKind::kBlowupScan: return "blowup-scan";
    case ExperimentKind::kMinimalMass: return "minimal-mass";
    case ExperimentKind::kNonlinearCheck: return "nonlinear-check";
  }
  return "unknown";
}

struct InitialSpec {
  std::string kind = "gaussian";  // gaussian | file
  double mass = 1.0;
  double width = 1.5;
  std::string path;
};

// Band-limited unit-scale radial profile placed at dyadic band `band`.
struct ComponentSpec {
  int band = 0;
  double mass = 1.0;
  double t = 0.0;
  double center = 1.0;  // spectral shell center of the unit profile
  double width = 0.55;  // spectral shell width
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kEvolve;
  SimConfig sim;
  ExtractionConfig extraction;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  InitialSpec initial;

  double wave_T = 2.0;
  double wave_t_end = 4.0;
  double wave_tol = 1e-9;

  double bracket_lo = 0.1;
  double bracket_hi = 2.0;
  int n_bisect = 6;

  std::string schedule = "sqrt";
  int witness_count = 12;

  std::vector<std::filesystem::path> input_files;
  std::vector<ComponentSpec> components;
  double check_window = 1.0;

  std::string raw_text;
  std::string config_hash;
};

namespace detail {

// Sectioned key-value text; '#' comments, duplicate keys rejected.
struct KvFile {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::filesystem::path dir;

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static KvFile parse_text(const std::string& text) {
    KvFile kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      auto [it, fresh] = kv.sections[section].emplace(key, value);
      if (!fresh)
        throw ConfigError("duplicate key '" + (section.empty() ? key : section + "." + key) +
                          "'");
    }
    return kv;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key,
                  std::optional<std::string> fallback = {}) const {
    auto s = sections.find(section);
    if (s != sections.end()) {
      auto k = s->second.find(key);
      if (k != s->second.end()) return k->second;
    }
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + (section.empty() ? key : section + "." + key) + "'");
  }

  double get_double(const std::string& section, const std::string& key,
                    std::optional<double> fallback = {}) const {
    if (!has(section, key)) {
      if (fallback) return *fallback;
      throw ConfigError("missing key '" + section + "." + key + "'");
    }
    const std::string v = get(section, key);
    try {
      std::size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("key '" + section + "." + key + "': not a number: '" + v + "'");
    }
  }

  long get_int(const std::string& section, const std::string& key,
               std::optional<long> fallback = {}) const {
    if (!has(section, key)) {
      if (fallback) return *fallback;
      throw ConfigError("missing key '" + section + "." + key + "'");
    }
    const std::string v = get(section, key);
    try {
      std::size_t pos = 0;
      long d = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("key '" + section + "." + key + "': not an integer: '" + v + "'");
    }
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError("key '" + section + "." + key + "': expected true/false: '" + v + "'");
  }
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, sep)) {
    tok = KvFile::trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

inline ComponentSpec parse_component(const std::string& text) {
  ComponentSpec c;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("component entry '" + item + "': expected name:value");
    const std::string name = KvFile::trim(item.substr(0, colon));
    const std::string value = KvFile::trim(item.substr(colon + 1));
    try {
      if (name == "band")
        c.band = std::stoi(value);
      else if (name == "mass")
        c.mass = std::stod(value);
      else if (name == "t")
        c.t = std::stod(value);
      else if (name == "center")
        c.center = std::stod(value);
      else if (name == "width")
        c.width = std::stod(value);
      else
        throw ConfigError("component entry: unknown field '" + name + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("component field '" + name + "': bad value '" + value + "'");
    }
  }
  return c;
}

}  // namespace detail

inline ExperimentKind parse_kind(const std::string& s) {
  if (s == "evolve") return ExperimentKind::kEvolve;
  if (s == "decompose") return ExperimentKind::kDecompose;
  if (s == "wave-operator") return ExperimentKind::kWaveOperator;
  if (s == "blowup-scan") return ExperimentKind::kBlowupScan;
  if (s == "minimal-mass") return ExperimentKind::kMinimalMass;
  if (s == "nonlinear-check") return ExperimentKind::kNonlinearCheck;
  throw ConfigError("unknown kind '" + s +
                    "' (expected evolve|decompose|wave-operator|blowup-scan|minimal-mass|"
                    "nonlinear-check)");
}

inline ExperimentConfig parse_config_text(const std::string& text,
                                          const std::filesystem::path& base_dir = ".") {
  using detail::KvFile;
  KvFile kv = KvFile::parse_text(text);
  kv.dir = base_dir;

  ExperimentConfig cfg;
  cfg.raw_text = text;
  cfg.config_hash = hash_hex(fnv1a64(text));
  cfg.kind = parse_kind(kv.get("", "kind"));

  const int d = static_cast<int>(kv.get_int("grid", "d", 2));
  const int n = static_cast<int>(kv.get_int("grid", "N"));
  const double L = kv.get_double("grid", "L");
  cfg.sim.grid = Grid::make(d, n, L);

  cfg.sim.alpha = kv.get_double("sim", "alpha", 1.8);
  const double lo = cfg.sim.admissible_lo();
  if (!((cfg.sim.alpha > lo && cfg.sim.alpha < 2.0) || cfg.sim.alpha == 2.0)) {
    std::ostringstream oss;
    oss << "key 'sim.alpha': " << cfg.sim.alpha << " outside the admissible interval (2d/(2d-1), 2] = ("
        << lo << ", 2]";
    throw ConfigError(oss.str());
  }
  cfg.sim.lambda = static_cast<int>(kv.get_int("sim", "lambda", -1));
  cfg.sim.dt = kv.get_double("sim", "dt", 1e-3);
  cfg.sim.t_end = kv.get_double("sim", "t_end", 1.0);
  cfg.sim.dealias = kv.get_bool("sim", "dealias", true);
  cfg.sim.adaptive.enabled = kv.get_bool("sim", "adaptive", false);
  cfg.sim.adaptive.growth_trigger = kv.get_double("sim", "growth_trigger", 0.10);
  cfg.sim.adaptive.underflow_exponent =
      static_cast<int>(kv.get_int("sim", "underflow_exponent", 20));
  cfg.sim.log_every = static_cast<int>(kv.get_int("sim", "log_every", 1));
  cfg.sim.max_steps = kv.get_int("sim", "max_steps", 2'000'000);
  cfg.sim.monitor_mass_leak = kv.get_bool("sim", "monitor_mass_leak", true);
  cfg.sim.snapshot_every = static_cast<int>(kv.get_int("output", "snapshot_every", 0));
  cfg.sim.validate();

  cfg.extraction.alpha = cfg.sim.alpha;
  cfg.extraction.delta_frac = kv.get_double("extraction", "delta_frac", 0.1);
  cfg.extraction.refined.p = kv.get_double("extraction", "p", 1.5);
  cfg.extraction.refined.theta = kv.get_double("extraction", "theta", 1.0 / 3.0);
  cfg.extraction.cap_c = kv.get_double("extraction", "c", 1.0);
  cfg.extraction.rho_perp = kv.get_double("extraction", "rho_perp", 16.0);
  cfg.extraction.t_sep = kv.get_double("extraction", "t_sep", 10.0);
  cfg.extraction.m_max = static_cast<int>(kv.get_int("extraction", "m_max", 4));
  cfg.extraction.mu_floor_frac = kv.get_double("extraction", "mu_floor_frac", 0.05);
  cfg.extraction.shift_min = kv.get_double("extraction", "shift_min", -32.0);
  cfg.extraction.shift_max = kv.get_double("extraction", "shift_max", 32.0);
  cfg.extraction.shift_step = kv.get_double("extraction", "shift_step", 0.25);
  cfg.extraction.window_radius = kv.get_double("extraction", "window_radius", 6.0);
  cfg.extraction.tail_fraction = kv.get_double("extraction", "tail_fraction", 0.5);
  cfg.extraction.max_passes = static_cast<int>(kv.get_int("extraction", "max_passes", 8));
  cfg.extraction.validate();

  cfg.seed = static_cast<std::uint64_t>(kv.get_int("rng", "seed", 1));
  if (kv.has("output", "dir")) cfg.out_dir = kv.get("output", "dir");

  if (kv.has("initial", "kind")) cfg.initial.kind = kv.get("initial", "kind");
  cfg.initial.mass = kv.get_double("initial", "mass", 1.0);
  cfg.initial.width = kv.get_double("initial", "width", 1.5);
  if (kv.has("initial", "file")) {
    cfg.initial.kind = "file";
    cfg.initial.path = kv.get("initial", "file");
  }
  if (cfg.initial.kind != "gaussian" && cfg.initial.kind != "file")
    throw ConfigError("key 'initial.kind': expected gaussian or file");

  switch (cfg.kind) {
    case ExperimentKind::kEvolve:
    case ExperimentKind::kBlowupScan:
      if (!kv.sections.count("initial"))
        throw ConfigError("kind '" + std::string(kind_name(cfg.kind)) +
                          "' requires an [initial] section");
      break;
    case ExperimentKind::kWaveOperator:
      cfg.wave_T = kv.get_double("wave", "T");
      cfg.wave_t_end = kv.get_double("wave", "t_end");
      cfg.wave_tol = kv.get_double("wave", "tol", 1e-9);
      break;
    case ExperimentKind::kMinimalMass:
      cfg.bracket_lo = kv.get_double("bracket", "m_lo");
      cfg.bracket_hi = kv.get_double("bracket", "m_hi");
      cfg.n_bisect = static_cast<int>(kv.get_int("bracket", "n_bisect", 6));
      break;
    case ExperimentKind::kDecompose: {
      if (kv.has("input", "files"))
        for (const auto& f : detail::split(kv.get("input", "files"), ';'))
          cfg.input_files.push_back(base_dir / f);
      if (cfg.input_files.empty() && !kv.sections.count("profiles"))
        throw ConfigError("kind 'decompose' requires [input] files or a [profiles] section");
      break;
    }
    case ExperimentKind::kNonlinearCheck:
      if (!kv.sections.count("profiles"))
        throw ConfigError("kind 'nonlinear-check' requires a [profiles] section");
      break;
  }
  if (kv.sections.count("profiles")) {
    for (const auto& c : detail::split(kv.get("profiles", "components", std::string("")), ';'))
      cfg.components.push_back(detail::parse_component(c));
    cfg.check_window = kv.get_double("profiles", "window", 1.0);
  }
  cfg.schedule = kv.get("blowup", "schedule", std::string("sqrt"));
  cfg.witness_count = static_cast<int>(kv.get_int("blowup", "witness_count", 12));
  return cfg;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path());
}

}  // namespace frsh
