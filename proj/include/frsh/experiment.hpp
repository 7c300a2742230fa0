#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "frsh/blowup.hpp"
#include "frsh/config.hpp"
#include "frsh/io.hpp"
#include "frsh/profile_checks.hpp"
#include "frsh/profiles.hpp"
#include "frsh/synth.hpp"
#include "frsh/version.hpp"
#include "frsh/wave_operator.hpp"

namespace frsh {

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 warning-bearing completion
  std::vector<std::string> artifacts;
  std::vector<std::string> events;
};

namespace detail {

using nlohmann::json;

class ArtifactSink {
 public:
  ArtifactSink(std::filesystem::path dir, const ExperimentConfig& cfg)
      : dir_(std::move(dir)), cfg_(cfg), t0_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path path(const std::string& name) { return dir_ / name; }

  void note(const std::string& name) { names_.push_back(name); }

  void write_json(const std::string& name, const json& j) {
    json out = j;
    out["config_hash"] = cfg_.config_hash;
    std::ofstream f(path(name));
    if (!f) throw IoError("cannot open " + path(name).string());
    f << out.dump(2) << "\n";
    note(name);
  }

  void write_field(const std::string& name, const Field& field) {
    write_snapshot(path(name), field, cfg_.sim.alpha);
    note(name);
  }

  void write_traj(const std::string& name, const Trajectory& traj) {
    write_trajectory_csv(path(name), traj, cfg_.config_hash);
    note(name);
  }

  void finalize(const std::vector<std::string>& events) {
    json manifest;
    manifest["tool"] = "frac";
    manifest["version"] = kVersion;
    manifest["kind"] = kind_name(cfg_.kind);
    manifest["seed"] = cfg_.seed;
    manifest["config_hash"] = cfg_.config_hash;
    manifest["config_echo"] = cfg_.raw_text;
    manifest["events"] = events;
    const auto dt = std::chrono::steady_clock::now() - t0_;
    manifest["wall_time_s"] =
        std::chrono::duration_cast<std::chrono::duration<double>>(dt).count();
    json arts = json::array();
    for (const auto& name : names_) {
      json a;
      a["path"] = name;
      a["fnv1a64"] = hash_hex(hash_file(dir_ / name));
      arts.push_back(a);
    }
    manifest["artifacts"] = arts;
    std::ofstream f(path("manifest.json"));
    if (!f) throw IoError("cannot open manifest.json");
    f << manifest.dump(2) << "\n";
  }

 private:
  std::filesystem::path dir_;
  const ExperimentConfig& cfg_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<std::string> names_;
};

inline Field initial_field(const ExperimentConfig& cfg) {
  if (cfg.initial.kind == "file") {
    Snapshot snap = read_snapshot(std::filesystem::path(cfg.initial.path));
    check_same_grid(snap.field.grid, cfg.sim.grid, "initial file");
    return radial_symmetrize(snap.field);
  }
  return gaussian_bump(cfg.sim.grid, cfg.initial.mass, cfg.initial.width);
}

inline void collect_events(const Trajectory& traj, std::vector<std::string>& events) {
  for (const auto& e : traj.events)
    events.push_back(std::string(event_name(e.kind)) +
                     (e.detail.empty() ? "" : ": " + e.detail) + " at t=" + fmt_double(e.t));
}

inline json decomposition_json(const Decomposition& dec, ArtifactSink& sink) {
  json j;
  j["component_count"] = dec.components.size();
  json comps = json::array();
  for (const auto& c : dec.components) {
    json e;
    e["index"] = c.index;
    e["mass2"] = c.mass2;
    e["h"] = c.h;
    e["log2_h"] = c.log2_h;
    e["t"] = c.t;
    e["band"] = c.band;
    const std::string file = "profile_" + std::to_string(c.index) + ".frsh";
    write_snapshot(sink.path(file), c.phi, dec.alpha);
    sink.note(file);
    e["snapshot"] = file;
    comps.push_back(e);
  }
  j["components"] = comps;
  j["input_mass2"] = dec.input_mass2;
  const double wn = norm_l2(dec.remainder);
  j["remainder"] = {{"mass2", wn * wn}, {"dispersive_lqlr", dec.remainder_dispersive}};
  j["pythagorean_defect"] = dec.pyth_defect;
  json pt = json::array();
  for (const auto& p : dec.pair_table)
    pt.push_back({{"j", p.j},
                  {"k", p.k},
                  {"relation", p.relation},
                  {"scale_ratio", p.scale_ratio},
                  {"time_gap_scaled", p.time_gap_scaled}});
  j["pair_table"] = pt;
  j["warnings"] = dec.warnings;
  return j;
}

inline RunResult run_evolve(const ExperimentConfig& cfg, ArtifactSink& sink) {
  RunResult res;
  Field u0 = initial_field(cfg);
  Trajectory traj = evolve(u0, cfg.sim);
  collect_events(traj, res.events);
  sink.write_traj("trajectory.csv", traj);
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snap_%06zu.frsh", i);
    sink.write_field(name, traj.states[i]);
  }
  return res;
}

inline RunResult run_decompose(const ExperimentConfig& cfg, ArtifactSink& sink) {
  RunResult res;
  std::vector<Field> seq;
  if (!cfg.input_files.empty()) {
    for (const auto& f : cfg.input_files) {
      Snapshot snap = read_snapshot(f);
      seq.push_back(std::move(snap.field));
    }
  } else {
    Field mix = synthesize_mixture(cfg.sim.grid, cfg.sim.alpha, cfg.components);
    sink.write_field("mixture.frsh", mix);
    seq.push_back(std::move(mix));
  }
  Decomposition dec = decompose(seq, cfg.extraction);
  for (const auto& w : dec.warnings) res.events.push_back(w);
  sink.write_field("remainder.frsh", dec.remainder);
  json j = decomposition_json(dec, sink);
  if (!dec.components.empty()) {
    OrthogonalityReport orep =
        orthogonality_report(dec, ReportWindow{1.0, 17}, cfg.extraction);
    json pairs = json::array();
    for (const auto& p : orep.pairs)
      pairs.push_back({{"j", p.j},
                       {"k", p.k},
                       {"relation", p.relation},
                       {"bilinear", p.bilinear},
                       {"norm_j", p.norm_j},
                       {"norm_k", p.norm_k},
                       {"ratio", p.ratio}});
    j["orthogonality"] = {{"q", orep.spec.q},
                          {"r", orep.spec.r},
                          {"pairs", pairs},
                          {"sum_of_squares", orep.sum_of_squares},
                          {"square_of_sum", orep.square_of_sum}};
  }
  sink.write_json("decomposition.json", j);
  return res;
}

inline RunResult run_wave_operator(const ExperimentConfig& cfg, ArtifactSink& sink) {
  RunResult res;
  Field g = initial_field(cfg);
  WaveOperatorResult w =
      wave_operator_solve(g, cfg.wave_T, cfg.wave_t_end, cfg.wave_tol, cfg.sim);
  sink.write_traj("trajectory.csv", w.traj);
  sink.write_field("final_state.frsh", w.traj.final_state());
  json j;
  j["iterations"] = w.iterations;
  j["updates"] = w.updates;
  j["contraction_ratios"] = w.contraction_ratios;
  j["residual"] = w.residual;
  j["tail_estimate"] = w.tail_estimate;
  j["deviation_from_linear"] = w.deviation;
  sink.write_json("wave_operator.json", j);
  if (!w.contraction_ratios.empty() && w.contraction_ratios.front() >= 1.0)
    res.events.push_back("contraction ratio >= 1 on first measured iteration");
  return res;
}

inline RunResult run_blowup_scan(const ExperimentConfig& cfg, ArtifactSink& sink) {
  RunResult res;
  Field u0 = cfg.sim.lambda == 1
                 ? make_negative_energy_data(cfg.initial.mass, cfg.initial.width, cfg.sim)
                 : initial_field(cfg);
  BlowupReport rep = detect_blowup(u0, cfg.sim, cfg.witness_count);
  collect_events(rep.trajectory, res.events);
  sink.write_traj("trajectory.csv", rep.trajectory);
  json j;
  j["verdict"] = rep.verdict;
  j["trigger_time"] = rep.trigger_time;
  j["dt_min"] = rep.dt_min;
  j["hsem_growth"] = rep.hsem_growth;
  j["final_lqlr_partial"] = rep.final_lqlr_partial;
  j["witness_times"] = rep.witness_times;
  json wit = json::array();
  for (std::size_t i = 0; i < rep.witnesses.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "witness_%03zu.frsh", i);
    sink.write_field(name, rep.witnesses[i]);
    wit.push_back(name);
  }
  j["witness_files"] = wit;
  if (rep.verdict == "blowup-trigger" && !rep.witnesses.empty()) {
    const double tstar = rep.trigger_time;
    const double alpha = cfg.sim.alpha;
    std::function<double(double)> schedule;
    if (cfg.schedule == "sqrt")
      schedule = [=](double t) {
        return std::pow(std::max(tstar - t, 1e-300), 1.0 / (2.0 * alpha));
      };
    else if (cfg.schedule == "box")
      schedule = [&](double) {
        return cfg.sim.grid.half_width * std::sqrt(static_cast<double>(cfg.sim.grid.dim));
      };
    else
      throw ConfigError("key 'blowup.schedule': unknown schedule '" + cfg.schedule + "'");
    ConcentrationReport crep = concentration_scan(rep, schedule, alpha);
    std::vector<std::array<double, 3>> rows;
    json conc = json::array();
    for (const auto& r : crep.rows) {
      rows.push_back({r.t, r.radius, r.fraction});
      conc.push_back({{"t", r.t},
                      {"radius", r.radius},
                      {"ratio", r.ratio},
                      {"concentrated", r.concentrated},
                      {"fraction", r.fraction},
                      {"running_max", r.running_max}});
    }
    write_concentration_csv(sink.path("concentration.csv"), rows, cfg.config_hash);
    sink.note("concentration.csv");
    j["concentration"] = conc;
    RescalingProbeResult probe = rescaling_probe(rep, alpha, cfg.extraction.refined);
    j["rescaling_probe"] = {{"pairwise_distance", probe.pairwise_distance},
                            {"ratio_series", probe.ratio_series},
                            {"warnings", probe.warnings}};
    for (const auto& w : probe.warnings) res.events.push_back(w);
  }
  sink.write_json("blowup.json", j);
  return res;
}

inline RunResult run_minimal_mass(const ExperimentConfig& cfg, ArtifactSink& sink) {
  RunResult res;
  const Grid grid = cfg.sim.grid;
  const double width = cfg.initial.width;
  auto family = [&](double m) { return gaussian_bump(grid, m, width); };
  MinimalMassEstimate est = estimate_minimal_mass(
      family, cfg.bracket_lo, cfg.bracket_hi, cfg.n_bisect, cfg.sim,
      "gaussian(width=" + fmt_double(width) + ")");
  json j;
  j["family"] = est.family;
  j["m_lo"] = est.m_lo;
  j["m_hi"] = est.m_hi;
  j["n_bisect"] = cfg.n_bisect;
  json probes = json::array();
  for (const auto& p : est.probes) probes.push_back({{"mass", p.mass}, {"verdict", p.verdict}});
  j["probes"] = probes;
  sink.write_json("minimal_mass.json", j);
  return res;
}

inline RunResult run_nonlinear_check(const ExperimentConfig& cfg, ArtifactSink& sink) {
  RunResult res;
  Decomposition dec;
  dec.grid = cfg.sim.grid;
  dec.alpha = cfg.sim.alpha;
  dec.components = build_components(cfg.sim.grid, cfg.components);
  dec.remainder = Field::zeros(cfg.sim.grid);
  NonlinearCheckReport rep = nonlinear_decomposition_check(dec, cfg.sim, cfg.check_window);
  json j;
  j["applicable"] = rep.applicable;
  j["inapplicable_reason"] = rep.inapplicable_reason;
  j["e_ct_l2"] = rep.e_ct_l2;
  j["e_lqlr"] = rep.e_lqlr;
  j["triple_norm"] = rep.triple_norm;
  j["beta"] = rep.beta;
  j["u_mass"] = rep.u_mass;
  j["e_history"] = rep.e_history;
  sink.write_json("nonlinear_check.json", j);
  if (!rep.applicable) res.events.push_back("check-inapplicable: " + rep.inapplicable_reason);
  return res;
}

}  // namespace detail

// Execute a parsed experiment; artifacts land in out_dir (override via the
// second argument). Exit code 0 on clean completion, 2 when events were
// recorded; I/O and config errors throw.
inline RunResult run_experiment(const ExperimentConfig& cfg,
                                std::optional<std::filesystem::path> out_override = {}) {
  detail::ArtifactSink sink(out_override.value_or(cfg.out_dir), cfg);
  RunResult res;
  switch (cfg.kind) {
    case ExperimentKind::kEvolve: res = detail::run_evolve(cfg, sink); break;
    case ExperimentKind::kDecompose: res = detail::run_decompose(cfg, sink); break;
    case ExperimentKind::kWaveOperator: res = detail::run_wave_operator(cfg, sink); break;
    case ExperimentKind::kBlowupScan: res = detail::run_blowup_scan(cfg, sink); break;
    case ExperimentKind::kMinimalMass: res = detail::run_minimal_mass(cfg, sink); break;
    case ExperimentKind::kNonlinearCheck: res = detail::run_nonlinear_check(cfg, sink); break;
  }
  sink.finalize(res.events);
  res.exit_code = res.events.empty() ? 0 : 2;
  return res;
}

// Re-hash the config echo and every listed artifact of a finished run.
inline bool verify_run(const std::filesystem::path& dir, std::string* report = nullptr) {
  using nlohmann::json;
  std::ostringstream out;
  bool ok = true;
  std::ifstream mf(dir / "manifest.json");
  if (!mf) {
    if (report) *report = "manifest.json not found in " + dir.string();
    return false;
  }
  json manifest = json::parse(mf);
  const std::string declared = manifest.at("config_hash");
  const std::string echoed = manifest.at("config_echo");
  const std::string recomputed = hash_hex(fnv1a64(echoed));
  if (recomputed != declared) {
    ok = false;
    out << "config hash mismatch: declared " << declared << ", recomputed " << recomputed
        << "\n";
  } else {
    out << "config hash ok (" << declared << ")\n";
  }
  for (const auto& a : manifest.at("artifacts")) {
    const std::string name = a.at("path");
    const std::string declared_hash = a.at("fnv1a64");
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) {
      ok = false;
      out << "missing artifact: " << name << "\n";
      continue;
    }
    const std::string h = hash_hex(hash_file(path));
    if (h != declared_hash) {
      ok = false;
      out << "artifact hash mismatch: " << name << "\n";
      continue;
    }
    if (path.extension() == ".frsh") read_snapshot(path);  // must reload cleanly
    out << "ok: " << name << "\n";
  }
  if (report) *report = out.str();
  return ok;
}

}  // namespace frsh
