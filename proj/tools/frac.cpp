// frac: pseudo-spectral experiments for the mass-critical fractional
// Hartree equation with radial data. See README.md and configs/ for usage.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "frsh/experiment.hpp"
#include "frsh/synth.hpp"
#include "frsh/version.hpp"

namespace {

int run_kind(const std::string& kind, const std::string& config_path,
             const std::optional<std::string>& out_dir,
             const std::optional<std::uint64_t>& seed) {
  try {
    frsh::ExperimentConfig cfg = frsh::parse_config(config_path);
    if (frsh::parse_kind(kind) != cfg.kind) {
      std::cerr << "frac: config declares kind '" << frsh::kind_name(cfg.kind)
                << "' but subcommand is '" << kind << "'\n";
      return 1;
    }
    if (seed) cfg.seed = *seed;
    std::optional<std::filesystem::path> out;
    if (out_dir) out = *out_dir;
    frsh::RunResult res = frsh::run_experiment(cfg, out);
    for (const auto& e : res.events) std::cerr << "frac: event: " << e << "\n";
    return res.exit_code;
  } catch (const frsh::Error& e) {
    std::cerr << "frac: error: " << e.what() << "\n";
    return 1;
  }
}

int run_synth(const std::string& profiles_path, const std::optional<std::string>& out_dir) {
  using nlohmann::json;
  try {
    std::ifstream in(profiles_path);
    if (!in) {
      std::cerr << "frac: cannot open " << profiles_path << "\n";
      return 1;
    }
    json spec = json::parse(in);
    const auto& jg = spec.at("grid");
    frsh::Grid grid = frsh::Grid::make(jg.value("d", 2), jg.at("N").get<int>(),
                                       jg.at("L").get<double>());
    const double alpha = spec.at("alpha").get<double>();
    std::vector<frsh::ComponentSpec> comps;
    for (const auto& jc : spec.at("components")) {
      frsh::ComponentSpec c;
      c.band = jc.value("band", 0);
      c.mass = jc.value("mass", 1.0);
      c.t = jc.value("t", 0.0);
      c.center = jc.value("center", 1.0);
      c.width = jc.value("width", 0.55);
      comps.push_back(c);
    }
    std::filesystem::path dir = out_dir.value_or("synth_out");
    std::filesystem::create_directories(dir);
    frsh::Field mix = frsh::synthesize_mixture(grid, alpha, comps);
    frsh::write_snapshot(dir / "mixture.frsh", mix, alpha);
    json manifest;
    manifest["tool"] = "frac synth";
    manifest["version"] = frsh::kVersion;
    manifest["component_count"] = comps.size();
    manifest["alpha"] = alpha;
    manifest["grid"] = {{"d", grid.dim}, {"N", grid.n}, {"L", grid.half_width}};
    manifest["components"] = spec.at("components");
    manifest["mixture"] = "mixture.frsh";
    std::ofstream mf(dir / "synth_manifest.json");
    mf << manifest.dump(2) << "\n";
    std::cout << "frac: wrote " << (dir / "mixture.frsh").string() << " ("
              << comps.size() << " components)\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "frac: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral fractional Hartree toolkit"};
  app.set_version_flag("--version", std::string("frac ") + frsh::kVersion);
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {"evolve",      "decompose",    "wave-operator",
                                          "blowup-scan", "minimal-mass", "nonlinear-check"};
  struct KindArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool has_out = false;
    bool has_seed = false;
  };
  std::map<std::string, std::shared_ptr<KindArgs>> args;
  for (const auto& k : kinds) {
    auto a = std::make_shared<KindArgs>();
    args[k] = a;
    CLI::App* sub = app.add_subcommand(k, "run a " + k + " experiment");
    sub->add_option("--config", a->config, "experiment config file")->required();
    sub->add_option("--out", a->out, "output directory (overrides [output] dir)")
        ->each([a](const std::string&) { a->has_out = true; });
    sub->add_option("--seed", a->seed, "RNG seed (overrides [rng] seed)")
        ->each([a](const std::string&) { a->has_seed = true; });
  }

  std::string verify_dir;
  CLI::App* verify = app.add_subcommand("verify", "re-hash a finished run's artifacts");
  verify->add_option("dir", verify_dir, "run directory containing manifest.json")->required();

  std::string profiles_path, synth_out;
  bool synth_has_out = false;
  CLI::App* synth = app.add_subcommand("synth", "build a synthetic profile mixture");
  synth->add_option("--profiles", profiles_path, "JSON mixture description")->required();
  synth->add_option("--out", synth_out, "output directory")
      ->each([&](const std::string&) { synth_has_out = true; });

  CLI11_PARSE(app, argc, argv);

  for (const auto& k : kinds) {
    if (app.get_subcommand(k)->parsed()) {
      const auto& a = *args[k];
      return run_kind(k, a.config,
                      a.has_out ? std::optional<std::string>(a.out) : std::nullopt,
                      a.has_seed ? std::optional<std::uint64_t>(a.seed) : std::nullopt);
    }
  }
  if (verify->parsed()) {
    try {
      std::string report;
      const bool ok = frsh::verify_run(verify_dir, &report);
      std::cout << report;
      std::cout << (ok ? "verify: OK\n" : "verify: FAILED\n");
      return ok ? 0 : 1;
    } catch (const std::exception& e) {
      std::cerr << "frac: error: " << e.what() << "\n";
      return 1;
    }
  }
  if (synth->parsed())
    return run_synth(profiles_path,
                     synth_has_out ? std::optional<std::string>(synth_out) : std::nullopt);
  return 1;
}
