#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "frsh/experiment.hpp"
#include "oracles.hpp"

using namespace frsh;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("frsh_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kEvolveCfg = R"(
kind = evolve
[grid]
d = 2
N = 32
L = 8.0
[sim]
alpha = 1.8
lambda = -1
dt = 0.01
t_end = 0.05
[initial]
kind = gaussian
mass = 0.4
width = 1.2
[output]
snapshot_every = 2
[rng]
seed = 42
)";

}  // namespace

TEST_CASE("config parsing") {
  SECTION("minimal evolve config parses with documented defaults") {
    ExperimentConfig cfg = parse_config_text(kEvolveCfg);
    CHECK(cfg.kind == ExperimentKind::kEvolve);
    CHECK(cfg.sim.grid.n == 32);
    CHECK(cfg.sim.dealias == true);            // default
    CHECK(cfg.extraction.rho_perp == 16.0);    // default
    CHECK(cfg.extraction.t_sep == 10.0);       // default
    CHECK(cfg.seed == 42);
    CHECK(!cfg.config_hash.empty());
  }

  SECTION("alpha outside the admissible interval names the range") {
    std::string text = kEvolveCfg;
    text.replace(text.find("alpha = 1.8"), 11, "alpha = 2.5");
    try {
      parse_config_text(text);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("sim.alpha") != std::string::npos);
      CHECK(msg.find("(2d/(2d-1), 2]") != std::string::npos);
    }
  }

  SECTION("duplicate keys are named") {
    std::string text = std::string(kEvolveCfg) + "\n[sim]\ndt = 0.02\n";
    // reopening [sim] and redefining dt
    try {
      parse_config_text(text);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("sim.dt") != std::string::npos);
    }
  }

  SECTION("unknown kind is rejected with the accepted list") {
    std::string text = kEvolveCfg;
    text.replace(text.find("kind = evolve"), 13, "kind = explode");
    CHECK_THROWS_AS(parse_config_text(text), ConfigError);
  }

  SECTION("kind-specific required sections") {
    CHECK_THROWS_AS(parse_config_text("kind = wave-operator\n[grid]\nN = 32\nL = 8\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text("kind = nonlinear-check\n[grid]\nN = 32\nL = 8\n"),
                    ConfigError);
  }
}

TEST_CASE("snapshot round trip is bit exact") {
  Grid g = Grid::make(2, 32, 8.0);
  CounterRng rng(77);
  Field f{g, CVec(g.size())};
  for (auto& v : f.values) v = Complex{rng.next_normal(), rng.next_normal()};
  fs::path dir = fresh_dir("snap");
  fs::create_directories(dir);
  write_snapshot(dir / "a.frsh", f, 1.8);
  Snapshot s = read_snapshot(dir / "a.frsh");
  CHECK(s.alpha == 1.8);
  CHECK(s.field.grid == g);
  REQUIRE(s.field.values.size() == f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    CHECK(s.field.values[i].real() == f.values[i].real());
    CHECK(s.field.values[i].imag() == f.values[i].imag());
  }
  // writing the reload reproduces the file byte for byte
  write_snapshot(dir / "b.frsh", s.field, s.alpha);
  CHECK(slurp(dir / "a.frsh") == slurp(dir / "b.frsh"));
  fs::remove_all(dir);
}

TEST_CASE("evolve experiment produces artifacts and byte-identical reruns") {
  ExperimentConfig cfg = parse_config_text(kEvolveCfg);
  fs::path d1 = fresh_dir("run1");
  fs::path d2 = fresh_dir("run2");
  RunResult r1 = run_experiment(cfg, d1);
  RunResult r2 = run_experiment(cfg, d2);
  CHECK(r1.exit_code == 0);

  SECTION("manifest, trajectory and snapshots exist") {
    CHECK(fs::exists(d1 / "manifest.json"));
    CHECK(fs::exists(d1 / "trajectory.csv"));
    CHECK(fs::exists(d1 / "snap_000000.frsh"));
  }

  SECTION("rerun with the same config and seed is byte-identical") {
    CHECK(slurp(d1 / "trajectory.csv") == slurp(d2 / "trajectory.csv"));
    for (const auto& entry : fs::directory_iterator(d1)) {
      if (entry.path().extension() != ".frsh") continue;
      CHECK(slurp(entry.path()) == slurp(d2 / entry.path().filename()));
    }
  }

  SECTION("trajectory carries the config hash") {
    const std::string csv = slurp(d1 / "trajectory.csv");
    CHECK(csv.find("# config_hash=" + cfg.config_hash) != std::string::npos);
  }

  SECTION("verify accepts the run and catches tampering") {
    std::string report;
    CHECK(verify_run(d1, &report));
    std::ofstream(d1 / "trajectory.csv", std::ios::app) << "tamper\n";
    CHECK(!verify_run(d1, &report));
    CHECK(report.find("trajectory.csv") != std::string::npos);
  }

  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("decompose experiment round-trips through the file layer") {
  // synthesize a mixture via the [profiles] section, decompose it, and check
  // the component count in the report
  const char* cfg_text = R"(
kind = decompose
[grid]
d = 2
N = 128
L = 16.0
[sim]
alpha = 1.8
[extraction]
delta_frac = 0.02
[profiles]
components = band:0, mass:1.0, t:-10 ; band:0, mass:1.0, t:10
[rng]
seed = 7
)";
  ExperimentConfig cfg = parse_config_text(cfg_text);
  REQUIRE(cfg.components.size() == 2);
  fs::path dir = fresh_dir("dec");
  RunResult res = run_experiment(cfg, dir);
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "decomposition.json"));
  CHECK(fs::exists(dir / "mixture.frsh"));
  const std::string j = slurp(dir / "decomposition.json");
  CHECK(j.find("\"component_count\": 2") != std::string::npos);

  SECTION("decompose again from the emitted snapshot file") {
    std::string text = R"(
kind = decompose
[grid]
d = 2
N = 128
L = 16.0
[sim]
alpha = 1.8
[extraction]
delta_frac = 0.02
[input]
files = )" + (dir / "mixture.frsh").string() + "\n";
    ExperimentConfig cfg2 = parse_config_text(text);
    fs::path dir2 = fresh_dir("dec2");
    RunResult res2 = run_experiment(cfg2, dir2);
    CHECK(res2.exit_code == 0);
    const std::string j2 = slurp(dir2 / "decomposition.json");
    CHECK(j2.find("\"component_count\": 2") != std::string::npos);
    fs::remove_all(dir2);
  }
  fs::remove_all(dir);
}

TEST_CASE("wave-operator experiment writes its report") {
  const char* cfg_text = R"(
kind = wave-operator
[grid]
d = 2
N = 32
L = 8.0
[sim]
alpha = 1.8
lambda = 1
dt = 0.05
monitor_mass_leak = false
[initial]
mass = 1e-4
width = 1.5
[wave]
T = 1.0
t_end = 2.0
tol = 1e-10
)";
  ExperimentConfig cfg = parse_config_text(cfg_text);
  fs::path dir = fresh_dir("wave");
  RunResult res = run_experiment(cfg, dir);
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir / "wave_operator.json"));
  const std::string j = slurp(dir / "wave_operator.json");
  CHECK(j.find("residual") != std::string::npos);
  fs::remove_all(dir);
}
