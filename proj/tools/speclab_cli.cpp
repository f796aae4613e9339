// speclab command-line driver: runs one named experiment from a JSON config
// (flags override config keys) and writes CSV rows, a JSON summary and a run
// manifest into the output directory.
//
// Exit codes: 0 all assertions passed, 1 an assertion failed (the failing
// name is printed), 2 config/schema error (the failing key is printed).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "speclab/experiments.hpp"
#include "speclab/io.hpp"

namespace {

struct GlobalFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  int grid = 0;
  double kA = 0.0;
  int kM = 0;
};

void add_globals(CLI::App* cmd, GlobalFlags& g) {
  cmd->add_option("--config", g.config_path, "JSON config file");
  cmd->add_option("--out", g.out_dir, "output directory");
  cmd->add_option("--seed", g.seed, "base seed")->each([&g](const std::string&) {
    g.seed_set = true;
  });
  cmd->add_option("--threads", g.threads, "worker threads (0 = hardware)");
  cmd->add_option("--grid", g.grid, "estimation grid cells");
  cmd->add_option("--kA", g.kA, "k-range half width A");
  cmd->add_option("--kM", g.kM, "k-grid size M");
}

int run(const std::string& experiment, const GlobalFlags& g) {
  speclab::json config;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) {
      std::cerr << "config error: cannot open " << g.config_path << "\n";
      return 2;
    }
    try {
      in >> config;
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }
  config["experiment"] = experiment;
  if (g.seed_set) config["seed"] = g.seed;
  if (g.threads > 0) config["threads"] = g.threads;
  if (g.grid > 0) config["grid_cells"] = g.grid;
  if (g.kA > 0.0) config["A"] = g.kA;
  if (g.kM > 0) config["M"] = g.kM;

  speclab::ExperimentOutput out;
  try {
    out = speclab::run_experiment(config);
  } catch (const speclab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }

  namespace fs = std::filesystem;
  const fs::path dir(g.out_dir);
  fs::create_directories(dir);
  for (const auto& [name, content] : out.files)
    speclab::write_text_file(dir / name, content);
  const std::uint64_t seed =
      config.contains("seed") ? config["seed"].get<std::uint64_t>() : 1;
  speclab::json manifest = speclab::run_manifest(config, seed, experiment);
  manifest["summary"] = out.summary;
  speclab::json checks = speclab::json::array();
  for (const auto& [name, ok] : out.assertions)
    checks.push_back({{"name", name}, {"pass", ok}});
  manifest["assertions"] = checks;
  speclab::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  for (const auto& [name, ok] : out.assertions)
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
  std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
  if (!out.all_passed()) {
    std::cerr << "assertion failed: " << out.first_failure() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "speclab: spectral experiments for torus evolution equations with "
      "rough time-dependent potentials"};
  app.require_subcommand(1);

  const std::vector<std::string> experiments = {
      "evolve", "sweep",  "theorem11", "lemma22",   "oscillatory",
      "wkb",    "diadic", "growth",    "variation", "fuzz-appendix"};

  std::vector<GlobalFlags> flags(experiments.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(experiments[i]);
    add_globals(cmd, flags[i]);
    cmds.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);
  for (std::size_t i = 0; i < experiments.size(); ++i)
    if (cmds[i]->parsed()) return run(experiments[i], flags[i]);
  return 2;
}
