// Command-line driver for the intermittent-map experiments.
//
//   intermittent <experiment> [--config FILE] [--out DIR] [--seed N] [--workers N]
//                             [--M N] [--alpha A] [--set section.key=value ...]
//
// Settings are resolved as defaults, then the config file, then
// INTERMITTENT_<SECTION>_<KEY> environment variables, then flags.
// Exit status: 0 all checks pass, 1 a check failed, 2 configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "intermittent/acceptance.hpp"
#include "intermittent/config.hpp"
#include "intermittent/experiments.hpp"

namespace {

using namespace intermittent;

constexpr int kExitConfig = 2;

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<long long> seed;
  std::optional<int> workers;
  std::optional<int> m_total;
  std::optional<std::string> alpha;
  std::optional<std::string> psi;
  std::optional<std::string> scheme;
  std::optional<std::string> suite;
  std::vector<std::string> sets;
  bool dump_config = false;
};

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) apply_config_file(cfg, f.config);
  apply_environment(cfg);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.out) set_config_value(cfg, "run.out", *f.out);
  if (f.seed) set_config_value(cfg, "run.seed", std::to_string(*f.seed));
  if (f.workers) set_config_value(cfg, "run.workers", std::to_string(*f.workers));
  if (f.m_total) set_config_value(cfg, "grid.M", std::to_string(*f.m_total));
  if (f.alpha) set_config_value(cfg, "map.alpha", *f.alpha);
  if (f.psi) set_config_value(cfg, "response.psi", *f.psi);
  if (f.scheme) set_config_value(cfg, "response.scheme", *f.scheme);
  if (f.suite) set_config_value(cfg, "run.suite", *f.suite);
  return cfg;
}

int run_acceptance_command(const ExperimentConfig& cfg) {
  AcceptanceOptions opts;
  opts.selector = cfg.suite;
  opts.seed = cfg.seed;
  opts.workers = cfg.workers;
  std::vector<CriterionResult> results;
  try {
    results = run_acceptance(opts, [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; });
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid suite selector: ") + e.what());
  }
  const auto dir = std::filesystem::path(cfg.out) / "acceptance";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "acceptance.csv", std::ios::binary) << [&] {
    std::ostringstream os;
    write_acceptance_csv(os, results);
    return os.str();
  }();
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  bool ok = true;
  for (const auto& r : results) {
    if (!r.skipped && !r.pass) {
      ok = false;
      failures.push_back({{"id", r.id}, {"detail", r.detail}});
    }
  }
  std::ofstream(dir / "failures.json", std::ios::binary) << failures.dump(2) << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for a family of intermittent circle maps"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "sectioned key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output directory");
  app.add_option("--seed", f.seed, "random seed");
  app.add_option("--workers", f.workers, "worker threads");
  app.add_option("--M", f.m_total, "total number of grid cells");
  app.add_option("--alpha", f.alpha, "map parameter in [0,1)");
  app.add_option("--set", f.sets, "override any key, e.g. --set decay.n_max=500");
  app.add_flag("--dump-config", f.dump_config, "print the effective configuration and exit");
  app.fallthrough();

  const std::vector<std::pair<std::string, std::string>> kinds{
      {"density", "invariant density on the nonuniform grid"},
      {"response", "linear response formula against finite differences"},
      {"decay", "decay of correlations and exponent fit"},
      {"cones", "cone calibration and invariance harness"},
      {"kernel", "kernel positivity and contraction of the perturbed operator"},
      {"solenoid", "solenoid invariants, SRB expectations and stability"},
      {"acceptance", "acceptance criteria A1 to A11"},
  };
  for (const auto& [name, help] : kinds) {
    auto* sub = app.add_subcommand(name, help);
    if (name == "response") {
      sub->add_option("--psi", f.psi, "observable: cos, cos_mirrored or one");
      sub->add_option("--scheme", f.scheme, "source term: flux or product");
    }
    if (name == "acceptance") sub->add_option("--suite", f.suite, "all, fast or a list such as A1,A3");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    const ExperimentConfig cfg = resolve(f);
    if (f.dump_config) {
      write_config(std::cout, cfg, true);
      return 0;
    }
    if (kind == "acceptance") return run_acceptance_command(cfg);
    const auto outcome = run_experiment(kind, cfg);
    for (const auto& a : outcome.assertions) {
      std::cout << (a.pass ? "PASS " : "FAIL ") << a.id << " value=" << a.value << " threshold=" << a.threshold
                << (a.detail.empty() ? "" : " (" + a.detail + ")") << "\n";
    }
    std::cout << "artifacts in " << (std::filesystem::path(cfg.out) / kind).string() << "\n";
    return outcome.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
