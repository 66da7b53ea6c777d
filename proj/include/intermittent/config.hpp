#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "intermittent/response.hpp"
#include "intermittent/solenoid.hpp"
#include "intermittent/transfer_op.hpp"

namespace intermittent {

/// Malformed, unknown or out-of-range configuration. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Environment variables INTERMITTENT_<SECTION>_<KEY> (upper case) override
/// file values; command-line flags override both.
inline constexpr const char* kEnvPrefix = "INTERMITTENT_";

struct ExperimentConfig {
  // [map]
  double alpha = 0.2;
  // [grid]
  int m_total = 1 << 14;
  double refinement_ratio = 0.7;
  int n_geometric = 40;
  // [solver]
  DensitySolverConfig solver;
  // [response]
  std::string psi = "cos";
  SourceScheme scheme = SourceScheme::kFlux;
  std::vector<double> fd_steps{1e-2, 5e-3, 2.5e-3};
  NeumannConfig neumann;
  double response_tol_rel = 0.05;
  double response_tol_abs = 1e-3;
  // [decay]
  int decay_n_max = 2000;
  int decay_window_lo = 50;
  int decay_window_hi = 2000;
  std::string decay_phi = "density";
  std::string decay_psi = "cos";
  double decay_tolerance = 0.25;
  bool decay_loglog = false;
  // [cones]
  int cone_trials = 100;
  int cone_m_total = 4096;
  double cone_delta = 0.05;
  double cone_floor_delta = 0.1;
  int cone_iterates = 200;
  // [kernel]
  double kernel_eps = 1.0 / 64.0;
  int kernel_m_total = 1024;
  int kernel_n_geometric = 20;
  int kernel_cap = 0;
  int kernel_steps = 5;
  int kernel_trials = 20;
  // [solenoid]
  BirkhoffConfig birkhoff;
  LiftConfig lift;
  std::vector<double> stability_alphas{0.25, 0.22, 0.21};
  double stability_alpha0 = 0.2;
  // [run]
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "out";
  std::string suite = "all";

  /// Grid built from the [grid] section.
  GridPtr grid() const;
  ResponseConfig response_config() const;
};

struct ConfigKey {
  std::string section;
  std::string key;
  std::string type;
  std::string doc;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;

  std::string qualified() const { return section + "." + key; }
  std::string env_name() const;
};

/// Every accepted key; anything else is rejected.
const std::vector<ConfigKey>& config_schema();

/// Applies `section.key = value`; throws ConfigError naming the key when it
/// is unknown or the value does not parse.
void set_config_value(ExperimentConfig& cfg, const std::string& qualified_key,
                      const std::string& value);

/// Parses the sectioned key-value format:
///   # comment
///   [section]
///   key = value
/// `origin` names the source in error messages.
void apply_config_text(ExperimentConfig& cfg, std::istream& is, const std::string& origin);
void apply_config_file(ExperimentConfig& cfg, const std::string& path);
/// Applies INTERMITTENT_<SECTION>_<KEY> variables found in the environment.
void apply_environment(ExperimentConfig& cfg);

/// Effective configuration in the same format, every key listed; with
/// `documented`, each key is preceded by a comment giving its type and meaning.
void write_config(std::ostream& os, const ExperimentConfig& cfg, bool documented = false);

/// cos, cos_mirrored or one.
Observable observable_by_name(const std::string& name);

}  // namespace intermittent
