#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "intermittent/config.hpp"
#include "intermittent/discretization.hpp"
#include "intermittent/svg.hpp"

namespace intermittent {

/// One configured check of an experiment run.
struct Assertion {
  std::string id;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct RunOutcome {
  std::string experiment;
  std::vector<Assertion> assertions;
  /// Summary record written as summary.json.
  std::string summary_json;
  /// Files written under the output directory, in write order.
  std::vector<std::string> artifacts;

  bool passed() const;
  /// 0 when every assertion holds, 1 otherwise.
  int exit_code() const;
};

/// Writes the run artifacts of one experiment into a directory. Every file
/// has a single writer and is written once.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::string>& written() const { return written_; }

  /// Opens `name` for writing and passes the stream to `fill`.
  template <class Fill>
  void file(const std::string& name, Fill&& fill);
  void svg(const std::string& name, const PlotSpec& spec, const std::vector<double>& xs,
           const std::vector<double>& ys);
  void text(const std::string& name, const std::string& content);

 private:
  std::ofstream open(const std::string& name);

  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

/// Slope of log h against log distance to the neutral point, over the cells
/// whose center lies at distance in [lo, hi] on the chosen side.
double density_loglog_slope(const GridDensity& h, double lo, double hi, bool near_one = false);

/// Slope of log z_n against log n over n in [n_lo, n_hi] (z[n] is the n-th term).
double partition_slope(const std::vector<double>& z, int n_lo, int n_hi);

/// Runs one experiment kind (density, response, decay, cones, kernel,
/// solenoid) and writes its artifacts to cfg.out. Throws ConfigError for
/// unknown kinds.
RunOutcome run_experiment(const std::string& kind, const ExperimentConfig& cfg);

RunOutcome run_density(const ExperimentConfig& cfg);
RunOutcome run_response(const ExperimentConfig& cfg);
RunOutcome run_decay(const ExperimentConfig& cfg);
RunOutcome run_cones(const ExperimentConfig& cfg);
RunOutcome run_kernel(const ExperimentConfig& cfg);
RunOutcome run_solenoid(const ExperimentConfig& cfg);

template <class Fill>
void ArtifactWriter::file(const std::string& name, Fill&& fill) {
  auto os = open(name);
  fill(os);
}

}  // namespace intermittent
