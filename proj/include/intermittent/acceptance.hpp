#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace intermittent {

struct CriterionResult {
  std::string id;
  bool pass = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// "all", "fast" (orbit-length 1e7 solenoid runs replaced by shorter
  /// ones, the stability table skipped), or a comma list such as "A1,A3".
  std::string selector = "all";
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Criterion identifiers A1..A11 in order.
const std::vector<std::string>& criterion_ids();

/// Runs the selected criteria. `on_result` is called after each one.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opts,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS A3 ...", "FAIL A4 ..." or "SKIP ..." for one result.
std::string format_result(const CriterionResult& r);

/// CSV with header id,status,detail (no timings, so reruns are byte-identical).
void write_acceptance_csv(std::ostream& os, const std::vector<CriterionResult>& results);

}  // namespace intermittent
