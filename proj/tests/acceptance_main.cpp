// Acceptance suite: one PASS/FAIL line per criterion A1..A11.
// Usage: acceptance [all|fast|A1,A3,...] [workers]

#include <cstdlib>
#include <iostream>
#include <string>

#include "intermittent/acceptance.hpp"

int main(int argc, char** argv) {
  intermittent::AcceptanceOptions opts;
  if (argc > 1) opts.selector = argv[1];
  if (argc > 2) opts.workers = std::max(1, std::atoi(argv[2]));
  int failed = 0;
  try {
    intermittent::run_acceptance(opts, [&](const intermittent::CriterionResult& r) {
      std::cout << intermittent::format_result(r) << std::endl;
      if (!r.skipped && !r.pass) ++failed;
    });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all selected criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
