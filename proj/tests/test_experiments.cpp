#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "intermittent/acceptance.hpp"
#include "intermittent/experiments.hpp"
#include "intermittent/svg.hpp"

using namespace intermittent;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("intermittent_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("log-log slope of a pure power density") {
  const auto g = std::make_shared<const NonuniformGrid>(NonuniformGrid::build(4096, 0.7, 30));
  const auto h = project([](double x) { return std::pow(x, -0.4) + std::pow(1 - x, -0.4); }, g);
  CHECK(density_loglog_slope(h, 1e-6, 1e-4, false) == doctest::Approx(-0.4).epsilon(1e-2));
  CHECK(density_loglog_slope(h, 1e-6, 1e-4, true) == doctest::Approx(-0.4).epsilon(1e-2));
  CHECK_THROWS(density_loglog_slope(h, 0.3, 0.3 + 1e-7));
}

TEST_CASE("partition slope of a pure power sequence") {
  std::vector<double> z;
  for (int n = 0; n <= 1000; ++n) z.push_back(n == 0 ? 1.0 : 5.0 * std::pow(n, -2.0));
  CHECK(partition_slope(z, 10, 1000) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("density experiment at alpha = 0 passes and writes its artifacts") {
  ExperimentConfig c;
  c.alpha = 0.0;
  c.m_total = 1024;
  c.out = scratch_dir("density").string();
  const auto r = run_experiment("density", c);
  CHECK(r.exit_code() == 0);
  for (const char* f : {"density.csv", "density.svg", "summary.json", "failures.json", "config.conf"}) {
    CHECK(fs::exists(fs::path(c.out) / "density" / f));
  }
  CHECK(slurp(fs::path(c.out) / "density" / "failures.json") == "[]\n");
  CHECK(r.summary_json.find("\"sup_abs_h_minus_1\"") != std::string::npos);
}

TEST_CASE("kernel experiment artifacts are byte-identical across runs") {
  ExperimentConfig c;
  c.alpha = 0.3;
  c.kernel_m_total = 256;
  c.kernel_trials = 4;
  const auto dir_a = scratch_dir("kernel_a"), dir_b = scratch_dir("kernel_b");
  c.out = dir_a.string();
  const auto a = run_experiment("kernel", c);
  c.out = dir_b.string();
  const auto b = run_experiment("kernel", c);
  CHECK(a.artifacts == b.artifacts);
  for (const auto& f : a.artifacts) {
    if (f == "config.conf") continue;  // records the output directory
    CHECK_MESSAGE(slurp(dir_a / "kernel" / f) == slurp(dir_b / "kernel" / f), f);
  }
}

TEST_CASE("failed assertions give exit code 1 and a failure list") {
  ExperimentConfig c;
  c.alpha = 0.3;
  c.kernel_m_total = 256;
  c.kernel_eps = 1e-3;
  c.kernel_cap = 2;  // far too few steps for a positive kernel
  c.out = scratch_dir("kernel_fail").string();
  const auto r = run_experiment("kernel", c);
  CHECK(r.exit_code() == 1);
  CHECK(slurp(fs::path(c.out) / "kernel" / "failures.json").find("kernel.positive") != std::string::npos);
}

TEST_CASE("unknown experiment kinds are configuration errors") {
  ExperimentConfig c;
  CHECK_THROWS_AS(run_experiment("bogus", c), ConfigError);
}

TEST_CASE("svg plot has one polyline and skips nonpositive points on log axes") {
  std::ostringstream os;
  write_line_svg(os, {"t", "x", "y", true, true}, {1, 10, 100, 0}, {1, 0.1, -1, 5});
  const auto s = os.str();
  CHECK(s.find("<svg") == 0);
  CHECK(s.find("<polyline") != std::string::npos);
  CHECK(s.find("<polyline", s.find("<polyline") + 1) == std::string::npos);
}

TEST_CASE("acceptance selector") {
  CHECK(criterion_ids().size() == 11);
  CHECK(criterion_ids().front() == "A1");
  CHECK(criterion_ids().back() == "A11");
  AcceptanceOptions o;
  o.selector = "A3,A7";
  const auto r = run_acceptance(o);
  REQUIRE(r.size() == 11);
  CHECK(r[2].pass);
  CHECK(r[6].pass);
  CHECK(r[0].skipped);
  CHECK(format_result(r[2]).rfind("PASS A3", 0) == 0);
  o.selector = "A12";
  CHECK_THROWS(run_acceptance(o));
}
