#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "intermittent/config.hpp"

using namespace intermittent;

TEST_CASE("sectioned text is parsed with comments") {
  ExperimentConfig c;
  std::istringstream in(
      "# comment\n"
      "[map]\n"
      "alpha = 0.35  # trailing\n"
      "\n"
      "[grid]\n"
      "M = 2048\n"
      "[response]\n"
      "fd_steps = 0.02, 0.01\n"
      "scheme = product\n");
  apply_config_text(c, in, "test");
  CHECK(c.alpha == 0.35);
  CHECK(c.m_total == 2048);
  CHECK(c.fd_steps == std::vector<double>{0.02, 0.01});
  CHECK(c.scheme == SourceScheme::kProductRule);
}

TEST_CASE("unknown keys are rejected with the key named") {
  ExperimentConfig c;
  std::istringstream in("[map]\nalpah = 0.3\n");
  try {
    apply_config_text(c, in, "f.conf");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("map.alpah") != std::string::npos);
    CHECK(std::string(e.what()).find("f.conf:2") != std::string::npos);
  }
  CHECK_THROWS_AS(set_config_value(c, "nosection.key", "1"), ConfigError);
}

TEST_CASE("malformed lines and values") {
  ExperimentConfig c;
  std::istringstream a("alpha = 0.3\n");
  CHECK_THROWS_AS(apply_config_text(c, a, "x"), ConfigError);
  std::istringstream b("[map\n");
  CHECK_THROWS_AS(apply_config_text(c, b, "x"), ConfigError);
  std::istringstream d("[map]\nalpha\n");
  CHECK_THROWS_AS(apply_config_text(c, d, "x"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "map.alpha", "1.0"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "grid.M", "12x"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "grid.M", "-4"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "solver.method", "cg"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "decay.loglog", "maybe"), ConfigError);
  set_config_value(c, "solenoid.orbit_length", "1e6");
  CHECK(c.birkhoff.orbit_length == 1000000);
}

TEST_CASE("environment overrides file values") {
  ExperimentConfig c;
  std::istringstream in("[grid]\nM = 2048\n");
  apply_config_text(c, in, "x");
  setenv("INTERMITTENT_GRID_M", "512", 1);
  apply_environment(c);
  unsetenv("INTERMITTENT_GRID_M");
  CHECK(c.m_total == 512);
}

TEST_CASE("environment variable names") {
  for (const auto& k : config_schema()) {
    if (k.qualified() == "grid.n_geometric") CHECK(k.env_name() == "INTERMITTENT_GRID_N_GEOMETRIC");
  }
}

TEST_CASE("written configuration reads back to the same values") {
  ExperimentConfig c;
  c.alpha = 0.123456789;
  c.fd_steps = {1e-3, 3e-4};
  c.decay_loglog = true;
  c.seed = 77;
  std::ostringstream out;
  write_config(out, c, true);
  ExperimentConfig d;
  std::istringstream in(out.str());
  apply_config_text(d, in, "roundtrip");
  std::ostringstream again;
  write_config(again, d, true);
  CHECK(again.str() == out.str());
  CHECK(d.alpha == c.alpha);
  CHECK(d.birkhoff.seed == 77);
}

TEST_CASE("shipped default config lists every schema key once with default values") {
  const std::string path = std::string(INTERMITTENT_SOURCE_DIR) + "/config/default.conf";
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream text;
  text << f.rdbuf();
  ExperimentConfig c;
  std::istringstream in(text.str());
  apply_config_text(c, in, path);
  std::ostringstream a, b;
  write_config(a, c);
  write_config(b, ExperimentConfig{});
  CHECK(a.str() == b.str());

  std::set<std::string> seen;
  std::string section, line;
  std::istringstream lines(text.str());
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      section = line.substr(1, line.find(']') - 1);
      continue;
    }
    const auto key = section + "." + line.substr(0, line.find(' '));
    CHECK(seen.insert(key).second);
  }
  CHECK(seen.size() == config_schema().size());
}

TEST_CASE("observables by name") {
  CHECK(observable_by_name("one").fn(0.3) == 1.0);
  CHECK(observable_by_name("cos").fn(0.0) == 1.0);
  CHECK_THROWS_AS(observable_by_name("sin"), ConfigError);
}
