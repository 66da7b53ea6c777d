#include "intermittent/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "intermittent/csv.hpp"

namespace intermittent {

GridPtr ExperimentConfig::grid() const {
  return std::make_shared<const NonuniformGrid>(
      NonuniformGrid::build(m_total, refinement_ratio, n_geometric));
}

ResponseConfig ExperimentConfig::response_config() const {
  ResponseConfig rc;
  rc.m_total = m_total;
  rc.refinement_ratio = refinement_ratio;
  rc.n_geometric = n_geometric;
  rc.density = solver;
  rc.neumann = neumann;
  rc.scheme = scheme;
  rc.fd_steps = fd_steps;
  rc.workers = workers;
  return rc;
}

std::string ConfigKey::env_name() const {
  std::string s = std::string(kEnvPrefix) + section + "_" + key;
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(d)) throw ConfigError("not a number: '" + v + "'");
  return d;
}

long long parse_int(const std::string& v) {
  char* end = nullptr;
  const long long d = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') {
    // Accept integral values written in floating notation, e.g. 1e7.
    const double x = parse_double(v);
    if (x != std::floor(x) || std::abs(x) > 9e18) throw ConfigError("not an integer: '" + v + "'");
    return static_cast<long long>(x);
  }
  return d;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("not a boolean: '" + v + "'");
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  for (const auto& item : csv::split(v)) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

/// Shortest text that reads back to the same double.
std::string short_num(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string list_str(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + short_num(v[k]);
  return s;
}

std::string choice(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  std::string msg = "expected one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg + ", got '" + v + "'");
}

template <class T>
T positive(T v) {
  if (!(v > 0)) throw ConfigError("must be positive");
  return v;
}

// Helpers producing schema entries for common field types.
ConfigKey real_key(std::string sec, std::string key, std::string doc,
                   double ExperimentConfig::*field) {
  return {sec, key, "real", doc,
          [field](ExperimentConfig& c, const std::string& v) { c.*field = parse_double(v); },
          [field](const ExperimentConfig& c) { return short_num(c.*field); }};
}

ConfigKey int_key(std::string sec, std::string key, std::string doc, int ExperimentConfig::*field) {
  return {sec, key, "integer", doc,
          [field](ExperimentConfig& c, const std::string& v) {
            c.*field = static_cast<int>(parse_int(v));
          },
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

std::vector<ConfigKey> build_schema() {
  using C = ExperimentConfig;
  std::vector<ConfigKey> s;
  s.push_back({"map", "alpha", "real", "family parameter in [0,1)",
               [](C& c, const std::string& v) {
                 const double a = parse_double(v);
                 if (!(a >= 0.0 && a < 1.0)) throw ConfigError("alpha must lie in [0,1)");
                 c.alpha = a;
               },
               [](const C& c) { return short_num(c.alpha); }});

  s.push_back({"grid", "M", "integer", "total number of cells",
               [](C& c, const std::string& v) { c.m_total = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.m_total); }});
  s.push_back(real_key("grid", "ratio", "geometric refinement ratio in (0,1]", &C::refinement_ratio));
  s.push_back(int_key("grid", "n_geometric", "refined cells at each end", &C::n_geometric));

  s.push_back({"solver", "method", "direct|power", "invariant density solver",
               [](C& c, const std::string& v) {
                 c.solver.method = choice(v, {"direct", "power"}) == "direct" ? DensityMethod::kDirect
                                                                            : DensityMethod::kPower;
               },
               [](const C& c) {
                 return std::string(c.solver.method == DensityMethod::kDirect ? "direct" : "power");
               }});
  s.push_back({"solver", "tol_fix", "real", "L1 fixed-point tolerance",
               [](C& c, const std::string& v) { c.solver.tol_fix = positive(parse_double(v)); },
               [](const C& c) { return short_num(c.solver.tol_fix); }});
  s.push_back({"solver", "max_iter", "integer", "power-iteration cap",
               [](C& c, const std::string& v) { c.solver.max_iter = positive(parse_int(v)); },
               [](const C& c) { return std::to_string(c.solver.max_iter); }});

  s.push_back({"response", "psi", "cos|one|cos_mirrored", "observable",
               [](C& c, const std::string& v) { c.psi = choice(v, {"cos", "one", "cos_mirrored"}); },
               [](const C& c) { return c.psi; }});
  s.push_back({"response", "scheme", "flux|product", "source-term discretization",
               [](C& c, const std::string& v) {
                 c.scheme = choice(v, {"flux", "product"}) == "flux" ? SourceScheme::kFlux
                                                                    : SourceScheme::kProductRule;
               },
               [](const C& c) { return std::string(c.scheme == SourceScheme::kFlux ? "flux" : "product"); }});
  s.push_back({"response", "fd_steps", "real list", "finite-difference steps",
               [](C& c, const std::string& v) {
                 c.fd_steps = parse_list(v);
                 for (double e : c.fd_steps) positive(e);
               },
               [](const C& c) { return list_str(c.fd_steps); }});
  s.push_back({"response", "j_max", "integer", "Neumann series term cap",
               [](C& c, const std::string& v) { c.neumann.j_max = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.neumann.j_max); }});
  s.push_back({"response", "tol_tail_rel", "real", "relative tail tolerance",
               [](C& c, const std::string& v) { c.neumann.tol_tail_rel = positive(parse_double(v)); },
               [](const C& c) { return short_num(c.neumann.tol_tail_rel); }});
  s.push_back({"response", "tol_tail_abs", "real", "absolute tail tolerance",
               [](C& c, const std::string& v) { c.neumann.tol_tail_abs = positive(parse_double(v)); },
               [](const C& c) { return short_num(c.neumann.tol_tail_abs); }});
  s.push_back({"response", "fit_window", "integer", "terms used by the tail fit",
               [](C& c, const std::string& v) { c.neumann.fit_window = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.neumann.fit_window); }});
  s.push_back(real_key("response", "tolerance_rel", "agreement tolerance relative to |fd limit|",
                       &C::response_tol_rel));
  s.push_back(real_key("response", "tolerance_abs", "absolute agreement tolerance", &C::response_tol_abs));

  s.push_back(int_key("decay", "n_max", "number of operator iterates", &C::decay_n_max));
  s.push_back(int_key("decay", "window_lo", "first n of the fit window", &C::decay_window_lo));
  s.push_back(int_key("decay", "window_hi", "last n of the fit window", &C::decay_window_hi));
  s.push_back({"decay", "phi", "density|bump", "zero-mean function: h - 1 or a bump difference",
               [](C& c, const std::string& v) { c.decay_phi = choice(v, {"density", "bump"}); },
               [](const C& c) { return c.decay_phi; }});
  s.push_back({"decay", "psi", "cos|cos_mirrored", "observable",
               [](C& c, const std::string& v) { c.decay_psi = choice(v, {"cos", "cos_mirrored"}); },
               [](const C& c) { return c.decay_psi; }});
  s.push_back(real_key("decay", "tolerance", "allowed distance of the exponent from 1 - 1/alpha",
                       &C::decay_tolerance));
  s.push_back({"decay", "loglog", "boolean", "fit the log log n correction term",
               [](C& c, const std::string& v) { c.decay_loglog = parse_bool(v); },
               [](const C& c) { return std::string(c.decay_loglog ? "true" : "false"); }});

  s.push_back(int_key("cones", "trials", "random cone trials", &C::cone_trials));
  s.push_back(int_key("cones", "M", "cells of the grid used by the cone tests", &C::cone_m_total));
  s.push_back(real_key("cones", "delta", "neighbourhood of the second cone", &C::cone_delta));
  s.push_back(real_key("cones", "floor_delta", "delta of the lower floor check", &C::cone_floor_delta));
  s.push_back(int_key("cones", "iterates", "n range for inf L^n 1", &C::cone_iterates));

  s.push_back(real_key("kernel", "eps", "averaging radius", &C::kernel_eps));
  s.push_back(int_key("kernel", "M", "cells (dense kernel, keep <= 2048)", &C::kernel_m_total));
  s.push_back(int_key("kernel", "n_geometric", "refined cells at each end of the kernel grid",
                      &C::kernel_n_geometric));
  s.push_back(int_key("kernel", "cap", "largest n scanned; 0 means ceil(8 eps^-alpha)", &C::kernel_cap));
  s.push_back(int_key("kernel", "steps", "powers k of P checked for contraction", &C::kernel_steps));
  s.push_back(int_key("kernel", "trials", "random zero-mean functions", &C::kernel_trials));

  s.push_back({"solenoid", "orbit_length", "integer", "total Birkhoff steps",
               [](C& c, const std::string& v) { c.birkhoff.orbit_length = positive(parse_int(v)); },
               [](const C& c) { return std::to_string(c.birkhoff.orbit_length); }});
  s.push_back({"solenoid", "burn_in", "integer", "discarded steps per stream",
               [](C& c, const std::string& v) { c.birkhoff.burn_in = parse_int(v); },
               [](const C& c) { return std::to_string(c.birkhoff.burn_in); }});
  s.push_back({"solenoid", "streams", "integer", "independent orbits",
               [](C& c, const std::string& v) { c.birkhoff.streams = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.birkhoff.streams); }});
  s.push_back({"solenoid", "batches", "integer", "batches per stream (standard error)",
               [](C& c, const std::string& v) { c.birkhoff.batches = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.birkhoff.batches); }});
  s.push_back({"solenoid", "x_bins", "integer", "base bins of the lift",
               [](C& c, const std::string& v) { c.lift.x_bins = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.lift.x_bins); }});
  s.push_back({"solenoid", "x_per_bin", "integer", "base points per bin",
               [](C& c, const std::string& v) { c.lift.x_per_bin = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.lift.x_per_bin); }});
  s.push_back({"solenoid", "n_fiber", "integer", "fiber samples per base point",
               [](C& c, const std::string& v) { c.lift.n_fiber = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.lift.n_fiber); }});
  s.push_back({"solenoid", "k_depth", "integer", "solenoid steps before taking envelopes",
               [](C& c, const std::string& v) { c.lift.k_depth = positive(static_cast<int>(parse_int(v))); },
               [](const C& c) { return std::to_string(c.lift.k_depth); }});
  s.push_back({"solenoid", "alphas", "real list", "sequence alpha_n of the stability experiment",
               [](C& c, const std::string& v) { c.stability_alphas = parse_list(v); },
               [](const C& c) { return list_str(c.stability_alphas); }});
  s.push_back(real_key("solenoid", "alpha0", "limit parameter of the stability experiment",
                       &C::stability_alpha0));

  s.push_back({"run", "seed", "integer", "random seed",
               [](C& c, const std::string& v) {
                 const long long x = parse_int(v);
                 if (x < 0) throw ConfigError("seed must be nonnegative");
                 c.seed = static_cast<std::uint64_t>(x);
                 c.birkhoff.seed = c.seed;
                 c.lift.seed = c.seed;
               },
               [](const C& c) { return std::to_string(c.seed); }});
  s.push_back({"run", "workers", "integer", "worker threads",
               [](C& c, const std::string& v) {
                 c.workers = positive(static_cast<int>(parse_int(v)));
                 c.birkhoff.workers = c.workers;
               },
               [](const C& c) { return std::to_string(c.workers); }});
  s.push_back({"run", "out", "path", "output directory",
               [](C& c, const std::string& v) {
                 if (v.empty()) throw ConfigError("empty output directory");
                 c.out = v;
               },
               [](const C& c) { return c.out; }});
  s.push_back({"run", "suite", "all|fast|<ids>", "acceptance selector",
               [](C& c, const std::string& v) { c.suite = v; },
               [](const C& c) { return c.suite; }});
  return s;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = build_schema();
  return schema;
}

void set_config_value(ExperimentConfig& cfg, const std::string& qualified_key,
                      const std::string& value) {
  for (const auto& k : config_schema()) {
    if (k.qualified() == qualified_key) {
      try {
        k.set(cfg, value);
      } catch (const ConfigError& e) {
        throw ConfigError("invalid value for '" + qualified_key + "': " + e.what());
      }
      return;
    }
  }
  throw ConfigError("unknown key '" + qualified_key + "'");
}

void apply_config_text(ExperimentConfig& cfg, std::istream& is, const std::string& origin) {
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    try {
      set_config_value(cfg, section + "." + key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  apply_config_text(cfg, in, path);
}

void apply_environment(ExperimentConfig& cfg) {
  for (const auto& k : config_schema()) {
    if (const char* v = std::getenv(k.env_name().c_str())) {
      try {
        k.set(cfg, trim(v));
      } catch (const ConfigError& e) {
        throw ConfigError("invalid value for '" + k.qualified() + "' from " + k.env_name() + ": " +
                          e.what());
      }
    }
  }
}

void write_config(std::ostream& os, const ExperimentConfig& cfg, bool documented) {
  std::string section;
  for (const auto& k : config_schema()) {
    if (k.section != section) {
      if (!section.empty()) os << '\n';
      section = k.section;
      os << '[' << section << "]\n";
    }
    if (documented) os << "# " << k.doc << " (" << k.type << ", env " << k.env_name() << ")\n";
    os << k.key << " = " << k.get(cfg) << '\n';
  }
}

Observable observable_by_name(const std::string& name) {
  if (name == "cos") return Observable::cos2pi();
  if (name == "cos_mirrored") return Observable::cos2pi().mirrored();
  if (name == "one") return Observable::constant_one();
  throw ConfigError("unknown observable '" + name + "'");
}

}  // namespace intermittent
