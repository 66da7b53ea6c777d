#include "intermittent/response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <Eigen/Core>
#include "json.hpp"

#include "intermittent/csv.hpp"
#include "intermittent/fit.hpp"

namespace intermittent {

namespace {

/// Cell holding p, taking the cell on the side p moves toward when p sits
/// exactly on an edge.
int cell_toward(const NonuniformGrid& grid, double p, double direction) {
  int k = grid.locate(p);
  if (direction < 0.0 && k > 0 && p == grid.left(k)) --k;
  return k;
}

std::vector<double> flux_source(const CircleMapFamily& map, const GridDensity& h) {
  const auto& grid = h.grid();
  const auto& e = grid.edges();
  const int m = grid.size();
  const int d = map.branch_count();
  // G[j] accumulates sum_i X_i g_i' h(g_i) at edge j. X_i vanishes at 0 and 1.
  std::vector<double> G(m + 1, 0.0);

  const bool mirror = map.reflection_symmetric() && grid.mirror_symmetric() && d == 2;
  const int direct_branches = mirror ? 1 : d;
  for (int b = 1; b <= direct_branches; ++b) {
    const BranchId i{b};
    for (int j = 1; j < m; ++j) {
      const double y = e[j];
      const double u = map.inverse(i, y);
      const double x = map.branch_dalpha(b, u, 0);
      const double gp = 1.0 / map.branch_deriv(b, u, 1);
      // d/dalpha g = -X g', so the preimage moves against the sign of X.
      const int k = cell_toward(grid, u, -x);
      G[j] += x * gp * h[k];
      if (mirror) {
        // Branch 2 at 1 - y: X_2(1 - y) = -X_1(y), same g', image cell mirrored.
        G[m - j] += -x * gp * h[m - 1 - k];
      }
    }
  }
  std::vector<double> s(m);
  for (int j = 0; j < m; ++j) s[j] = (G[j + 1] - G[j]) / grid.width(j);
  return s;
}

std::vector<double> product_rule_source(const CircleMapFamily& map, const GridDensity& h) {
  const auto& grid = h.grid();
  const int m = grid.size();
  std::vector<double> s(m, 0.0);
  for (int b = 1; b <= map.branch_count(); ++b) {
    const BranchId i{b};
    const auto n = assemble_N(map, i, h.grid_ptr()).apply(h);
    for (int k = 0; k < m; ++k) {
      double dn = 0.0;
      if (k == 0) {
        dn = (n[1] - n[0]) / (grid.center(1) - grid.center(0));
      } else if (k == m - 1) {
        dn = (n[m - 1] - n[m - 2]) / (grid.center(m - 1) - grid.center(m - 2));
      } else {
        dn = (n[k + 1] - n[k - 1]) / (grid.center(k + 1) - grid.center(k - 1));
      }
      const double c = grid.center(k);
      s[k] += map.X(i, c, 1) * n[k] + map.X(i, c, 0) * dn;
    }
  }
  return s;
}

}  // namespace

GridDensity source_term(const CircleMapFamily& map, const GridDensity& h, SourceScheme scheme) {
  auto values = scheme == SourceScheme::kFlux ? flux_source(map, h) : product_rule_source(map, h);
  return GridDensity(h.grid_ptr(), std::move(values));
}

TailFit fit_tail(const std::vector<double>& terms, int window) {
  TailFit out;
  const int n = static_cast<int>(terms.size());
  window = std::min(window, n);
  if (window < 3) {
    out.tail = std::numeric_limits<double>::infinity();
    return out;
  }
  // Upper envelope over the window so sign changes do not produce log spikes.
  std::vector<double> env(window);
  double running = 0.0;
  for (int k = window - 1; k >= 0; --k) {
    running = std::max(running, std::abs(terms[n - window + k]));
    env[k] = running;
  }
  if (env[0] == 0.0) return out;  // all terms vanish

  const double floor = env[0] * 1e-300 + std::numeric_limits<double>::min();
  std::vector<double> lj(window), j(window), lt(window);
  for (int k = 0; k < window; ++k) {
    const double idx = static_cast<double>(n - window + k);
    j[k] = idx;
    lj[k] = std::log(std::max(idx, 1.0));
    lt[k] = std::log(std::max(env[k], floor));
  }
  const auto pw = least_squares(lj, lt);
  const auto geo = least_squares(j, lt);
  out.power_exponent = pw.slope;
  out.power_residual = pw.rss;
  out.geometric_rate = std::exp(geo.slope);
  out.geometric_residual = geo.rss;
  out.geometric_preferred = geo.rss < pw.rss && out.geometric_rate < 1.0;

  const double J = static_cast<double>(n - 1);
  const double last = env[window - 1];
  if (out.geometric_preferred) {
    const double r = out.geometric_rate;
    out.tail = last * r / (1.0 - r);
  } else if (out.power_exponent < -1.0) {
    const double p = out.power_exponent;
    // sum_{j > J} C j^p ~ C J^{p+1} / (-p-1) with C J^p = last.
    out.tail = last * J / (-p - 1.0);
  } else {
    out.tail = std::numeric_limits<double>::infinity();
  }
  return out;
}

NeumannResult neumann_sum(const UlamMatrix& L, const GridDensity& source,
                          const std::vector<double>& psi_integrals, const NeumannConfig& cfg) {
  const auto& grid = L.grid();
  const int m = grid.size();
  if (source.size() != m || static_cast<int>(psi_integrals.size()) != m) {
    throw std::invalid_argument("neumann_sum: size mismatch");
  }
  const auto& w = grid.widths();
  // Iterate cell masses with the weight matrix; the pairing uses psi averages.
  Eigen::VectorXd mass(m), next(m), psi_avg(m);
  for (int k = 0; k < m; ++k) {
    mass[k] = source[k] * w[k];
    psi_avg[k] = psi_integrals[k] / w[k];
  }
  const auto& W = L.weights();

  NeumannResult r;
  double sum = 0.0, comp = 0.0;
  constexpr int kCheckEvery = 10;
  for (int j = 0; j <= cfg.j_max; ++j) {
    const double t = psi_avg.dot(mass);
    r.terms.push_back(t);
    const double y = t - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    r.partial_sums.push_back(sum);
    r.J = j;

    const int count = j + 1;
    if (count >= cfg.fit_window && count % kCheckEvery == 0) {
      const auto fit = fit_tail(r.terms, cfg.fit_window);
      r.tail_estimate = fit.tail;
      r.tail_exponent = fit.power_exponent;
      const double tol = std::max(cfg.tol_tail_rel * std::abs(sum), cfg.tol_tail_abs);
      if (fit.tail <= tol) {
        r.converged = true;
        break;
      }
      if (count >= 4 * cfg.fit_window && !fit.geometric_preferred &&
          fit.power_exponent >= -1.0) {
        const double first = std::abs(r.terms[count - cfg.fit_window]);
        if (std::abs(t) >= first) {
          r.non_summable = true;
          break;
        }
      }
    }
    if (j == cfg.j_max) break;
    next.noalias() = W * mass;
    mass.swap(next);
  }
  if (!r.converged && r.terms.size() >= 3) {
    const auto fit = fit_tail(r.terms, cfg.fit_window);
    r.tail_estimate = fit.tail;
    r.tail_exponent = fit.power_exponent;
    if (!fit.geometric_preferred && fit.power_exponent >= -1.0) r.non_summable = true;
  }
  r.value = sum;
  return r;
}

Observable Observable::constant_one() {
  return {"one", [](double) { return 1.0; }};
}

Observable Observable::cos2pi() {
  return {"cos", [](double x) { return std::cos(2.0 * std::numbers::pi * x); }};
}

Observable Observable::mirrored() const {
  auto f = fn;
  return {id + "_mirrored", [f](double x) { return f(1.0 - x); }};
}

namespace {

GridPtr make_grid(const ResponseConfig& cfg) {
  return std::make_shared<const NonuniformGrid>(
      NonuniformGrid::build(cfg.m_total, cfg.refinement_ratio, cfg.n_geometric));
}

}  // namespace

ResponseReport response_formula(const CircleMapFamily& map, const Observable& psi,
                                const UlamMatrix& L, const GridDensity& h,
                                const ResponseConfig& cfg) {
  ResponseReport rep;
  rep.alpha = map.alpha();
  rep.psi_id = psi.id;
  rep.grid_meta = L.grid().describe();
  const auto src = source_term(map, h, cfg.scheme);
  rep.source_mass = src.mass();
  rep.source_l1 = src.l1_norm();
  const auto psi_int = cell_integrals(psi.fn, L.grid());
  rep.neumann = neumann_sum(L, src, psi_int, cfg.neumann);
  rep.formula_value = -rep.neumann.value;
  return rep;
}

ResponseReport response_formula(const CircleMapFamily& map, const Observable& psi,
                                const ResponseConfig& cfg) {
  const auto grid = make_grid(cfg);
  const auto L = assemble_L(map, grid);
  const auto dens = invariant_density(L, cfg.density);
  if (!dens.converged) throw ConvergenceError("invariant density did not converge");
  return response_formula(map, psi, L, dens.density, cfg);
}

Expectation expectation(const CircleMapFamily& map, const Observable& psi, const GridPtr& grid,
                        const DensitySolverConfig& cfg) {
  const auto dens = invariant_density(map, grid, cfg);
  const auto ints = cell_integrals(psi.fn, *grid);
  return {pair(dens.density.values(), ints), dens.converged};
}

FdResult fd_derivative(const CircleMapFamily& map, const Observable& psi,
                       const ResponseConfig& cfg) {
  if (cfg.fd_steps.empty()) throw std::invalid_argument("fd_derivative: no steps");
  auto steps = cfg.fd_steps;
  std::sort(steps.begin(), steps.end(), std::greater<>());
  if (steps.back() <= 0.0) throw std::invalid_argument("fd_derivative: steps must be positive");
  const double alpha = map.alpha();
  if (alpha + steps.front() >= 1.0) throw DomainError("fd_derivative: alpha + eps must be < 1");

  FdResult out;
  out.one_sided = alpha - steps.front() < 0.0;
  const auto grid = make_grid(cfg);

  // Parameter values needed, evaluated possibly in parallel.
  std::vector<double> params;
  if (out.one_sided) params.push_back(alpha);
  for (double e : steps) {
    params.push_back(alpha + e);
    if (!out.one_sided) params.push_back(alpha - e);
  }
  std::vector<Expectation> values(params.size());
  auto work = [&](std::size_t k) {
    const auto m = map.with_alpha(params[k]);
    values[k] = expectation(*m, psi, grid, cfg.density);
  };
  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    for (std::size_t k = 0; k < params.size(); ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t k = t; k < params.size(); k += workers) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& v : values) out.tainted = out.tainted || !v.converged;

  std::size_t idx = 0;
  double base = 0.0;
  if (out.one_sided) base = values[idx++].value;
  for (double e : steps) {
    double q = 0.0;
    if (out.one_sided) {
      q = (values[idx++].value - base) / e;
    } else {
      const double plus = values[idx++].value;
      const double minus = values[idx++].value;
      q = (plus - minus) / (2.0 * e);
    }
    out.steps.push_back({e, q});
  }

  // Leading error is O(eps^2) for centered and O(eps) for one-sided quotients.
  const int order = out.one_sided ? 1 : 2;
  auto richardson = [order](const FdStep& coarse, const FdStep& fine) {
    const double r = std::pow(coarse.eps / fine.eps, order);
    return (r * fine.quotient - coarse.quotient) / (r - 1.0);
  };
  const std::size_t n = out.steps.size();
  if (n == 1) {
    out.limit = out.steps[0].quotient;
    out.uncertainty = std::numeric_limits<double>::infinity();
  } else {
    out.limit = richardson(out.steps[n - 2], out.steps[n - 1]);
    if (n >= 3) {
      out.uncertainty = std::abs(out.limit - richardson(out.steps[n - 3], out.steps[n - 2]));
    } else {
      out.uncertainty = std::abs(out.limit - out.steps[n - 1].quotient);
    }
  }
  return out;
}

namespace {

/// Centered derivative of fn at x with a step kept inside (0,1).
double centered(const PointFunction& fn, double x) {
  const double h = 1e-5 * std::min(x, 1.0 - x);
  return (fn(x + h) - fn(x - h)) / (2.0 * h);
}

/// N_i phi at x, with g and g' of branch i.
double branch_transfer(const CircleMapFamily& map, BranchId i, const PointFunction& phi, double x) {
  const double u = map.inverse(i, x);
  return phi(u) / map.branch_deriv(i.index, u, 1);
}

/// (N_i phi)'(x) = g'' phi(g) + g'^2 phi'(g), g'' = -f''(g) g'^3.
double branch_transfer_deriv(const CircleMapFamily& map, BranchId i, const PointFunction& phi,
                             const PointFunction& dphi, double x) {
  const double u = map.inverse(i, x);
  const double gp = 1.0 / map.branch_deriv(i.index, u, 1);
  const double gpp = -map.branch_deriv(i.index, u, 2) * gp * gp * gp;
  return gpp * phi(u) + gp * gp * dphi(u);
}

/// (X_i N_i phi)'(x).
double flux_deriv(const CircleMapFamily& map, BranchId i, const PointFunction& phi,
                  const PointFunction& dphi, double x) {
  return map.X(i, x, 1) * branch_transfer(map, i, phi, x) +
         map.X(i, x, 0) * branch_transfer_deriv(map, i, phi, dphi, x);
}

}  // namespace

double first_derivative_operator(const CircleMapFamily& map, const PointFunction& phi,
                                 const PointFunction& dphi, double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("derivative operator evaluated at the neutral point");
  double s = 0.0;
  for (int b = 1; b <= map.branch_count(); ++b) s += flux_deriv(map, BranchId{b}, phi, dphi, x);
  return -s;
}

double second_derivative_operator(const CircleMapFamily& map, const PointFunction& phi,
                                  const PointFunction& dphi, double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("derivative operator evaluated at the neutral point");
  // d^2/dalpha^2 L phi = -sum_i [(d_alpha X_i) N_i phi]' + sum_i [X_i (X_i N_i phi)']'.
  double s = 0.0;
  for (int b = 1; b <= map.branch_count(); ++b) {
    const BranchId i{b};
    const PointFunction a = [&](double y) {
      return map.dalpha_X(i, y) * branch_transfer(map, i, phi, y);
    };
    const PointFunction c = [&](double y) {
      return map.X(i, y, 0) * flux_deriv(map, i, phi, dphi, y);
    };
    s += -centered(a, x) + centered(c, x);
  }
  return s;
}

void write_neumann_csv(std::ostream& os, const NeumannResult& r) {
  os << "j,term,partial_sum\n";
  for (std::size_t j = 0; j < r.terms.size(); ++j) {
    os << j << ',' << csv::num(r.terms[j]) << ',' << csv::num(r.partial_sums[j]) << '\n';
  }
}

void write_fd_csv(std::ostream& os, const FdResult& r) {
  os << "step,quotient\n";
  for (const auto& s : r.steps) os << csv::num(s.eps) << ',' << csv::num(s.quotient) << '\n';
}

std::string response_summary_json(const ResponseReport& r) {
  nlohmann::ordered_json j;
  j["alpha"] = r.alpha;
  j["psi_id"] = r.psi_id;
  j["formula_value"] = r.formula_value;
  j["fd_limit"] = r.fd.limit;
  j["fd_uncertainty"] = std::isfinite(r.fd.uncertainty) ? nlohmann::ordered_json(r.fd.uncertainty)
                                                         : nlohmann::ordered_json(nullptr);
  j["J"] = r.neumann.J;
  j["tail_estimate"] = std::isfinite(r.neumann.tail_estimate)
                           ? nlohmann::ordered_json(r.neumann.tail_estimate)
                           : nlohmann::ordered_json(nullptr);
  j["fd_one_sided"] = r.fd.one_sided;
  j["fd_tainted"] = r.fd.tainted;
  j["neumann_converged"] = r.neumann.converged;
  j["non_summable"] = r.neumann.non_summable;
  j["source_mass"] = r.source_mass;
  j["grid"] = r.grid_meta;
  return j.dump(2);
}

}  // namespace intermittent
