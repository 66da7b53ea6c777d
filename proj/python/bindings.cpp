// Python bindings for the intermittent-map core.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "intermittent/acceptance.hpp"
#include "intermittent/config.hpp"
#include "intermittent/correlations.hpp"
#include "intermittent/discretization.hpp"
#include "intermittent/experiments.hpp"
#include "intermittent/map_family.hpp"
#include "intermittent/response.hpp"
#include "intermittent/solenoid.hpp"
#include "intermittent/transfer_op.hpp"

namespace py = pybind11;
using namespace intermittent;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

GridPtr make_grid(int m_total, double refinement_ratio, int n_geometric) {
  return std::make_shared<const NonuniformGrid>(
      NonuniformGrid::build(m_total, refinement_ratio, n_geometric));
}

Observable observable_arg(const py::object& psi) {
  if (py::isinstance<py::str>(psi)) return observable_by_name(psi.cast<std::string>());
  auto fn = psi.cast<std::function<double(double)>>();
  return {"python", [fn](double x) {
            py::gil_scoped_acquire gil;
            return fn(x);
          }};
}

py::dict density_dict(const DensityResult& r) {
  py::dict d;
  d["values"] = to_array(r.density.values());
  d["edges"] = to_array(r.density.grid().edges());
  d["converged"] = r.converged;
  d["iterations"] = r.iterations;
  d["residual"] = r.residual;
  return d;
}

py::dict outcome_dict(const RunOutcome& o) {
  py::list checks;
  for (const auto& a : o.assertions) {
    py::dict c;
    c["id"] = a.id;
    c["pass"] = a.pass;
    c["value"] = a.value;
    c["threshold"] = a.threshold;
    c["detail"] = a.detail;
    checks.append(c);
  }
  py::dict d;
  d["experiment"] = o.experiment;
  d["passed"] = o.passed();
  d["assertions"] = checks;
  d["summary"] = py::module_::import("json").attr("loads")(o.summary_json);
  d["artifacts"] = o.artifacts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transfer operators, linear response and solenoid lifts for intermittent circle maps";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<CircleMapFamily>(m, "CircleMap")
      .def_property_readonly("alpha", &CircleMapFamily::alpha)
      .def_property_readonly("branch_count", &CircleMapFamily::branch_count)
      .def("f", &CircleMapFamily::f, py::arg("x"))
      .def("deriv", &CircleMapFamily::deriv, py::arg("x"), py::arg("order") = 1)
      .def("v", &CircleMapFamily::v, py::arg("x"))
      .def(
          "inverse",
          [](const CircleMapFamily& map, int branch, double y) { return map.inverse(BranchId{branch}, y); },
          py::arg("branch"), py::arg("y"))
      .def(
          "X",
          [](const CircleMapFamily& map, int branch, double x, int order) {
            return map.X(BranchId{branch}, x, order);
          },
          py::arg("branch"), py::arg("x"), py::arg("order") = 0);

  py::class_<TwoBranchIntermittentMap, CircleMapFamily>(m, "IntermittentMap")
      .def(py::init<double>(), py::arg("alpha"));

  m.def(
      "partition_sequences",
      [](const CircleMapFamily& map, int n_z) {
        const auto s = partition_sequences(map, n_z);
        return py::make_tuple(to_array(s.z), to_array(s.z_prime));
      },
      py::arg("map"), py::arg("n_z"), "Preimage sequences (z_n, z'_n) of the neutral point.");

  m.def(
      "grid_edges",
      [](int m_total, double refinement_ratio, int n_geometric) {
        return to_array(make_grid(m_total, refinement_ratio, n_geometric)->edges());
      },
      py::arg("m_total"), py::arg("refinement_ratio") = 0.7, py::arg("n_geometric") = 40);

  m.def(
      "invariant_density",
      [](double alpha, int m_total, double refinement_ratio, int n_geometric) {
        py::gil_scoped_release nogil;
        TwoBranchIntermittentMap map(alpha);
        auto r = invariant_density(map, make_grid(m_total, refinement_ratio, n_geometric));
        py::gil_scoped_acquire gil;
        return density_dict(r);
      },
      py::arg("alpha"), py::arg("m_total") = 1 << 14, py::arg("refinement_ratio") = 0.7,
      py::arg("n_geometric") = 40,
      "Ulam invariant density as a dict with cell values, grid edges and solver status.");

  m.def(
      "response",
      [](double alpha, const py::object& psi, int m_total, const std::string& scheme, bool with_fd) {
        const Observable obs = observable_arg(psi);
        ResponseConfig cfg;
        cfg.m_total = m_total;
        if (scheme == "product") cfg.scheme = SourceScheme::kProductRule;
        else if (scheme != "flux") throw ConfigError("scheme must be flux or product");
        TwoBranchIntermittentMap map(alpha);
        ResponseReport r;
        FdResult fd;
        {
          py::gil_scoped_release nogil;
          r = response_formula(map, obs, cfg);
          if (with_fd) fd = fd_derivative(map, obs, cfg);
        }
        py::dict d;
        d["alpha"] = r.alpha;
        d["formula"] = r.formula_value;
        d["converged"] = r.neumann.converged;
        d["terms"] = r.neumann.J;
        d["tail_estimate"] = r.neumann.tail_estimate;
        d["source_mass"] = r.source_mass;
        if (with_fd) {
          d["fd"] = fd.limit;
          d["fd_uncertainty"] = fd.uncertainty;
        }
        return d;
      },
      py::arg("alpha"), py::arg("psi") = "cos", py::arg("m_total") = 1 << 14, py::arg("scheme") = "flux",
      py::arg("with_fd") = false,
      "Derivative in alpha of the expectation of psi (name or callable) by the resolvent formula.");

  m.def(
      "correlations",
      [](double alpha, int n_max, int m_total) {
        std::vector<double> seq;
        {
          py::gil_scoped_release nogil;
          TwoBranchIntermittentMap map(alpha);
          const auto grid = make_grid(m_total, 0.7, 40);
          const auto L = assemble_L(map, grid);
          const auto h = invariant_density(L).density;
          GridDensity phi = h;
          phi -= GridDensity::constant(grid, 1.0);
          seq = correlation_sequence(L, phi, Observable::cos2pi().fn, n_max);
        }
        return to_array(seq);
      },
      py::arg("alpha"), py::arg("n_max") = 2000, py::arg("m_total") = 1 << 14,
      "|int cos(2 pi x) L^n (h - 1) dx| for n = 1..n_max.");

  m.def(
      "fit_decay",
      [](const std::vector<double>& seq, int lo, int hi, bool loglog, double noise_floor) {
        const auto f = fit_decay(seq, lo, hi, loglog, noise_floor);
        py::dict d;
        d["exponent"] = f.exponent;
        d["loglog_coefficient"] = f.loglog_coefficient;
        d["residual"] = f.residual;
        d["geometric_preferred"] = f.geometric_preferred;
        return d;
      },
      py::arg("seq"), py::arg("window_lo"), py::arg("window_hi"), py::arg("loglog") = false,
      py::arg("noise_floor") = 0.0);

  m.def(
      "kernel_min",
      [](double alpha, double eps, int m_total, int cap) {
        py::gil_scoped_release nogil;
        TwoBranchIntermittentMap map(alpha);
        const auto L = assemble_L(map, make_grid(m_total, 0.7, 20));
        const auto k = kernel_min(L, alpha, eps, cap);
        return std::make_tuple(k.gamma, k.n_eps, k.positive);
      },
      py::arg("alpha"), py::arg("eps"), py::arg("m_total") = 1024, py::arg("cap") = 0,
      "(gamma, n_eps, positive) for the perturbed operator kernel.");

  m.def(
      "birkhoff",
      [](double alpha, long orbit_length, int streams, std::uint64_t seed, int workers) {
        BirkhoffConfig cfg;
        cfg.orbit_length = orbit_length;
        cfg.streams = streams;
        cfg.seed = seed;
        cfg.workers = workers;
        py::gil_scoped_release nogil;
        TwoBranchIntermittentMap map(alpha);
        const auto r = birkhoff_average(
            map, {NamedTorusObservable::base_cos(), NamedTorusObservable::fiber_y(), NamedTorusObservable::one()},
            cfg);
        return std::make_tuple(r.mean, r.std_error);
      },
      py::arg("alpha"), py::arg("orbit_length") = 1'000'000, py::arg("streams") = 8, py::arg("seed") = 1,
      py::arg("workers") = 1,
      "Birkhoff means and standard errors of cos(2 pi x), y and 1 on the solenoid.");

  m.def(
      "solenoid_step",
      [](double alpha, double x, double y, double z) {
        TwoBranchIntermittentMap map(alpha);
        const auto s = solenoid_step(map, SolenoidState{x, y, z});
        return std::make_tuple(s.x, s.y, s.z);
      },
      py::arg("alpha"), py::arg("x"), py::arg("y"), py::arg("z"));

  m.def(
      "run_experiment",
      [](const std::string& kind, const std::vector<std::string>& settings) {
        ExperimentConfig cfg;
        for (const auto& kv : settings) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw ConfigError("expected section.key=value, got '" + kv + "'");
          set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        RunOutcome o;
        {
          py::gil_scoped_release nogil;
          o = run_experiment(kind, cfg);
        }
        return outcome_dict(o);
      },
      py::arg("kind"), py::arg("settings") = std::vector<std::string>{},
      "Runs a CLI experiment with section.key=value overrides and returns its checks and summary.");

  m.def(
      "acceptance",
      [](const std::string& selector, std::uint64_t seed, int workers) {
        AcceptanceOptions opts;
        opts.selector = selector;
        opts.seed = seed;
        opts.workers = workers;
        std::vector<CriterionResult> results;
        {
          py::gil_scoped_release nogil;
          results = run_acceptance(opts);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["id"] = r.id;
          d["status"] = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("selector") = "fast", py::arg("seed") = 1, py::arg("workers") = 1);
}
