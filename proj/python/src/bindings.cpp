#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dsf/cli.hpp"
#include "dsf/config_io.hpp"
#include "dsf/errors.hpp"
#include "dsf/limit_solver.hpp"
#include "dsf/perforated_solver.hpp"
#include "dsf/verify.hpp"

namespace py = pybind11;
using namespace dsf;

namespace {

// Nodal field as an array indexed [i, j, k].
py::array_t<double> to_array(const ScalarField& f) {
  const auto m = static_cast<py::ssize_t>(f.grid.nodes_per_axis());
  const auto s = static_cast<py::ssize_t>(sizeof(double));
  py::array_t<double> a({m, m, m}, {s, s * m, s * m * m});
  std::copy(f.values.begin(), f.values.end(), a.mutable_data());
  return a;
}

// Gamma_0 values as an array indexed [i - 1, j - 1].
py::array_t<double> to_array(const BoundaryField& v) {
  const auto m = static_cast<py::ssize_t>(v.grid.cells() - 1);
  const auto s = static_cast<py::ssize_t>(sizeof(double));
  py::array_t<double> a({m, m}, {s, s * m});
  std::copy(v.values.begin(), v.values.end(), a.mutable_data());
  return a;
}

ProblemConfig parse(const std::string& text, const std::map<std::string, std::string>& overrides,
                    const std::string& base_dir) {
  std::vector<std::pair<std::string, std::string>> o(overrides.begin(), overrides.end());
  return parse_config(text, o, base_dir);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimal boundary control with a layer of critically sized Robin particles";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<AssemblyError>(m, "AssemblyError", PyExc_ValueError);

  py::class_<HomogConstants>(m, "HomogConstants")
      .def_readonly("omega_n", &HomogConstants::omega_n)
      .def_readonly("a1", &HomogConstants::a1)
      .def_readonly("a2", &HomogConstants::a2)
      .def_readonly("cn", &HomogConstants::cn);
  m.def("constants", &constants, py::arg("n"), py::arg("c0"));
  m.def("effective_robin", &effective_robin, py::arg("a"), py::arg("constants"));
  m.def("strange_term_coeff", &strange_term_coeff, py::arg("a"), py::arg("trace_b"), py::arg("constants"));
  m.def("radial_robin_oracle", &radial_robin_oracle, py::arg("n"), py::arg("c0"), py::arg("eps"), py::arg("a"),
        py::arg("radial_nodes") = 10000);

  py::class_<ProblemConfig>(m, "ProblemConfig")
      .def(py::init<>())
      .def_readwrite("n", &ProblemConfig::n)
      .def_readwrite("eps", &ProblemConfig::eps)
      .def_readwrite("c0", &ProblemConfig::c0)
      .def_readwrite("eta", &ProblemConfig::eta)
      .def_readwrite("bigN", &ProblemConfig::big_n)
      .def_readwrite("grid_nodes", &ProblemConfig::grid_nodes)
      .def_readwrite("sweep", &ProblemConfig::sweep)
      .def_property_readonly("particle_count", [](const ProblemConfig& c) { return build_particle_layer(c).count(); })
      .def("__eq__", [](const ProblemConfig& a, const ProblemConfig& b) { return a == b; })
      .def("__repr__", &serialize_config);
  m.def("parse_config", &parse, py::arg("text"), py::arg("overrides") = std::map<std::string, std::string>{},
        py::arg("base_dir") = "");
  m.def("serialize_config", &serialize_config, py::arg("config"));

  m.def(
      "solve_limit",
      [](const ProblemConfig& cfg) {
        LimitSolution s = [&] {
          py::gil_scoped_release release;
          return solve_coupled_limit(cfg);
        }();
        py::dict d;
        d["u0"] = to_array(s.u0);
        d["p0"] = to_array(s.p0);
        d["v0"] = to_array(s.v0);
        d["J0"] = s.j0_value;
        d["iterations"] = s.iterations;
        d["residual"] = s.residual();
        return d;
      },
      py::arg("config"), "Optimal control of the homogenized problem.");

  m.def(
      "solve_eps",
      [](const ProblemConfig& cfg) {
        EpsSolution s = [&] {
          py::gil_scoped_release release;
          return optimize_eps(cfg, build_particle_layer(cfg));
        }();
        py::dict d;
        d["u_eps"] = to_array(s.u_eps);
        d["p_eps"] = to_array(s.p_eps);
        d["v_eps"] = to_array(s.v_eps);
        d["J_eps"] = s.j_eps;
        d["energy_eps"] = s.energy_eps;
        d["q"] = s.monopoles.q;
        d["U"] = s.monopoles.U;
        d["iterations"] = s.iterations;
        d["residual"] = s.residual();
        return d;
      },
      py::arg("config"), "Optimal control with the particle layer of the config.");

  m.def(
      "energy_limit",
      [](const ProblemConfig& cfg) {
        py::gil_scoped_release release;
        return solve_uncontrolled_limit(cfg).energy_limit;
      },
      py::arg("config"));
  m.def(
      "energy_eps",
      [](const ProblemConfig& cfg) {
        py::gil_scoped_release release;
        return energy_eps(cfg, build_particle_layer(cfg));
      },
      py::arg("config"));

  m.def(
      "gradient_check",
      [](const std::string& kind, const ProblemConfig& cfg, int n_dirs, std::uint64_t seed) {
        if (kind != "limit" && kind != "eps") throw ConfigError("kind must be 'limit' or 'eps'");
        py::gil_scoped_release release;
        return gradient_check(kind == "limit" ? SolverKind::limit : SolverKind::eps, cfg, n_dirs, seed).max_rel_error;
      },
      py::arg("kind"), py::arg("config"), py::arg("n_dirs") = 5, py::arg("seed") = 0);

  m.def(
      "convergence_study",
      [](const ProblemConfig& cfg, std::vector<double> eps_list) {
        ConvergenceReport rep = [&] {
          py::gil_scoped_release release;
          return convergence_study(cfg, std::move(eps_list));
        }();
        if (!rep.complete) throw SolverError(rep.failure, 0.0);
        py::list rows;
        for (const auto& r : rep.rows) {
          py::dict d;
          d["eps"] = r.eps;
          d["grid"] = r.grid;
          d["J_eps"] = r.j_eps;
          d["J0"] = r.j0;
          d["rel_cost_gap"] = r.rel_cost_gap;
          d["energy_eps"] = r.energy_eps;
          d["energy_limit"] = r.energy_limit;
          d["rel_energy_gap"] = r.rel_energy_gap;
          d["l2_field_gap"] = r.l2_field_gap;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config"), py::arg("eps_list"));

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a dsf subcommand; returns (exit_code, stdout, stderr).");
}
