/*
 Copyright 2026 The stcpdg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "stcpdg/conic.hpp"
#include "stcpdg/output.hpp"
#include "stcpdg/scenario.hpp"
#include "stcpdg/scvx.hpp"
#include "stcpdg/stc.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace stcpdg;

namespace {

// A finished run together with the configuration it used.
struct PyRun {
  ScenarioConfig config;
  ScvxResult result;
};

py::dict iterate_dict(const ScvxIterate& it) {
  py::dict d;
  d["iteration"] = it.iteration;
  d["solve_status"] = to_string(it.solve_status);
  d["converged"] = it.converged;
  d["sigma"] = it.metrics.sigma;
  d["nu_l1"] = it.metrics.nu_l1;
  d["trust_deviation"] = it.metrics.trust_deviation;
  d["objective"] = it.metrics.objective;
  d["reference_defect"] = it.metrics.reference_defect;
  d["solver_iterations"] = it.metrics.solver_iterations;
  d["stc_rows"] = it.metrics.stc_rows;
  return d;
}

py::dict report_dict(const VerificationReport& rep) {
  py::dict d;
  d["max_defect"] = rep.max_defect;
  d["worst_interval"] = rep.worst_interval;
  d["ignition_residual"] = rep.ignition_residual;
  d["terminal_position"] = rep.terminal_position;
  d["terminal_velocity"] = rep.terminal_velocity;
  d["terminal_rate"] = rep.terminal_rate;
  d["terminal_attitude"] = rep.terminal_attitude;
  d["worst_constraint"] = rep.worst_constraint;
  py::dict stcs;
  for (const auto& s : rep.stcs) stcs[py::str(s.name)] = s.all_satisfied();
  d["stcs"] = stcs;
  d["time"] = rep.time;
  d["speed"] = rep.speed;
  d["aoa_deg"] = rep.aoa_deg;
  d["failures"] = verification_failures(rep);
  return d;
}

py::dict solve_conic(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const Eigen::MatrixXd& G, const Eigen::VectorXd& h, int nonneg, const std::vector<int>& soc,
                     const std::string& backend) {
  ConicProgram prog;
  prog.c = c;
  prog.A = A.sparseView();
  prog.b = b;
  prog.G = G.sparseView();
  prog.h = h;
  prog.cones.nonneg = nonneg;
  prog.cones.soc = soc;
  const SolveResult r = make_backend(backend)->solve(prog);
  py::dict d;
  d["status"] = to_string(r.status);
  d["x"] = r.x;
  d["s"] = r.s;
  d["y"] = r.y;
  d["z"] = r.z;
  d["objective"] = r.objective;
  d["iterations"] = r.iterations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Powered-descent guidance by successive convexification with state-triggered constraints";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("K", &ScenarioConfig::K)
      .def_readwrite("max_iterations", &ScenarioConfig::max_iterations)
      .def_readwrite("aoa_enabled", &ScenarioConfig::aoa_enabled)
      .def_readwrite("keepout_enabled", &ScenarioConfig::keepout_enabled)
      .def_readwrite("r_I_init", &ScenarioConfig::r_I_init)
      .def_readwrite("v_I_init", &ScenarioConfig::v_I_init)
      .def_readwrite("t_c_max", &ScenarioConfig::t_c_max)
      .def_readwrite("V_alpha", &ScenarioConfig::V_alpha)
      .def_readwrite("alpha_max", &ScenarioConfig::alpha_max)
      .def_readwrite("keepout_height", &ScenarioConfig::keepout_height)
      .def_readwrite("sigma_0", &ScenarioConfig::sigma_0)
      .def("validate", &ScenarioConfig::validate)
      .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; })
      .def("__repr__", [](const ScenarioConfig& c) { return "<ScenarioConfig '" + c.name + "'>"; });

  m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); }, py::arg("path"));
  m.def("parse_scenario", [](const std::string& text, const std::string& source) { return parse_scenario(text, source); },
        py::arg("text"), py::arg("source") = "<scenario>");
  m.def("dump_scenario", &dump_scenario, py::arg("config"));

  py::class_<PyRun>(m, "Run")
      .def_property_readonly("status", [](const PyRun& r) { return to_string(r.result.status); })
      .def_property_readonly("converged", [](const PyRun& r) { return r.result.status == ScvxStatus::converged; })
      .def_property_readonly("message", [](const PyRun& r) { return r.result.message; })
      .def_property_readonly("iterations", [](const PyRun& r) { return r.result.history.size(); })
      .def_property_readonly("t_c", [](const PyRun& r) { return r.result.solution.t_c; })
      .def_property_readonly("t_b", [](const PyRun& r) { return r.result.solution.t_b; })
      .def_property_readonly("X", [](const PyRun& r) { return Eigen::MatrixXd(r.result.solution.X); })
      .def_property_readonly("U", [](const PyRun& r) { return Eigen::MatrixXd(r.result.solution.U); })
      .def_property_readonly("config", [](const PyRun& r) { return r.config; })
      .def_property_readonly("history",
                             [](const PyRun& r) {
                               py::list out;
                               for (const auto& it : r.result.history) out.append(iterate_dict(it));
                               return out;
                             })
      .def("verify", [](const PyRun& r) { return report_dict(verify(r.result.solution, r.config)); })
      .def(
          "write_outputs",
          [](const PyRun& r, const std::filesystem::path& out_dir) {
            const VerificationReport rep = verify(r.result.solution, r.config);
            const FineTrajectory fine = propagate_fine(r.result.solution, r.config);
            RunArtifacts a;
            a.config = &r.config;
            a.result = &r.result;
            a.report = &rep;
            a.fine = &fine;
            a.verification_passed = verification_failures(rep).empty();
            emit_outputs(a, out_dir);
          },
          py::arg("out_dir"));

  m.def(
      "run",
      [](const ScenarioConfig& config, const std::string& backend, int max_iterations) {
        ScvxOptions opts;
        opts.backend = backend;
        opts.max_iterations = max_iterations;
        PyRun r{config, {}};
        {
          py::gil_scoped_release release;
          r.result = run(config, opts);
        }
        return r;
      },
      py::arg("config"), py::arg("backend") = "ipm", py::arg("max_iterations") = -1);

  m.def("backend_names", &backend_names);
  m.def("solve_conic", &solve_conic, py::arg("c"), py::arg("A"), py::arg("b"), py::arg("G"), py::arg("h"),
        py::arg("nonneg"), py::arg("soc"), py::arg("backend") = "ipm",
        "minimize c'x subject to A x = b and h - G x in the product cone");
  m.def("shat", &shat, py::arg("g"));
  m.def("projected", &projected, py::arg("g"), py::arg("c"));
}
