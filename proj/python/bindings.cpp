#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "cloudagv/config.hpp"
#include "cloudagv/sim.hpp"

namespace py = pybind11;
using namespace cloudagv;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const Matrix3& m) {
  Rows r(3, std::vector<double>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = m[i][j];
  return r;
}

Matrix3 from_rows(const Rows& r) {
  if (r.size() != 3) throw py::value_error("expected a 3x3 matrix");
  Matrix3 m{};
  for (int i = 0; i < 3; ++i) {
    if (r[i].size() != 3) throw py::value_error("expected a 3x3 matrix");
    for (int j = 0; j < 3; ++j) m[i][j] = r[i][j];
  }
  return m;
}

py::dict signal_dict(const SignalMetrics& s) {
  py::dict d;
  d["settled"] = s.settled;
  d["settling_time_steps"] = s.settling_time_steps;
  d["overshoot_count"] = s.overshoot_count;
  d["damping_class"] = std::string(to_string(s.damping_class));
  d["band"] = s.band;
  return d;
}

// Trace as a dict of columns, metrics as a nested dict.
py::dict result_dict(const RunResult& r) {
  std::vector<double> t, x_r, y_r, theta_r, x_c, y_c, theta_c, x_e, y_e, theta_e, nu, omega,
      max_eig;
  std::vector<std::size_t> n_ul;
  for (const auto& rec : r.trace) {
    t.push_back(rec.t);
    x_r.push_back(rec.x_r.x);
    y_r.push_back(rec.x_r.y);
    theta_r.push_back(rec.x_r.theta);
    x_c.push_back(rec.x_c.x);
    y_c.push_back(rec.x_c.y);
    theta_c.push_back(rec.x_c.theta);
    x_e.push_back(rec.err.x_e);
    y_e.push_back(rec.err.y_e);
    theta_e.push_back(rec.err.theta_e);
    nu.push_back(rec.u.nu);
    omega.push_back(rec.u.omega);
    n_ul.push_back(rec.n_ul);
    max_eig.push_back(rec.stability ? rec.stability->max_magnitude : std::nan(""));
  }
  py::dict trace;
  trace["t"] = t;
  trace["x_r"] = x_r;
  trace["y_r"] = y_r;
  trace["theta_r"] = theta_r;
  trace["x_c"] = x_c;
  trace["y_c"] = y_c;
  trace["theta_c"] = theta_c;
  trace["x_e"] = x_e;
  trace["y_e"] = y_e;
  trace["theta_e"] = theta_e;
  trace["nu"] = nu;
  trace["omega"] = omega;
  trace["n_ul"] = n_ul;
  trace["max_eig_mag"] = max_eig;

  const RunMetrics& m = r.metrics;
  py::dict metrics;
  metrics["lateral"] = signal_dict(m.lateral);
  metrics["nu_tracking"] = signal_dict(m.nu_tracking);
  metrics["peak_abs_nu"] = m.peak_abs_nu;
  metrics["max_abs_y_e"] = m.max_abs_y_e;
  metrics["final_error_norm"] = m.final_error_norm;
  metrics["unstable_step_fraction"] = m.unstable_step_fraction;
  metrics["marginal_step_fraction"] = m.marginal_step_fraction;
  metrics["worst_max_eig"] = m.worst_max_eig;
  metrics["saturated_steps"] = m.saturated_steps;

  py::dict out;
  out["status"] = r.status == RunStatus::ok ? "ok" : "diverged";
  out["diagnostic"] = r.diagnostic;
  out["trace"] = trace;
  out["metrics"] = metrics;
  return out;
}

SimConfig with_overrides(SimConfig c, const py::dict& overrides) {
  for (auto [k, v] : overrides) apply_parameter(c, k.cast<std::string>(), v.cast<double>());
  return c;
}

}  // namespace

PYBIND11_MODULE(_cloudagv, m) {
  m.doc() = "Cloud-controlled AGV tracking simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConfigFileError>(m, "ConfigFileError", PyExc_FileNotFoundError);

  py::class_<Pose>(m, "Pose")
      .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0,
           py::arg("theta") = 0.0)
      .def_readwrite("x", &Pose::x)
      .def_readwrite("y", &Pose::y)
      .def_readwrite("theta", &Pose::theta)
      .def("__eq__", [](const Pose& a, const Pose& b) { return a == b; })
      .def("__repr__", [](const Pose& p) {
        return "Pose(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " +
               std::to_string(p.theta) + ")";
      });

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init<double, double>(), py::arg("nu") = 0.0, py::arg("omega") = 0.0)
      .def_readwrite("nu", &ControlInput::nu)
      .def_readwrite("omega", &ControlInput::omega);

  py::class_<ErrorVec>(m, "ErrorVec")
      .def(py::init<double, double, double>(), py::arg("x_e") = 0.0, py::arg("y_e") = 0.0,
           py::arg("theta_e") = 0.0)
      .def_readwrite("x_e", &ErrorVec::x_e)
      .def_readwrite("y_e", &ErrorVec::y_e)
      .def_readwrite("theta_e", &ErrorVec::theta_e);

  py::class_<Gains>(m, "Gains")
      .def(py::init<double, double, double>(), py::arg("kx") = 25.0, py::arg("ky") = 64.0,
           py::arg("ktheta") = 16.0)
      .def_readwrite("kx", &Gains::kx)
      .def_readwrite("ky", &Gains::ky)
      .def_readwrite("ktheta", &Gains::ktheta);

  py::class_<ReferencePoint>(m, "ReferencePoint")
      .def(py::init<Pose, double, double>(), py::arg("pose") = Pose{}, py::arg("nu_r") = 0.0,
           py::arg("omega_r") = 0.0)
      .def_readwrite("pose", &ReferencePoint::pose)
      .def_readwrite("nu_r", &ReferencePoint::nu_r)
      .def_readwrite("omega_r", &ReferencePoint::omega_r);

  m.def("normalize_angle", &normalize_angle, py::arg("theta"));
  m.def("step_euler", &step_euler, py::arg("pose"), py::arg("u"), py::arg("ts"));
  m.def("compute_error", &compute_error, py::arg("x_r"), py::arg("x_c"));
  m.def("control_law", &control_law, py::arg("err"), py::arg("ref"), py::arg("gains"));
  m.def("saturate", &saturate, py::arg("u"), py::arg("nu_max") = py::none());
  m.def(
      "control_matrix_A",
      [](double th_now, double th_stale, double nu, const Gains& g, double ts) {
        return to_rows(control_matrix_A(th_now, th_stale, nu, g, ts));
      },
      py::arg("theta_now"), py::arg("theta_stale"), py::arg("nu_r_stale"), py::arg("gains"),
      py::arg("ts"));
  m.def(
      "eigenvalues_3x3",
      [](const Rows& a) {
        const auto e = eigenvalues_3x3(from_rows(a)).values;
        return std::vector<std::complex<double>>(e.begin(), e.end());
      },
      py::arg("matrix"));
  m.def(
      "check_stability_step",
      [](const Rows& a, double tol) {
        const auto r = check_stability_step(from_rows(a), tol);
        return py::make_tuple(r.max_magnitude, std::string(to_string(r.classification)));
      },
      py::arg("matrix"), py::arg("tol") = kDefaultMarginTol);

  // Config-driven entry points work on the resolved YAML text so that Python
  // callers see exactly what the CLI sees.
  m.def(
      "parse_config", [](const std::string& text) { return dump_config(parse_config(text)); },
      py::arg("yaml_text"), "Validate a config document and return it fully resolved.");
  m.def(
      "load_config",
      [](const std::string& path) { return dump_config(load_config_file(path)); },
      py::arg("path"));
  m.def(
      "run",
      [](const std::string& yaml_text, const py::dict& overrides) {
        const SimConfig c = with_overrides(parse_config(yaml_text).sim, overrides);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(c);
        }
        return result_dict(r);
      },
      py::arg("yaml_text"), py::arg("overrides") = py::dict());
  m.def(
      "stability_map",
      [](const std::string& yaml_text, const std::vector<double>& kx,
         const std::vector<std::size_t>& n_ul) {
        const SimConfig c = parse_config(yaml_text).sim;
        StabilityMap map;
        {
          py::gil_scoped_release release;
          map = stability_map(c, kx, n_ul);
        }
        std::vector<py::dict> cells;
        for (const auto& cell : map.cells) {
          py::dict d;
          d["kx"] = cell.kx;
          d["n_ul"] = cell.n_ul;
          d["worst_max_eig"] = cell.worst_max_eig;
          d["unstable_fraction"] = cell.unstable_fraction;
          d["worst_class"] = std::string(to_string(cell.worst_class));
          cells.push_back(std::move(d));
        }
        return cells;
      },
      py::arg("yaml_text"), py::arg("kx_values"), py::arg("n_ul_values"));
}
