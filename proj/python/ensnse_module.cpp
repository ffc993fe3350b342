// Python bindings: mesh/scheme introspection, probes, and the run /
// convergence drivers with dict-based configuration mirroring RunConfig.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ensnse/harness.hpp"

namespace py = pybind11;

namespace {

ensnse::RunConfig config_from_dict(const py::dict& d) {
  ensnse::RunConfig c;
  auto set = [&](const char* key, auto& field) {
    if (d.contains(key)) field = d[key].cast<std::decay_t<decltype(field)>>();
  };
  set("problem", c.problem);
  set("nu", c.nu);
  set("dt", c.dt);
  set("tfinal", c.tfinal);
  set("grid_n", c.grid_n);
  set("members", c.members);
  set("epsilon", c.epsilon);
  set("scheme", c.scheme);
  set("gamma", c.gamma);
  set("grad_div", c.grad_div);
  set("startup", c.startup);
  set("cfl_threshold", c.cfl_threshold);
  set("format", c.format);
  return c;
}

py::dict run_result_to_dict(const ensnse::RunResult& r) {
  py::dict out;
  out["h"] = r.h;
  py::list members;
  for (std::size_t j = 0; j < r.summary.size(); ++j) {
    const auto& sm = r.summary[j];
    py::dict m;
    m["eps"] = sm.eps;
    m["velocity_inf0"] = sm.velocity_inf0;
    m["gradient_20"] = sm.gradient_20;
    m["pressure_inf0"] = sm.pressure_inf0;
    m["max_cfl"] = sm.max_cfl;
    m["final_kinetic_energy"] = sm.final_kinetic_energy;
    m["t"] = r.errors[j].t;
    m["velocity_l2"] = r.errors[j].velocity_l2;
    m["velocity_h1"] = r.errors[j].velocity_h1;
    m["pressure_l2"] = r.errors[j].pressure_l2;
    members.append(m);
  }
  out["members"] = members;
  out["mean_inf0"] = r.mean_inf0;
  out["mean_grad_20"] = r.mean_grad_20;
  return out;
}

py::dict table_to_dict(const ensnse::ConvergenceTable& t) {
  py::dict out;
  out["scheme"] = t.scheme;
  out["gamma"] = t.gamma;
  out["sampling"] = t.sampling;
  out["pairing"] = t.pairing;
  py::list rows;
  for (const auto& row : t.rows) {
    py::dict r;
    r["dt"] = row.dt;
    r["h"] = row.h;
    r["grid_n"] = row.grid_n;
    r["velocity_inf0"] = row.velocity_inf0;
    r["rate_inf0"] = row.rate_inf0;
    r["gradient_20"] = row.gradient_20;
    r["rate_20"] = row.rate_20;
    r["mean_inf0"] = row.mean_inf0;
    r["mean_grad_20"] = row.mean_grad_20;
    rows.append(r);
  }
  out["rows"] = rows;
  return out;
}

}  // namespace

PYBIND11_MODULE(ensnse, m) {
  m.doc() = "Ensemble solver for time-dependent incompressible flow";

  m.def(
      "unit_mesh_info",
      [](int n) {
        ensnse::Mesh mesh = ensnse::unit_square_mesh(n);
        py::dict d;
        d["vertices"] = mesh.n_vertices();
        d["triangles"] = mesh.n_triangles();
        d["edges"] = mesh.n_edges();
        d["h"] = mesh.h;
        return d;
      },
      py::arg("n"), "Counts and mesh size of the structured unit-square mesh");

  m.def("truncation_probe", &ensnse::truncation_probe, py::arg("gamma"), py::arg("degree"),
        "Truncation error of the blended derivative weights on t^degree");

  m.def(
      "scheme_weights",
      [](const std::string& scheme, double gamma) {
        ensnse::SchemeCoefficients c = scheme == "bdf2" ? ensnse::en_bdf2_coefficients()
                                                        : ensnse::bdf_coefficients(gamma);
        py::dict d;
        d["alpha"] = std::vector<double>(c.alpha.begin(), c.alpha.end());
        d["beta"] = std::vector<double>(c.beta.begin(), c.beta.end());
        return d;
      },
      py::arg("scheme") = "blended", py::arg("gamma") = 0.5,
      "Derivative and extrapolation weights of the named scheme");

  m.def(
      "beltrami_velocity",
      [](double a, double d, double nu, double x, double y, double z, double t) {
        ensnse::BeltramiField3D f = ensnse::ethier_steinman(a, d, nu);
        return f.velocity(x, y, z, t);
      },
      py::arg("a"), py::arg("d"), py::arg("nu"), py::arg("x"), py::arg("y"), py::arg("z"),
      py::arg("t"), "Closed-form 3D vortex velocity used for residual validation");

  m.def(
      "run",
      [](const py::dict& config) {
        return run_result_to_dict(ensnse::run_simulation(config_from_dict(config)));
      },
      py::arg("config"), "Run one ensemble simulation; returns errors and summaries");

  m.def(
      "converge",
      [](const py::dict& config, const std::vector<double>& dts) {
        return table_to_dict(ensnse::run_convergence(config_from_dict(config), dts));
      },
      py::arg("config"), py::arg("dts"),
      "Run a convergence ladder over the given time steps");

  py::register_exception<ensnse::ConfigError>(m, "ConfigError");
  py::register_exception<ensnse::BlowupError>(m, "BlowupError");
  py::register_exception<ensnse::SolverError>(m, "SolverError");
}
