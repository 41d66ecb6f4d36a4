#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bdqsd/commands.hpp"
#include "bdqsd/errors.hpp"
#include "bdqsd/model.hpp"
#include "bdqsd/qsd.hpp"
#include "bdqsd/simulate.hpp"
#include "bdqsd/spectral.hpp"
#include "bdqsd/transient.hpp"

namespace py = pybind11;
using namespace bdqsd;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

// Index n of the returned arrays is state n; slot 0 holds 0.
py::array_t<double> table_column(const CoefficientTable& t, double (CoefficientTable::*get)(std::int64_t) const) {
  std::vector<double> v(static_cast<std::size_t>(t.N() + 1), 0.0);
  for (std::int64_t n = 1; n <= t.N(); ++n) v[n] = (t.*get)(n);
  return as_array(v);
}

// Everything the analyze command needs, kept alive together since the
// table refers to the model.
struct Analysis {
  RateModel model;
  Landmarks landmarks;
  CoefficientTable table;
  SpectralSolution spectral;
  QsdResult qsd;

  explicit Analysis(const ModelSpec& spec, bool oracle)
      : model(spec),
        landmarks(compute_landmarks(model)),
        table(build_table(model, landmarks)),
        spectral(solve_spectral(table, landmarks, SpectralOptions{oracle})),
        qsd(analyze_qsd(spectral, table, landmarks)) {}
};

ModelSpec make_spec(const std::string& family, const py::dict& params, double K) {
  auto get = [&](const char* key, double fallback) {
    return params.contains(key) ? params[key].cast<double>() : fallback;
  };
  if (family == "logistic") return {LogisticParams{get("lam", 0.0), get("mu", 0.0)}, K};
  if (family == "power_death") {
    return {PowerDeathParams{get("a", 0.0), get("b", 0.0), get("cc", 0.0), get("p", 1.0)}, K};
  }
  throw InvalidModel("unknown family '" + family + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quasi-stationary analysis of density-dependent birth-and-death chains";

  static py::exception<Error> base(m, "Error");
  py::register_exception<InvalidModel>(m, "InvalidModel", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<TimeTooLarge>(m, "TimeTooLarge", base.ptr());

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init(&make_spec), py::arg("family"), py::arg("params"), py::arg("K"))
      .def_property_readonly("family", [](const ModelSpec& s) { return family_name(s.family); })
      .def_readonly("K", &ModelSpec::K);

  py::class_<Landmarks>(m, "Landmarks")
      .def_readonly("x_star", &Landmarks::x_star)
      .def_readonly("x_2star", &Landmarks::x_2star)
      .def_readonly("x_3star", &Landmarks::x_3star)
      .def_readonly("theta", &Landmarks::theta)
      .def_readonly("n_star", &Landmarks::n_star)
      .def_readonly("n_2star", &Landmarks::n_2star)
      .def_readonly("n_3star", &Landmarks::n_3star)
      .def_readonly("h_second", &Landmarks::h_second)
      .def_readonly("sigma", &Landmarks::sigma)
      .def_readonly("c", &Landmarks::c)
      .def_readonly("a_rate", &Landmarks::a_rate);

  py::class_<AssumptionCheck>(m, "AssumptionCheck")
      .def_readonly("name", &AssumptionCheck::name)
      .def_readonly("passed", &AssumptionCheck::passed)
      .def_readonly("witness", &AssumptionCheck::witness);

  m.def(
      "validate",
      [](const ModelSpec& spec, int grid_points) {
        return validate_assumptions(spec, grid_points).checks;
      },
      py::arg("spec"), py::arg("grid_points") = 2000);

  m.def(
      "landmarks", [](const ModelSpec& spec) { return compute_landmarks(RateModel(spec)); },
      py::arg("spec"));

  py::class_<Analysis>(m, "Analysis")
      .def(py::init<const ModelSpec&, bool>(), py::arg("spec"), py::arg("oracle") = false)
      .def_readonly("landmarks", &Analysis::landmarks)
      .def_property_readonly("N", [](const Analysis& a) { return a.table.N(); })
      .def_property_readonly("lambda_", [](const Analysis& a) { return table_column(a.table, &CoefficientTable::lambda); })
      .def_property_readonly("mu", [](const Analysis& a) { return table_column(a.table, &CoefficientTable::mu); })
      .def_property_readonly("log_pi", [](const Analysis& a) { return table_column(a.table, &CoefficientTable::log_pi); })
      .def_property_readonly("rho0", [](const Analysis& a) { return a.spectral.rho0; })
      .def_property_readonly("log_rho0", [](const Analysis& a) { return a.spectral.log_rho0; })
      .def_property_readonly("rho0_asymptotic", [](const Analysis& a) { return a.spectral.rho0_asymptotic; })
      .def_property_readonly("rho1", [](const Analysis& a) { return a.spectral.rho1; })
      .def_property_readonly("gap_lb", [](const Analysis& a) { return a.spectral.gap_lb; })
      .def_property_readonly("residual", [](const Analysis& a) { return a.spectral.residual; })
      .def_property_readonly("phi", [](const Analysis& a) { return as_array(a.spectral.phi); })
      .def_property_readonly("nu", [](const Analysis& a) { return as_array(a.qsd.nu); })
      .def_property_readonly("gaussian", [](const Analysis& a) { return as_array(a.qsd.gaussian); })
      .def_property_readonly("mean", [](const Analysis& a) { return a.qsd.mean; })
      .def_property_readonly("variance", [](const Analysis& a) { return a.qsd.variance; })
      .def_property_readonly("tv_gauss", [](const Analysis& a) { return a.qsd.tv_gauss; })
      .def_property_readonly("t0_spectral", [](const Analysis& a) { return a.qsd.t0_spectral; })
      .def_property_readonly("t0_summed", [](const Analysis& a) { return a.qsd.t0_summed; })
      .def_property_readonly("t0_linear", [](const Analysis& a) { return a.qsd.t0_linear; })
      .def(
          "transient",
          [](const Analysis& a, std::int64_t n0, const std::vector<double>& times) {
            std::vector<double> init(static_cast<std::size_t>(a.table.N() + 1), 0.0);
            if (n0 < 1 || n0 > a.table.N()) throw IndexOutOfRange("n0 must lie in [1, N]");
            init[n0] = 1.0;
            py::list out;
            for (const auto& law : transient_laws(a.table, init, times)) {
              py::dict d;
              d["t"] = law.t;
              d["survival"] = law.survival;
              d["conditioned"] = as_array(law.conditioned);
              out.append(d);
            }
            return out;
          },
          py::arg("n0"), py::arg("times"));

  py::class_<SimEstimate>(m, "SimEstimate")
      .def_property_readonly("extinction_times", [](const SimEstimate& e) { return as_array(e.extinction_times); })
      .def_property_readonly("censored", [](const SimEstimate& e) {
        return std::vector<bool>(e.censored.begin(), e.censored.end());
      })
      .def_readonly("rho0_hat", &SimEstimate::rho0_hat)
      .def_readonly("rho0_ci_lo", &SimEstimate::rho0_ci_lo)
      .def_readonly("rho0_ci_hi", &SimEstimate::rho0_ci_hi)
      .def_readonly("events", &SimEstimate::events);

  m.def(
      "simulate",
      [](const ModelSpec& spec, std::int64_t n0, std::int64_t replicas, double t_max,
         std::vector<double> checkpoints, std::uint64_t seed, int threads) {
        SimConfig c;
        c.model = spec;
        c.n0 = n0;
        c.replicas = replicas;
        c.t_max = t_max;
        c.checkpoints = std::move(checkpoints);
        c.master_seed = seed;
        c.threads = threads;
        py::gil_scoped_release release;
        return run_ssa(c);
      },
      py::arg("spec"), py::arg("n0"), py::arg("replicas"), py::arg("t_max"),
      py::arg("checkpoints") = std::vector<double>{}, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def(
      "run_command",
      [](const std::string& command, const std::string& config, const std::string& out_dir,
         std::uint64_t seed, int threads) {
        RunOptions o;
        o.out_dir = out_dir;
        o.seed = seed;
        o.threads = threads;
        std::ostringstream log;
        const int code = run_command(command, config, o, log);
        return py::make_tuple(code, log.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out_dir") = ".", py::arg("seed") = 1,
      py::arg("threads") = 1);

  m.def("git_blob_sha1", &git_blob_sha1);
}
