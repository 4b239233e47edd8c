#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "tps/app/commands.hpp"
#include "tps/app/config.hpp"
#include "tps/error.hpp"
#include "tps/pinn/model_io.hpp"
#include "tps/pinn/network.hpp"
#include "tps/thermal/analytic.hpp"
#include "tps/thermal/solver.hpp"
#include "tps/uq/reliability.hpp"
#include "tps/uq/stats.hpp"

namespace py = pybind11;
using namespace tps;

namespace {

app::RunConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.empty() ? "{}" : text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return app::config_from_json(doc);
}

using Command = app::RunSummary (*)(const app::RunConfig&, const std::string&);

std::string run_command(const std::string& name, const std::string& config_json, const std::string& out_dir) {
  const app::RunConfig config = parse_config(config_json);
  app::RunSummary summary;
  {
    py::gil_scoped_release release;
    if (name == "train") {
      summary = app::cmd_train(config, out_dir);
    } else {
      static const std::pair<const char*, Command> table[] = {
          {"solve", app::cmd_solve},   {"analytic", app::cmd_analytic}, {"validate", app::cmd_validate},
          {"sample", app::cmd_sample}, {"verify", app::cmd_verify},     {"bench", app::cmd_bench},
      };
      Command fn = nullptr;
      for (const auto& [key, f] : table) {
        if (name == key) fn = f;
      }
      if (fn == nullptr) throw InvalidInput("unknown command '" + name + "'");
      summary = fn(config, out_dir);
    }
  }
  return summary.to_json().dump();
}

py::tuple solve(const std::string& config_json, double rho, double k, double cp) {
  const app::RunConfig config = parse_config(config_json);
  const thermal::TemperatureField f = thermal::solve_fd(config.scenario, {rho, k, cp}, config.grid);
  std::vector<double> x(f.nodes());
  std::vector<double> t(f.steps() + 1);
  for (std::size_t i = 0; i < f.nodes(); ++i) x[i] = f.x(i);
  for (std::size_t n = 0; n <= f.steps(); ++n) t[n] = f.time(n);
  const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(t.size()), static_cast<py::ssize_t>(x.size())};
  return py::make_tuple(py::array_t<double>(static_cast<py::ssize_t>(x.size()), x.data()),
                        py::array_t<double>(static_cast<py::ssize_t>(t.size()), t.data()),
                        py::array_t<double>(shape, f.values().data()));
}

class Surrogate {
 public:
  explicit Surrogate(const std::string& path) : model_(pinn::load_model(path)) {}

  py::array_t<double> predict(py::array_t<double, py::array::c_style | py::array::forcecast> points) const {
    if (points.ndim() != 2 || points.shape(1) != 5) throw InvalidInput("points must have shape (n, 5): x, t, rho, k, cp");
    const auto p = points.unchecked<2>();
    std::vector<pinn::QueryPoint> q(static_cast<std::size_t>(p.shape(0)));
    for (py::ssize_t i = 0; i < p.shape(0); ++i) {
      q[static_cast<std::size_t>(i)] = {p(i, 0), p(i, 1), {p(i, 2), p(i, 3), p(i, 4)}};
    }
    const std::vector<double> out = pinn::predict_batch(model_.params, model_.norm, q);
    return py::array_t<double>(static_cast<py::ssize_t>(out.size()), out.data());
  }

  py::dict scenario() const {
    const auto& s = model_.scenario;
    py::dict d;
    d["thickness"] = s.thickness;
    d["heat_flux"] = s.heat_flux;
    d["duration"] = s.duration;
    d["initial_temp"] = s.initial_temp;
    d["threshold"] = s.threshold;
    d["eval_time"] = s.eval_time;
    return d;
  }

  std::size_t parameter_count() const { return static_cast<std::size_t>(model_.params.flat().size()); }

 private:
  pinn::NetworkModel model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Thermal film design: heat conduction, neural surrogate, Bayesian sampling";

  auto base = py::register_exception<Error>(m, "TpsError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def("run_command", &run_command, py::arg("name"), py::arg("config_json"), py::arg("out_dir"),
        "Run one pipeline command and return its summary as a JSON string.");
  m.def("normalized_config", [](const std::string& text) { return app::config_to_json(parse_config(text)).dump(); },
        py::arg("config_json"));
  m.def("solve", &solve, py::arg("config_json"), py::arg("rho") = 200.0, py::arg("k") = 1.0, py::arg("cp") = 800.0,
        "Finite-difference field: returns (x, t, T) with T of shape (len(t), len(x)).");
  m.def(
      "analytic",
      [](const std::string& config_json, double x, double t, double rho, double k, double cp, int terms) {
        return thermal::analytic_slab_flux(parse_config(config_json).scenario, {rho, k, cp}, x, t, terms);
      },
      py::arg("config_json"), py::arg("x"), py::arg("t"), py::arg("rho") = 200.0, py::arg("k") = 1.0,
      py::arg("cp") = 800.0, py::arg("terms") = 100);
  m.def("z_quantile", &uq::z_quantile, py::arg("p"));
  m.def("normal_cdf", &uq::normal_cdf, py::arg("z"));
  m.def(
      "reliability",
      [](const std::vector<double>& temps, double threshold) {
        return uq::reliability_of_temperatures(temps, threshold, "python").r_hat;
      },
      py::arg("temperatures"), py::arg("threshold"));

  py::class_<Surrogate>(m, "Surrogate")
      .def(py::init<const std::string&>(), py::arg("model_path"))
      .def("predict", &Surrogate::predict, py::arg("points"))
      .def_property_readonly("scenario", &Surrogate::scenario)
      .def_property_readonly("parameter_count", &Surrogate::parameter_count);
}
