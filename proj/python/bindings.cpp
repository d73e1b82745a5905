#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fwt/baseline_existing.hpp"
#include "fwt/config.hpp"
#include "fwt/harness.hpp"
#include "fwt/json_io.hpp"
#include "fwt/user_game.hpp"

namespace py = pybind11;

namespace {

py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::string scalar_text(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) throw std::invalid_argument("boolean parameter value");
  if (py::isinstance<py::int_>(v)) return std::to_string(v.cast<long long>());
  if (py::isinstance<py::float_>(v)) return py::repr(v).cast<std::string>();
  return v.cast<std::string>();
}

fwt::SystemParams params_from(const std::optional<py::dict>& d) {
  fwt::SystemParams p;
  if (d) {
    for (const auto& [k, v] : *d) {
      const std::string key = k.cast<std::string>();
      std::string text;
      if (key == "mining_power" && py::isinstance<py::list>(v)) {
        for (const auto& x : v.cast<py::list>()) text += (text.empty() ? "" : ",") + scalar_text(x);
      } else {
        text = scalar_text(v);
      }
      fwt::apply_param(p, key, text);
    }
  }
  const auto check = fwt::validate_params(p);
  if (!check.ok()) throw std::invalid_argument("invalid parameters: " + check.joined());
  return p;
}

fwt::TaxSplit split_from(const std::string& s) {
  if (s == "fairness") return fwt::TaxSplit::Fairness;
  if (s == "uniform") return fwt::TaxSplit::Uniform;
  throw std::invalid_argument("tax_split must be fairness or uniform");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fee and waiting tax mechanism: closed forms, equilibrium checks and simulator";

  m.def("default_params", [] { return to_py(fwt::to_json(fwt::SystemParams::calibrated())); });

  m.def("params", [](const std::optional<py::dict>& overrides) {
    return to_py(fwt::to_json(params_from(overrides)));
  }, py::arg("overrides") = py::none());

  m.def("solve", [](const std::optional<py::dict>& params, const std::string& tax_split,
                    std::optional<double> hetero_ratio, bool existing) {
    const auto p = params_from(params);
    std::optional<fwt::HeteroCostParams> hc;
    if (hetero_ratio) {
      hc = fwt::HeteroCostParams::from_ratio(p.storage_cost_per_byte, *hetero_ratio);
      const auto v = fwt::validate_hetero(*hc);
      if (!v.ok()) throw std::invalid_argument(v.joined());
    }
    nlohmann::json j = fwt::to_json(fwt::solve(p, split_from(tax_split), hc));
    if (existing)
      j["existing"] = fwt::to_json(hc ? fwt::existing_equilibrium_hetero(p, *hc) : fwt::existing_equilibrium(p));
    return to_py(j);
  }, py::arg("params") = py::none(), py::arg("tax_split") = "fairness",
     py::arg("hetero_ratio") = py::none(), py::arg("existing") = false);

  m.def("existing", [](const std::optional<py::dict>& params, int fee_grid) {
    fwt::ExistingOptions opt;
    opt.fee_grid = fee_grid;
    return to_py(fwt::to_json(fwt::existing_equilibrium(params_from(params), opt)));
  }, py::arg("params") = py::none(), py::arg("fee_grid") = 200);

  m.def("sweep", [](const std::string& axis, const std::optional<py::dict>& params,
                    std::optional<double> lo, std::optional<double> hi, int steps,
                    double high_fraction, const std::string& tax_split, bool paper_scale) {
    fwt::SweepOptions opt;
    opt.axis = fwt::parse_axis(axis);
    opt.lo = lo;
    opt.hi = hi;
    opt.steps = steps;
    opt.high_fraction = high_fraction;
    opt.split = split_from(tax_split);
    opt.paper_scale = paper_scale;
    if (steps < 1) throw std::invalid_argument("steps must be positive");
    std::ostringstream os;
    fwt::write_sweep_csv(os, fwt::sweep(params_from(params), opt));
    return os.str();
  }, py::arg("axis"), py::arg("params") = py::none(), py::arg("lo") = py::none(),
     py::arg("hi") = py::none(), py::arg("steps") = 10, py::arg("high_fraction") = 0.5,
     py::arg("tax_split") = "fairness", py::arg("paper_scale") = false,
     "Sweep one axis; returns the CSV text.");

  m.def("simulate", [](const std::optional<py::dict>& params, const std::string& scheme,
                       double horizon, double warmup, int replications, std::uint64_t seed,
                       const std::string& tax_split) {
    fwt::SimulateOptions opt;
    opt.scheme = scheme;
    opt.horizon = horizon;
    opt.warmup = warmup;
    opt.replications = replications;
    opt.seed = seed;
    opt.split = split_from(tax_split);
    const auto p = params_from(params);
    nlohmann::json j;
    {
      py::gil_scoped_release release;
      j = fwt::simulate(p, opt);
    }
    return to_py(j);
  }, py::arg("params") = py::none(), py::arg("scheme") = "fwt", py::arg("horizon") = 0.0,
     py::arg("warmup") = 0.1, py::arg("replications") = 10, py::arg("seed") = 1,
     py::arg("tax_split") = "fairness");

  m.def("check", [](const std::string& suite, std::optional<int> budget, std::uint64_t seed,
                    const std::optional<py::dict>& params) {
    const auto p = params_from(params);
    nlohmann::json j;
    {
      py::gil_scoped_release release;
      j = fwt::to_json(fwt::run_check(suite, budget, seed, p));
    }
    return to_py(j);
  }, py::arg("suite"), py::arg("budget") = py::none(), py::arg("seed") = 1,
     py::arg("params") = py::none());

  m.def("check_suites", &fwt::check_suites);

  m.def("jain_index", py::overload_cast<const std::vector<double>&>(&fwt::jain_index),
        py::arg("payoffs"));

  m.def("waiting_rate", [](double own_high, double own_low, double others_high,
                           double others_low, double rho_high, double rho_low,
                           const std::optional<py::dict>& params) {
    return fwt::waiting_rate(fwt::RatePair{own_high, own_low}, fwt::ClassLoad{others_high, others_low},
                             fwt::FeeMenu{rho_high, rho_low}, params_from(params));
  }, py::arg("own_high"), py::arg("own_low"), py::arg("others_high"), py::arg("others_low"),
     py::arg("rho_high"), py::arg("rho_low"), py::arg("params") = py::none());
}
