#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "moneystat/dynamics.hpp"
#include "moneystat/ensemble.hpp"
#include "moneystat/estimation.hpp"
#include "moneystat/harness/config.hpp"
#include "moneystat/harness/experiment.hpp"
#include "moneystat/pareto.hpp"
#include "moneystat/transform.hpp"

namespace py = pybind11;
using namespace moneystat;

namespace {

py::dict state_dict(const ThermoState& s) {
  py::dict d;
  d["temperature"] = s.temperature;
  d["mean_money"] = s.mean_money;
  d["entropy"] = s.entropy;
  d["free_energy"] = s.free_energy;
  d["n_agents"] = s.n_agents;
  d["pressure"] = s.pressure;
  d["volume"] = s.volume;
  d["chemical_potential"] = s.chemical_potential;
  return d;
}

py::dict cycle_dict(const CycleReport& c) {
  py::dict d;
  d["work_l"] = c.work_l;
  d["credit_in_ch"] = c.credit_in_ch;
  d["credit_out_cc"] = c.credit_out_cc;
  d["delta_s_hot"] = c.delta_s_hot;
  d["eta"] = c.eta;
  d["carnot_eta"] = c.carnot_eta;
  d["net_credit"] = c.net_credit;
  return d;
}

// JSON crosses the boundary as text; the Python wrapper decodes it.
std::string build_report_text(const std::string& config) {
  return harness::build_report(harness::parse_config(nlohmann::json::parse(config))).dump();
}

std::string run_experiment_text(const std::string& config, const std::string& out_dir) {
  const auto cfg = harness::parse_config(nlohmann::json::parse(config));
  return harness::run_experiment(cfg, out_dir).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "moneystat C++ core";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_static("cash_only", &ModelSpec::cash_only, py::arg("n"), py::arg("volume_y") = 1.0)
      .def_static("overdraft_model", &ModelSpec::overdraft_model, py::arg("n"), py::arg("d"),
                  py::arg("volume_x") = 1.0)
      .def_static("multi_account", &ModelSpec::multi_account, py::arg("accounts"), py::arg("overdrafts"),
                  py::arg("volume_x") = 1.0)
      .def_static("combined", &ModelSpec::combined, py::arg("n"), py::arg("d"))
      .def_static("restricted", &ModelSpec::restricted, py::arg("n"), py::arg("d"))
      .def_static("credit_market", &ModelSpec::credit_market, py::arg("n"), py::arg("monetary_base"))
      .def_static("multi_asset", &ModelSpec::multi_asset, py::arg("n"), py::arg("classes"))
      .def_property_readonly("kind", [](const ModelSpec& s) { return std::string(kind_name(s.kind)); })
      .def_readwrite("n_agents", &ModelSpec::n_agents)
      .def_readwrite("overdraft", &ModelSpec::overdraft)
      .def("volume", &ModelSpec::volume)
      .def("__repr__", [](const ModelSpec& s) { return harness::model_to_json(s).dump(); });

  m.def("temperature_closed_form", &temperature_closed_form, py::arg("spec"), py::arg("money"));
  m.def("log_partition", &log_partition, py::arg("spec"), py::arg("temperature"));
  m.def("thermo_state", [](const ModelSpec& s, double t) { return state_dict(thermo_state(s, t)); },
        py::arg("spec"), py::arg("temperature"));
  m.def("microcanonical_entropy", &microcanonical_entropy, py::arg("spec"), py::arg("money"));
  m.def("mean_money_restricted", &mean_money_restricted, py::arg("spec"), py::arg("temperature"));
  m.def("invert_temperature_restricted", &invert_temperature_restricted, py::arg("spec"), py::arg("money"));

  py::class_<SampleSet>(m, "SampleSet")
      .def_readonly("coord_names", &SampleSet::coord_names)
      .def_readonly("snapshot_steps", &SampleSet::snapshot_steps)
      .def_property_readonly("accepted_events", [](const SampleSet& s) { return s.meta.accepted_events; })
      .def_property_readonly("max_relative_drift", [](const SampleSet& s) { return s.meta.audit.max_relative_drift; })
      .def_property_readonly("accounting_exact", [](const SampleSet& s) { return s.meta.audit.accounting_exact; })
      .def("rows", &SampleSet::rows)
      .def("coordinate", [](const SampleSet& s, const std::string& n) { return s.coordinate(n); })
      .def("snapshot", [](const SampleSet& s, std::size_t i, const std::string& n) { return s.snapshot(i, n); });

  m.def(
      "run_chain",
      [](const ModelSpec& spec, double total, std::uint64_t steps, std::uint64_t seed, double credit,
         std::optional<std::uint64_t> burn_in, std::optional<std::uint64_t> thin, const std::string& policy) {
        ChainParams p;
        p.policy = parse_policy(policy);
        p.total = total;
        p.credit = credit;
        p.steps = steps;
        p.burn_in = burn_in;
        p.thin = thin;
        p.seed = seed;
        py::gil_scoped_release release;
        return run_chain(spec, p);
      },
      py::arg("spec"), py::arg("total"), py::arg("steps"), py::arg("seed") = 0, py::arg("credit") = 0.0,
      py::arg("burn_in") = py::none(), py::arg("thin") = py::none(), py::arg("policy") = "equal");

  m.def(
      "fit_shifted_exponential",
      [](const std::vector<double>& x, double floor) {
        const FitReport f = fit_shifted_exponential(x, floor);
        py::dict d;
        d["t_hat"] = f.t_hat;
        d["stderr"] = f.stderr_t;
        d["n"] = f.n;
        d["ks_d"] = f.ks_d;
        d["ks_pass_1pct"] = f.ks_pass_1pct;
        return d;
      },
      py::arg("samples"), py::arg("floor") = 0.0);
  m.def(
      "ks_statistic_exponential",
      [](const std::vector<double>& x, double floor, double t) {
        const KsResult r = ks_statistic_exponential(x, floor, t);
        return py::make_tuple(r.statistic, r.pass_1pct);
      },
      py::arg("samples"), py::arg("floor"), py::arg("temperature"));
  m.def("hill_tail_index", [](const std::vector<double>& x, std::size_t k) { return hill_tail_index(x, k); },
        py::arg("samples"), py::arg("k"));

  m.def("carnot_cycle",
        [](const ModelSpec& s, double th, double tc, double v1, double v2) {
          return cycle_dict(carnot_cycle(s, th, tc, v1, v2));
        },
        py::arg("spec"), py::arg("t_hot"), py::arg("t_cold"), py::arg("v1"), py::arg("v2"));
  m.def("adiabat_end_temperature",
        [](const ModelSpec& s, double t, double v, double v_end) { return adiabat_solve(s, t, v, v_end).t_end; },
        py::arg("spec"), py::arg("t"), py::arg("v"), py::arg("v_end"));
  m.def("fractional_reserve",
        [](double r, double base, double n) {
          const ReserveState s = fractional_reserve(r, base, n);
          return py::make_tuple(s.money, s.temperature);
        },
        py::arg("r"), py::arg("base"), py::arg("n_agents"));
  m.def("isothermal_base", &isothermal_base, py::arg("r"), py::arg("base"), py::arg("r_new"));

  py::class_<ParetoSpec>(m, "ParetoSpec")
      .def(py::init([](std::int64_t n, double j, double t_max, double v) { return ParetoSpec{n, j, t_max, v}; }),
           py::arg("n_agents") = 1, py::arg("floor") = 1.0, py::arg("t_max") = 1.0, py::arg("volume") = 1.0)
      .def_readwrite("n_agents", &ParetoSpec::n_agents)
      .def_readwrite("floor", &ParetoSpec::floor)
      .def_readwrite("t_max", &ParetoSpec::t_max)
      .def_readwrite("volume", &ParetoSpec::volume);
  m.def("pareto_log_partition", &pareto_log_partition, py::arg("spec"), py::arg("temperature"));
  m.def("pareto_entropy", &pareto_entropy, py::arg("spec"), py::arg("temperature"));
  m.def("pareto_mean_log_income", &pareto_mean_log_income, py::arg("spec"), py::arg("temperature"));
  m.def("pareto_entropy_response", &pareto_entropy_response, py::arg("spec"), py::arg("temperature"));
  m.def("pareto_direct_sample", &pareto_direct_sample, py::arg("spec"), py::arg("temperature"), py::arg("n"),
        py::arg("seed") = 0);

  m.def("_build_report", &build_report_text, py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
  m.def("_run_experiment", &run_experiment_text, py::arg("config_json"), py::arg("out_dir"),
        py::call_guard<py::gil_scoped_release>());
  m.attr("__version__") = harness::kVersion;
}
