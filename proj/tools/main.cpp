#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "moneystat/harness/config.hpp"
#include "moneystat/harness/experiment.hpp"

namespace ms = moneystat::harness;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("config", c.config, "experiment config (JSON)")->required();
  sub->add_option("-o,--out", c.out, "output directory (default: config outputs.directory)");
  sub->add_option("--seed", c.seed, "override the base seed");
  sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ms::ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ms::ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

ms::ExperimentConfig load(const Common& c) {
  json doc = read_json(c.config);
  if (!doc.is_object()) throw ms::ConfigError("config must be a JSON object");
  if (c.seed) doc["seed"] = *c.seed;
  if (c.threads) doc["threads"] = *c.threads;
  return ms::parse_config(doc);
}

std::filesystem::path out_dir(const Common& c, const ms::ExperimentConfig& cfg) {
  return ms::resolve_output_dir(c.out.empty() ? cfg.outputs.directory : c.out);
}

int run_pipeline(const Common& c, ms::Pipeline expected) {
  const ms::ExperimentConfig cfg = load(c);
  if (cfg.pipeline != expected) {
    throw ms::ConfigError("config is a " + ms::pipeline_name(cfg.pipeline) + " experiment; use the '" +
                          ms::pipeline_name(cfg.pipeline) + "' subcommand");
  }
  const auto dir = out_dir(c, cfg);
  const ms::RunManifest m = ms::run_experiment(cfg, dir);
  std::cout << "wrote " << (dir / "manifest.json").string() << " (" << m.files.size() << " files)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical mechanics of money: ensembles, exchange dynamics and monetary cycles"};
  app.require_subcommand(1);

  Common analytic_opts, simulate_opts, transform_opts, pareto_opts, sweep_opts, check_opts;
  auto* analytic = app.add_subcommand("analytic", "closed-form thermodynamics and identity residuals");
  add_common(analytic, analytic_opts);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo exchange dynamics with fits");
  add_common(simulate, simulate_opts);
  auto* transform = app.add_subcommand("transform", "quasi-static paths, Carnot cycle, reserve policy");
  add_common(transform, transform_opts);
  auto* pareto = app.add_subcommand("pareto", "log-income ensemble, samplers and transition scan");
  add_common(pareto, pareto_opts);

  auto* sweep = app.add_subcommand("sweep", "run a config over a parameter or seed sweep");
  add_common(sweep, sweep_opts);
  std::optional<std::uint64_t> sweep_seeds;
  std::string sweep_param;
  std::string sweep_values;
  sweep->add_option("--seeds", sweep_seeds, "sweep over this many consecutive base seeds");
  sweep->add_option("--param", sweep_param, "JSON pointer into the config, e.g. /model/overdraft");
  sweep->add_option("--values", sweep_values, "JSON array of values for --param");

  auto* check = app.add_subcommand("check", "compare a report against expectations");
  add_common(check, check_opts);
  std::string expect_path;
  std::string report_path;
  double tolerance_scale = 1.0;
  check->add_option("--expect", expect_path, "expectations file (default: the config's expectations)");
  check->add_option("--report", report_path, "existing report.json; skips running the experiment");
  check->add_option("--tolerance-scale", tolerance_scale, "multiply every tolerance (fault injection)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*analytic) return run_pipeline(analytic_opts, ms::Pipeline::Analytic);
    if (*simulate) return run_pipeline(simulate_opts, ms::Pipeline::Simulate);
    if (*transform) return run_pipeline(transform_opts, ms::Pipeline::Transform);
    if (*pareto) return run_pipeline(pareto_opts, ms::Pipeline::Pareto);

    if (*sweep) {
      json doc = read_json(sweep_opts.config);
      if (!doc.is_object()) throw ms::ConfigError("config must be a JSON object");
      if (sweep_opts.seed) doc["seed"] = *sweep_opts.seed;
      if (sweep_opts.threads) doc["threads"] = *sweep_opts.threads;
      if (sweep_seeds && !sweep_param.empty()) throw ms::ConfigError("give --seeds or --param, not both");
      if (sweep_seeds) doc["sweep"] = {{"seeds", *sweep_seeds}};
      if (!sweep_param.empty()) {
        json values;
        try {
          values = json::parse(sweep_values);
        } catch (const json::parse_error&) {
          throw ms::ConfigError("--values must be a JSON array");
        }
        doc["sweep"] = {{"pointer", sweep_param}, {"values", values}};
      }
      const ms::ExperimentConfig cfg = ms::parse_config(doc);
      const auto dir = out_dir(sweep_opts, cfg);
      const auto manifests = ms::run_sweep(cfg, dir);
      std::cout << "wrote " << (dir / "manifest.json").string() << " (" << manifests.size() << " points)\n";
      return kExitOk;
    }

    if (*check) {
      const ms::ExperimentConfig cfg = load(check_opts);
      const std::vector<ms::Expectation> expectations =
          expect_path.empty() ? cfg.expectations : ms::parse_expectations(read_json(expect_path));
      if (expectations.empty()) throw ms::ConfigError("no expectations to check");
      json report;
      if (!report_path.empty()) {
        report = read_json(report_path);
      } else {
        report = ms::run_experiment(cfg, out_dir(check_opts, cfg)).report;
      }
      const ms::CheckResult res = ms::compare_report(report, expectations, tolerance_scale);
      for (const auto& line : res.lines) {
        std::cout << (line.pass ? "PASS " : "FAIL ") << line.field << "  " << line.detail << '\n';
      }
      std::cout << (res.ok() ? "check passed" : "check FAILED") << '\n';
      return res.exit_code();
    }
  } catch (const ms::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitConfig;
}
