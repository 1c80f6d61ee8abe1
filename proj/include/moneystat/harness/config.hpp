#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moneystat/dynamics.hpp"
#include "moneystat/model.hpp"
#include "moneystat/pareto.hpp"

namespace moneystat::harness {

/// Malformed JSON, schema violation or infeasible model. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pipeline { Analytic, Simulate, Transform, Pareto };

std::string pipeline_name(Pipeline p);
Pipeline parse_pipeline(const std::string& name);

struct InitialState {
  InitPolicy policy = InitPolicy::Equal;
  std::optional<double> total;        // conserved money (Q0 for account models)
  std::optional<double> temperature;  // alternative to total
  std::optional<double> credit;       // CreditMarket outstanding credit
};

struct KernelParams {
  std::uint64_t steps = 0;
  std::optional<std::uint64_t> burn_in;
  std::optional<std::uint64_t> thin;
  std::uint64_t audit_every = 100000;
};

struct OutputOptions {
  std::string directory = "out";
  bool samples = true;
  std::uint64_t sample_snapshots = 5;  // last snapshots of replica 0 written to samples.csv
  bool histogram = true;
};

struct ReportOptions {
  bool ks_final_snapshot = true;  // KS on the last snapshot; false pools all snapshots
  std::optional<double> histogram_width;  // Freedman-Diaconis when absent
};

struct AnalyticOptions {
  std::vector<double> temperatures{1.0};
  std::vector<double> volumes{1.0};
  std::vector<double> n_values;  // defaults to model.n_agents
  double fd_step = 1e-5;
};

struct TransformOptions {
  double t_hot = 4.0;
  double t_cold = 2.0;
  double v1 = 1.0;
  double v2 = 2.718281828459045;
  std::optional<double> v_free;  // free-expansion leg from v1 to v_free
  std::optional<double> reserve_ratio;
  std::optional<double> reserve_ratio_new;
  double reserve_base = 1.0;
  int path_points = 32;
};

struct ParetoOptions {
  ParetoSpec spec;
  double temperature = 1.0;
  std::uint64_t direct_samples = 100000;
  std::optional<std::uint64_t> hill_k;
  std::optional<double> theta;  // enables the pairwise dynamics
  std::vector<double> scan;
};

struct Expectation {
  std::string field;  // JSON pointer into the report
  nlohmann::json value;
  double tolerance = 0.0;
  bool relative = true;
};

struct SweepSpec {
  std::optional<std::string> pointer;  // JSON pointer into the config
  std::vector<nlohmann::json> values;
  std::optional<std::uint64_t> seeds;  // sweep over base seeds seed, seed+1, ...
};

struct ExperimentConfig {
  nlohmann::json source;  // normalized echo of the input document
  std::string name;
  Pipeline pipeline = Pipeline::Analytic;
  std::optional<ModelSpec> model;
  InitialState initial;
  KernelParams kernel;
  std::uint64_t seed = 0;
  std::uint64_t replicas = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  OutputOptions outputs;
  ReportOptions report;
  AnalyticOptions analytic;
  TransformOptions transform;
  std::optional<ParetoOptions> pareto;
  std::vector<Expectation> expectations;
  std::optional<SweepSpec> sweep;
};

/// Parse and validate. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Expectations as a bare array or an object {"expectations": [...]}.
std::vector<Expectation> parse_expectations(const nlohmann::json& doc);

nlohmann::json model_to_json(const ModelSpec& spec);

/// Conserved total reproducing temperature T under the model's closed form.
double total_for_temperature(const ModelSpec& spec, double temperature);

/// Environment variable that overrides the output root.
inline constexpr const char* kOutRootEnv = "MONEYSTAT_OUT_ROOT";

/// Relative output directories are resolved against $MONEYSTAT_OUT_ROOT when
/// it is set, otherwise against the working directory.
std::filesystem::path resolve_output_dir(const std::string& directory);

}  // namespace moneystat::harness
