#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "moneystat/harness/config.hpp"
#include "moneystat/harness/experiment.hpp"

using namespace moneystat::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_simulate() {
  return json::parse(R"({
    "pipeline": "simulate", "name": "tiny", "seed": 42, "replicas": 2, "threads": 1,
    "model": {"kind": "CashOnly", "n_agents": 50},
    "initial": {"policy": "equal", "total": 500},
    "kernel": {"steps": 20000, "thin": 1000, "audit_every": 1000}
  })");
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("moneystat_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, RejectsBadDocuments) {
  auto missing = small_simulate();
  missing["model"].erase("n_agents");
  EXPECT_THROW(parse_config(missing), ConfigError);

  auto restricted = small_simulate();
  restricted["model"] = {{"kind", "Restricted"}, {"n_agents", 10}, {"overdraft", 0}};
  EXPECT_THROW(parse_config(restricted), ConfigError);

  auto unknown = small_simulate();
  unknown["kernel"]["stepz"] = 3;
  EXPECT_THROW(parse_config(unknown), ConfigError);

  auto pipeline = small_simulate();
  pipeline["pipeline"] = "nope";
  EXPECT_THROW(parse_config(pipeline), ConfigError);

  EXPECT_THROW(load_config("/nonexistent/moneystat.json"), ConfigError);
}

TEST(Config, AcceptsExponentLiteralsForCounts) {
  auto doc = small_simulate();
  doc["kernel"]["steps"] = 2e4;
  EXPECT_EQ(parse_config(doc).kernel.steps, 20000u);
  doc["kernel"]["steps"] = 2.5;
  EXPECT_THROW(parse_config(doc), ConfigError);
}

TEST(Config, OutputRootFromEnvironment) {
  ::setenv(kOutRootEnv, "/tmp/ms_root", 1);
  EXPECT_EQ(resolve_output_dir("run"), fs::path("/tmp/ms_root/run"));
  EXPECT_EQ(resolve_output_dir("/abs/run"), fs::path("/abs/run"));
  ::unsetenv(kOutRootEnv);
}

TEST(Experiment, SameSeedGivesIdenticalDigests) {
  const auto cfg = parse_config(small_simulate());
  const auto a = run_experiment(cfg, scratch("a"));
  const auto b = run_experiment(cfg, scratch("b"));
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    EXPECT_EQ(a.files[i].name, b.files[i].name);
    EXPECT_EQ(a.files[i].sha256, b.files[i].sha256);
  }
  EXPECT_EQ(a.replica_seeds, b.replica_seeds);
  for (const char* f : {"manifest.json", "report.json", "samples.csv", "histogram.tsv"}) {
    EXPECT_TRUE(fs::exists(a.directory / f)) << f;
  }
  std::ifstream ra(a.directory / "report.json"), rb(b.directory / "report.json");
  const std::string sa((std::istreambuf_iterator<char>(ra)), {}), sb((std::istreambuf_iterator<char>(rb)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(sha256_file(a.directory / "report.json").size(), 64u);
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  auto doc = small_simulate();
  const auto one = build_report(parse_config(doc));
  doc["threads"] = 2;
  EXPECT_EQ(build_report(parse_config(doc)).dump(), one.dump());
}

TEST(Experiment, SeedSweepWritesOneEntryPerSeed) {
  auto doc = small_simulate();
  doc["replicas"] = 1;
  doc["sweep"] = {{"seeds", 10}};
  const auto dir = scratch("sweep");
  const auto points = run_sweep(parse_config(doc), dir);
  EXPECT_EQ(points.size(), 10u);
  std::ifstream in(dir / "manifest.json");
  const auto m = json::parse(in);
  EXPECT_EQ(m.at("points").size(), 10u);
  EXPECT_NE(points[0].replica_seeds, points[1].replica_seeds);
}

TEST(Experiment, ParameterSweep) {
  auto doc = small_simulate();
  doc["replicas"] = 1;
  doc["sweep"] = {{"pointer", "/model/n_agents"}, {"values", {20, 40}}};
  const auto points = run_sweep(parse_config(doc), scratch("param"));
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[1].report.at("model").at("n_agents"), 40);
}

TEST(Check, CompareReport) {
  const json report = {{"summary", {{"t_hat", 10.0}, {"ok", true}, {"zero", 0.0}}}};
  const auto exact = parse_expectations(json::parse(
      R"([{"field": "/summary/t_hat", "value": 10.0, "tolerance": 0.01}, {"field": "/summary/ok", "value": true}])"));
  EXPECT_EQ(compare_report(report, exact).exit_code(), 0);

  const auto off = parse_expectations(json::parse(R"([{"field": "/summary/t_hat", "value": 10.5, "tolerance": 0.03}])"));
  EXPECT_EQ(compare_report(report, off).exit_code(), 1);
  EXPECT_EQ(compare_report(report, off, 2.0).exit_code(), 0);

  const auto abs = parse_expectations(
      json::parse(R"([{"field": "/summary/zero", "value": 1e-10, "tolerance": 1e-9, "mode": "absolute"}])"));
  EXPECT_TRUE(compare_report(report, abs).ok());
  EXPECT_FALSE(compare_report(report, abs, 0.0).ok());

  const auto missing = parse_expectations(json::parse(R"([{"field": "/summary/nope", "value": 1}])"));
  EXPECT_THROW(compare_report(report, missing), ConfigError);
}

TEST(Pipelines, AnalyticTransformAndPareto) {
  const auto analytic = build_report(parse_config(json::parse(R"({
    "pipeline": "analytic", "model": {"kind": "Combined", "n_agents": 10, "overdraft": 2},
    "analytic": {"temperatures": [1, 3]}})")));
  EXPECT_EQ(analytic.at("points").size(), 2u);
  EXPECT_LT(analytic.at("summary").at("max_residual").get<double>(), 1e-6);

  const auto transform = build_report(parse_config(json::parse(R"({
    "pipeline": "transform", "model": {"kind": "CreditMarket", "n_agents": 1, "monetary_base": 1},
    "transform": {"t_hot": 4, "t_cold": 2, "v1": 1, "v2": 2.718281828459045, "v_free": 1.5,
                  "reserve_ratio": 0.2, "reserve_ratio_new": 0.1, "reserve_base": 100}})")));
  EXPECT_TRUE(transform.at("carnot").at("verified").get<bool>());
  EXPECT_NEAR(transform.at("carnot").at("eta").get<double>(), 0.5, 1e-9);

  const auto pareto = build_report(parse_config(json::parse(R"({
    "pipeline": "pareto", "seed": 3,
    "pareto": {"n_agents": 100, "floor": 1, "t_max": 3, "temperature": 1, "direct_samples": 20000}})")));
  EXPECT_LT(pareto.at("analytic").at("entropy_fd_residual").get<double>(), 1e-6);
}
