#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moneystat/harness/config.hpp"

namespace moneystat::harness {

inline constexpr const char* kVersion = "0.1.0";

struct FileDigest {
  std::string name;
  std::string sha256;
};

struct RunManifest {
  nlohmann::json config;
  std::string version = kVersion;
  std::vector<std::uint64_t> replica_seeds;
  std::vector<FileDigest> files;
  std::filesystem::path directory;
  nlohmann::json report;  // in-memory copy of report.json

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Computes the report without touching the filesystem.
nlohmann::json build_report(const ExperimentConfig& config);

/// Runs the configured pipeline and writes report.json, the bulk files and
/// manifest.json into `out_dir` (created if needed).
RunManifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Runs every sweep point into `out_dir/point_NNN` and writes a sweep manifest
/// with one entry per point.
std::vector<RunManifest> run_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct CheckLine {
  std::string field;
  bool pass = false;
  std::string detail;
};

struct CheckResult {
  std::vector<CheckLine> lines;
  [[nodiscard]] bool ok() const;
  /// 0 when every expectation holds, 1 otherwise.
  [[nodiscard]] int exit_code() const { return ok() ? 0 : 1; }
};

/// Matches each expectation against the report. A field missing from the
/// report throws ConfigError. `tolerance_scale` multiplies every tolerance.
CheckResult compare_report(const nlohmann::json& report, const std::vector<Expectation>& expectations,
                           double tolerance_scale = 1.0);

}  // namespace moneystat::harness
