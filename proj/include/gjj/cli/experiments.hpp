#pragma once

// Experiment runners behind the gjj subcommands. Each run returns its tables
// in memory; write_run() serializes them (CSV, 17 significant digits) next to
// a key-sorted manifest.json that is enough to replay the run.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "gjj/cli/config.hpp"

namespace gjj::cli {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string csv() const;
};

/// %.17g; non-finite values are written as nan / inf / -inf.
std::string fmt(double v);

struct RunResult {
  std::string experiment;
  std::map<std::string, Table> tables;  ///< file stem -> table
  std::string summary;                  ///< table merged by sweeps
  nlohmann::json diagnostics = nlohmann::json::object();
};

const std::vector<std::string>& experiment_names();
bool is_experiment(const std::string& name);

/// Runs one experiment. `workers` sizes the pool of experiments that have
/// independent points (junction-sweep, cooling-map and the scans).
RunResult run_experiment(const std::string& name, const Config& cfg, int workers = 1);

/// Header of the summary table of `name` (known without running).
std::vector<std::string> summary_header(const std::string& name);

/// One run per value of the numeric field `axis`; rows are merged in input
/// order with the axis value first and an error column last. A failing point
/// fills its error column instead of aborting the sweep.
RunResult run_sweep(const std::string& name, const Config& cfg, const std::string& axis,
                    const std::vector<std::string>& values, int workers = 1);

struct RunInfo {
  std::string command;                 ///< experiment name or "sweep"
  std::vector<std::string> sweep_values;
  std::string sweep_axis;
  int workers = 1;
  long long seed = 0;
  double wall_clock_seconds = 0.0;
};

nlohmann::json make_manifest(const RunResult& result, const Config& cfg, const RunInfo& info);
/// Writes every table as <stem>.csv and the manifest; returns the CSV paths.
std::vector<std::filesystem::path> write_run(const std::filesystem::path& out, const RunResult& result,
                                             const nlohmann::json& manifest);

/// Re-executes the run recorded in a manifest.
struct Replay {
  RunResult result;
  Config config;
  RunInfo info;
};
Replay replay(const std::filesystem::path& manifest_path, int workers);

const char* library_version();

}  // namespace gjj::cli
