#pragma once

// Run directories, sweep aggregation and report tables. A run directory holds
// package.json, trace.jsonl, metrics.csv, summary.json and manifest.json.

#include "agetrack/metrics.hpp"
#include "agetrack/package.hpp"
#include "agetrack/runner.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agetrack {

inline constexpr int kTraceSchemaVersion = 1;

const char* tool_version();

// SHA-256 of the serialized config.
std::string config_digest(const RunConfig& config);

struct RunManifest {
  std::string command;
  std::string package_digest;
  std::string config_digest;
  std::string tool_version;
  double wall_clock_s = 0.0;
  std::string status;  // "complete" or "aborted"

  Json to_json() const;
  static RunManifest from_json(const Json& j);
};

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);
std::vector<Json> read_trace_file(const std::filesystem::path& path);

// Deterministic for scripted agents: no timings, no absolute paths.
Json run_summary(const RunResult& result, const RunMetrics& metrics);

struct RunOutcome {
  RunResult result;
  RunMetrics metrics;
  RunManifest manifest;
};

// Runs the package and writes the run directory. The trace is streamed, so a
// partial trace survives an aborted run. ConfigError propagates before any
// file other than package.json is written.
RunOutcome run_to_dir(const RunPackage& package, const RunConfig& config, const std::filesystem::path& dir,
                      const std::string& command);

// Whether `dir` already holds run outputs.
bool run_dir_occupied(const std::filesystem::path& dir);

struct LoadedRun {
  RunPackage package;
  RunResult result;
  RunMetrics metrics;
};

// Throws ParseError on missing or malformed files.
LoadedRun load_run_dir(const std::filesystem::path& dir);

// Scalars compared across sweep cells. Null entries are skipped when
// aggregating.
std::map<std::string, std::optional<double>> sweep_scalars(const RunMetrics& metrics);

struct MeanStd {
  std::optional<double> mean;
  std::optional<double> std;  // sample standard deviation; needs n >= 2
  int n = 0;
};

MeanStd mean_std(const std::vector<double>& values);

struct SweepAxis {
  std::string dial;
  std::vector<double> values;

  // "n_confusable_pairs=0,4,8,12"
  static SweepAxis parse(std::string_view spec);
};

struct SweepPlan {
  std::string scenario_id;
  int n_sessions = 10;
  PressureConfig base;
  std::vector<SweepAxis> axes;
  std::vector<std::uint64_t> seeds;
  RunConfig config;  // run_seed is replaced by each cell's seed
  int jobs = 0;      // 0 picks the hardware concurrency

  void validate() const;
};

struct SweepCell {
  std::map<std::string, double> dials;
  std::uint64_t seed = 0;
  std::string dir;  // relative to the sweep directory
  bool ok = false;
  std::string error;
  std::map<std::string, std::optional<double>> scalars;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  Json aggregate;  // one row per dial combination
  bool complete() const;
};

std::string format_number(double v);

// Cartesian product of the axes in order, seeds innermost.
std::vector<SweepCell> sweep_cells(const SweepPlan& plan);

// One row per dial combination with the mean and sample std across seeds.
Json aggregate_sweep(const std::vector<SweepCell>& cells, const std::vector<SweepAxis>& axes);

// Runs every cell in its own directory under `dir`, then writes
// aggregate.json, aggregate.csv and sweep.json.
SweepResult run_sweep(const SweepPlan& plan, const std::filesystem::path& dir, const std::string& command);

// curves/<metric>.csv with "session,value" rows.
void write_curve_files(const std::filesystem::path& dir, const RunMetrics& metrics);

// Text tables. Anomalous attribution rows keep their accuracies and leave
// the shares blank.
std::string curve_stats_table(const RunMetrics& metrics);
std::string attribution_table(const std::vector<std::pair<std::string, std::optional<AttributionProfile>>>& rows);
std::string shock_table(const ShockReport& report);
std::string aggregate_table(const Json& aggregate);

std::string curve_stats_csv(const RunMetrics& metrics);
std::string attribution_csv(const std::vector<std::pair<std::string, std::optional<AttributionProfile>>>& rows);

// Whole-run profile followed by one row per session with attribution data.
std::vector<std::pair<std::string, std::optional<AttributionProfile>>> attribution_rows(const RunResult& result);

}  // namespace agetrack
