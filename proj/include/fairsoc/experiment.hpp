#pragma once

// Experiment orchestration: runs every (strategy, society) job on a worker
// pool, persists generation logs and consumption samples, and builds the
// summary report.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fairsoc/config.hpp"
#include "fairsoc/evolution.hpp"
#include "fairsoc/metrics.hpp"

namespace fairsoc {

struct SocietyRun {
  std::uint64_t society_index = 0;
  StrategyKind strategy = StrategyKind::S0;
  double gamma = 0.0;
  std::vector<GenerationRecord> records;
  /// Realized consumption of every agent, one cross-section per record.
  std::vector<std::vector<double>> consumptions;
};

struct StrategyRuns {
  StrategyKind strategy = StrategyKind::S0;
  std::vector<SocietyRun> societies;  // ordered by society_index
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<StrategyRuns> runs;  // S0 first, then the other strategies in order
  ExperimentReport report;

  const StrategyRuns* runs_for(StrategyKind kind) const;
};

/// Called once per finished job; may run on any worker thread.
using ProgressFn = std::function<void(StrategyKind, std::uint64_t society_index)>;

/// Runs the simulation without touching the filesystem. Strategy 0 is always
/// included because it is the baseline of the mortality and CV indices.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Checks that the output directory is writable, runs the experiment and
/// writes every artifact under config.output_dir.
ExperimentResult run_and_write(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Writes logs, samples, report, metadata and the effective config.
void write_outputs(const ExperimentResult& result);

/// Rebuilds the report from the generation logs under `dir`.
ExperimentReport report_from_directory(const std::string& dir);

/// Writes report.csv or report.json into `dir`.
void write_report(const ExperimentReport& report, const std::string& dir, OutputFormat format);

/// Five metric rows by one column per strategy.
std::string format_report_table(const ExperimentReport& report);

/// Consumption cross-section of one society at `generation` (-1: the last
/// generation logged for that society), read from the samples under `dir`.
std::vector<double> read_consumption_sample(const std::string& dir, StrategyKind strategy,
                                            std::uint64_t society_index, int generation);

/// Format of the logs found under `dir` (throws IoError if there are none).
OutputFormat detect_format(const std::string& dir);

}  // namespace fairsoc
