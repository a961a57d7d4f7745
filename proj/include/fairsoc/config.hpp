#pragma once

// Experiment configuration.
//
// The file format is line-oriented `key = value` with `#` comments. A
// `[section]` header prefixes the keys that follow with `section.`, so
//
//   [optimizer]
//   restarts = 2
//
// is the same as `optimizer.restarts = 2`. Unknown keys are rejected.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairsoc/evolution.hpp"
#include "fairsoc/strategies.hpp"

namespace fairsoc {

enum class OutputFormat : std::uint8_t { Csv, Json };

struct ExperimentConfig {
  std::uint64_t master_seed = 42;
  std::vector<StrategyKind> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  int societies = 100;
  int generations = 100;
  EvolutionConfig evolution;
  std::string output_dir = "runs";
  OutputFormat format = OutputFormat::Csv;
  int workers = 0;  // 0: hardware concurrency

  /// Canonical text of every simulation-relevant key (no output_dir,
  /// format or workers). Parsing it back yields the same simulation.
  std::string simulation_text() const;
  /// simulation_text() plus the I/O keys.
  std::string to_text() const;
  /// 64-bit digest of simulation_text(), as 16 hex digits.
  std::string digest() const;
};

using ConfigOverrides = std::map<std::string, std::string>;

/// Applies defaults, then `text`, then `overrides` (flag values keyed by
/// config key). Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});

/// Reads `path` (if non-empty) and parses it. Throws UsageError when no
/// file is given and there are no overrides, IoError when it is unreadable.
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides);

std::string format_name(OutputFormat format);
std::string strategy_dir_name(StrategyKind kind);

/// Parses "all" or a comma-separated strategy list.
std::vector<StrategyKind> parse_strategy_list(const std::string& text);

}  // namespace fairsoc
