#pragma once

// Evaluation criteria over generation records: consumption growth,
// recessions, mortality, consumption dispersion and failure rates, with the
// mortality and CV indices expressed relative to the S0 baseline.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairsoc/evolution.hpp"
#include "fairsoc/strategies.hpp"

namespace fairsoc {

struct GrowthSeries {
  std::vector<double> values;  // defined ratios, in generation order
  std::size_t undefined = 0;   // ratios skipped because the base was zero
};

/// (C_t - C_{t-1}) / C_{t-1} with C = population * mean_consumption.
/// Throws StatisticError for fewer than two records.
GrowthSeries growth_series(std::span<const GenerationRecord> records);

/// Maximal runs of at least three consecutive negative entries.
int count_recessions(std::span<const double> growth);

/// Population standard deviation over mean.
/// Throws StatisticError for fewer than two values or a non-positive mean.
double coefficient_of_variation(std::span<const double> values);

/// Standardized third central moment, population convention.
/// Throws StatisticError for fewer than three values or zero variance.
double skewness(std::span<const double> values);

struct SocietySummary {
  std::uint64_t society_index = 0;
  StrategyKind strategy = StrategyKind::S0;
  int generations_completed = 0;
  bool failed = false;
  bool capped = false;
  double mean_growth = 0.0;  // NaN when no ratio is defined
  int recession_count = 0;
  std::int64_t total_deaths = 0;
  std::int64_t total_agent_generations = 0;
  double mean_cv = 0.0;  // NaN when no generation has a defined CV
  std::vector<double> final_consumption_sample;
};

SocietySummary summarize(std::uint64_t society_index, StrategyKind strategy,
                         std::span<const GenerationRecord> records,
                         std::vector<double> final_consumption_sample = {});

/// Deaths per agent-generation. Throws StatisticError for zero exposure and
/// InvariantViolation when deaths exceed exposure.
double mortality_rate(const SocietySummary& summary);

struct StrategyRow {
  StrategyKind strategy = StrategyKind::S0;
  std::size_t societies = 0;
  std::optional<double> growth_pct;
  std::optional<double> recession_pct;
  std::optional<double> mortality_index;
  std::optional<double> cv_index;
  std::optional<double> failed_pct;
};

struct ExperimentReport {
  std::vector<StrategyRow> rows;  // in S0, SA, Sb, SAb order, present strategies only
  std::map<std::string, std::string> metadata;

  const StrategyRow* row(StrategyKind kind) const;
};

/// Throws StatisticError when the baseline list is empty.
ExperimentReport build_report(std::span<const SocietySummary> summaries,
                              std::span<const SocietySummary> baseline);

}  // namespace fairsoc
