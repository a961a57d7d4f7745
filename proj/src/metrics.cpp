#include "fairsoc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairsoc/errors.hpp"

namespace fairsoc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::optional<double> mean_if_any(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return mean_of(values);
}

std::optional<double> index_of(std::optional<double> value, std::optional<double> reference) {
  if (!value || !reference || !(*reference > 0.0) || !std::isfinite(*value)) return std::nullopt;
  return 100.0 * *value / *reference;
}

struct Aggregate {
  std::optional<double> growth;
  std::optional<double> recessions_per_100;
  std::optional<double> mortality;
  std::optional<double> cv;
  std::optional<double> failed_pct;
  std::size_t count = 0;
};

Aggregate aggregate(std::vector<const SocietySummary*> group) {
  std::sort(group.begin(), group.end(), [](const SocietySummary* a, const SocietySummary* b) {
    return a->society_index < b->society_index;
  });
  Aggregate out;
  out.count = group.size();
  if (group.empty()) return out;

  std::vector<double> growth, mortality, cv;
  std::int64_t recessions = 0;
  std::int64_t generations = 0;
  std::size_t failed = 0;
  for (const SocietySummary* s : group) {
    recessions += s->recession_count;
    generations += s->generations_completed;
    if (s->failed) ++failed;
    if (s->total_agent_generations > 0) mortality.push_back(mortality_rate(*s));
    if (s->failed) continue;
    if (std::isfinite(s->mean_growth)) growth.push_back(s->mean_growth);
    if (std::isfinite(s->mean_cv)) cv.push_back(s->mean_cv);
  }
  if (auto g = mean_if_any(growth)) out.growth = 100.0 * *g;
  if (generations > 0) {
    out.recessions_per_100 = 100.0 * static_cast<double>(recessions) / static_cast<double>(generations);
  }
  out.mortality = mean_if_any(mortality);
  out.cv = mean_if_any(cv);
  out.failed_pct = 100.0 * static_cast<double>(failed) / static_cast<double>(group.size());
  return out;
}

}  // namespace

GrowthSeries growth_series(std::span<const GenerationRecord> records) {
  if (records.size() < 2) throw StatisticError("growth_series: need at least two generations");
  GrowthSeries out;
  out.values.reserve(records.size() - 1);
  for (std::size_t t = 1; t < records.size(); ++t) {
    const double base = static_cast<double>(records[t - 1].population) * records[t - 1].mean_consumption;
    const double next = static_cast<double>(records[t].population) * records[t].mean_consumption;
    if (!(base > 0.0) || !std::isfinite(base) || !std::isfinite(next)) {
      ++out.undefined;
      continue;
    }
    out.values.push_back((next - base) / base);
  }
  return out;
}

int count_recessions(std::span<const double> growth) {
  int recessions = 0;
  int run = 0;
  for (double g : growth) {
    if (g < 0.0) {
      if (++run == 3) ++recessions;
    } else {
      run = 0;
    }
  }
  return recessions;
}

double coefficient_of_variation(std::span<const double> values) {
  if (values.size() < 2) throw StatisticError("coefficient_of_variation: need at least two values");
  const double mean = mean_of(values);
  if (!(mean > 0.0)) throw StatisticError("coefficient_of_variation: mean must be positive");
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size())) / mean;
}

double skewness(std::span<const double> values) {
  if (values.size() < 3) throw StatisticError("skewness: need at least three values");
  const double n = static_cast<double>(values.size());
  // Moments of the data shifted by its first element.
  const double pivot = values[0];
  double shifted_sum = 0.0;
  for (double v : values) shifted_sum += v - pivot;
  const double mean = shifted_sum / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : values) {
    const double d = (v - pivot) - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (!(m2 > 0.0)) throw StatisticError("skewness: zero variance");
  return m3 / (m2 * std::sqrt(m2));
}

SocietySummary summarize(std::uint64_t society_index, StrategyKind strategy,
                         std::span<const GenerationRecord> records,
                         std::vector<double> final_consumption_sample) {
  if (records.empty()) throw StatisticError("summarize: no generation records");
  SocietySummary s;
  s.society_index = society_index;
  s.strategy = strategy;
  s.generations_completed = static_cast<int>(records.size());
  s.failed = records.back().failed;
  s.capped = records.back().capped;
  s.mean_growth = kNaN;
  if (records.size() >= 2) {
    const GrowthSeries g = growth_series(records);
    if (!g.values.empty()) s.mean_growth = mean_of(g.values);
    s.recession_count = count_recessions(g.values);
  }
  std::vector<double> cvs;
  for (const GenerationRecord& r : records) {
    s.total_deaths += r.deaths;
    s.total_agent_generations += r.population;
    if (std::isfinite(r.consumption_cv)) cvs.push_back(r.consumption_cv);
  }
  s.mean_cv = cvs.empty() ? kNaN : mean_of(cvs);
  s.final_consumption_sample = std::move(final_consumption_sample);
  return s;
}

double mortality_rate(const SocietySummary& summary) {
  if (summary.total_agent_generations <= 0) {
    throw StatisticError("mortality_rate: zero exposure");
  }
  if (summary.total_deaths > summary.total_agent_generations) {
    throw InvariantViolation("mortality_rate: more deaths than agent-generations");
  }
  return static_cast<double>(summary.total_deaths) /
         static_cast<double>(summary.total_agent_generations);
}

const StrategyRow* ExperimentReport::row(StrategyKind kind) const {
  for (const StrategyRow& r : rows) {
    if (r.strategy == kind) return &r;
  }
  return nullptr;
}

ExperimentReport build_report(std::span<const SocietySummary> summaries,
                              std::span<const SocietySummary> baseline) {
  if (baseline.empty()) throw StatisticError("build_report: empty baseline");
  std::vector<const SocietySummary*> base_group;
  for (const SocietySummary& s : baseline) base_group.push_back(&s);
  const Aggregate base = aggregate(base_group);

  ExperimentReport report;
  for (StrategyKind kind : kAllStrategies) {
    std::vector<const SocietySummary*> group;
    if (kind == StrategyKind::S0) {
      group = base_group;
    } else {
      for (const SocietySummary& s : summaries) {
        if (s.strategy == kind) group.push_back(&s);
      }
    }
    if (group.empty()) continue;
    const Aggregate agg = kind == StrategyKind::S0 ? base : aggregate(group);

    StrategyRow row;
    row.strategy = kind;
    row.societies = agg.count;
    row.growth_pct = agg.growth;
    row.recession_pct = agg.recessions_per_100;
    row.failed_pct = agg.failed_pct;
    row.mortality_index = index_of(agg.mortality, base.mortality);
    row.cv_index = index_of(agg.cv, base.cv);
    if (kind == StrategyKind::S0) {
      if (row.mortality_index) row.mortality_index = 100.0;
      if (row.cv_index) row.cv_index = 100.0;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace fairsoc
