#pragma once

// The four allocation strategies.
//
//   S0   each agent maximizes its own family utility, treating the rest of
//        the economy as fixed at last generation's level (myopic accounting)
//   SA   a planner maximizes mean family utility, consumption computed from
//        the candidate total labor (self-consistent accounting)
//   Sb   a planner maximizes the minimum family utility under myopic accounting
//   SAb  a planner maximizes the minimum family utility, self-consistent
//
// Fertility is chosen by choose_k in every case; family utility factors as
// U(z, c) * B(k), so the best k does not depend on the labor allocation.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairsoc/economy.hpp"
#include "fairsoc/optimizer.hpp"
#include "fairsoc/stochastics.hpp"

namespace fairsoc {

enum class StrategyKind : std::uint8_t { S0 = 0, SA = 1, Sb = 2, SAb = 3 };

inline constexpr StrategyKind kAllStrategies[] = {StrategyKind::S0, StrategyKind::SA,
                                                  StrategyKind::Sb, StrategyKind::SAb};

/// "0", "A", "b", "Ab".
std::string_view strategy_name(StrategyKind kind) noexcept;

/// Accepts "0", "A", "b", "Ab" and the long forms "S0", "SA", "Sb", "SAb".
/// Throws ParameterError otherwise.
StrategyKind parse_strategy(std::string_view text);

inline std::uint32_t strategy_tag(StrategyKind kind) noexcept {
  return static_cast<std::uint32_t>(kind);
}

bool uses_min_objective(StrategyKind kind) noexcept;
bool uses_self_consistent_accounting(StrategyKind kind) noexcept;

struct AllocationOptions {
  SimplexOptions simplex;
  /// Lower bound on the myopic belief, in hours per other agent.
  double myopic_floor = 12.0;
  /// Start the planner strategies from the S0 solution.
  bool warm_start = true;
  /// Also run a planner solve from uniform 12-hour labor; the better result wins.
  bool cold_start = true;
  /// Replaces the S0 warm start with an explicit labor vector.
  std::optional<std::vector<double>> initial_labor;
};

struct AllocationResult {
  std::vector<double> labor;
  std::vector<int> fertility;
  std::vector<double> utilities;
  std::vector<double> consumptions;
  double objective_value = 0.0;
};

/// Others' labor as seen by a myopic agent:
/// max(prev_total - prev_total / N, floor * (N - 1)).
double myopic_others_labor(double prev_total_labor, std::size_t population, double floor_per_agent);

/// Per-agent consumption under the strategy's accounting.
std::vector<double> consumptions_for(StrategyKind kind, std::span<const double> labor,
                                     double gamma, double myopic_others);

/// Mean (S0, SA) or minimum (Sb, SAb) family utility of `labor`.
double objective_value(StrategyKind kind, std::span<const double> labor,
                       std::span<const Agent> agents, const SocietyParams& params,
                       double prev_total_labor, double myopic_floor = 12.0);

/// Throws StateError for an empty population.
AllocationResult allocate(StrategyKind kind, std::span<const Agent> agents,
                          const SocietyParams& params, double prev_total_labor,
                          const AllocationOptions& options, RngStream& rng);

}  // namespace fairsoc
