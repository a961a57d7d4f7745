#pragma once

// The generational loop: found a society, allocate labor and fertility,
// mate by preference similarity, reproduce, apply labor-driven mortality.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fairsoc/economy.hpp"
#include "fairsoc/stochastics.hpp"
#include "fairsoc/strategies.hpp"

namespace fairsoc {

struct EvolutionConfig {
  int initial_population = 100;
  double gamma_rate = 1.0;
  double mortality_mid = 240.0;
  double mortality_scale = 60.0;
  int k_max = 10;
  FertilityWeighting weighting = FertilityWeighting::Geometric;
  double mutation_sd = 0.02;
  int population_cap = 5000;
  AllocationOptions allocation;

  void validate() const;
};

struct SocietyStreams {
  RngStream proposal;
  RngStream optimizer;
  RngStream mating;
  RngStream reproduction;
  RngStream mutation;
  RngStream mortality;

  static SocietyStreams derive(std::uint64_t master_seed, StrategyKind strategy,
                               std::uint64_t society_index);
};

struct Society {
  std::uint64_t society_index = 0;
  StrategyKind strategy = StrategyKind::S0;
  SocietyParams params;
  std::vector<Agent> agents;  // living agents only
  int generation = 0;
  double prev_total_labor = 0.0;
  bool failed = false;
  bool capped = false;
  std::uint64_t next_id = 0;
  SocietyStreams streams;
  /// Per-agent consumption of the last completed generation.
  std::vector<double> last_consumptions;
};

struct GenerationRecord {
  int generation = 0;
  std::int64_t population = 0;
  std::int64_t births = 0;
  std::int64_t deaths = 0;
  double total_labor = 0.0;
  double total_output = 0.0;
  double mean_consumption = 0.0;
  double consumption_cv = 0.0;        // NaN when undefined
  double consumption_skewness = 0.0;  // NaN when undefined
  double min_utility = 0.0;
  double mean_utility = 0.0;
  double mean_fertility = 0.0;
  bool failed = false;
  bool capped = false;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

Society found_society(std::uint64_t index, StrategyKind strategy, const EvolutionConfig& config,
                      std::uint64_t master_seed);

/// Greedy closest-pair matching in (alpha, sigma) space. Returns index pairs
/// into `agents`, each pair ordered (lower index first).
std::vector<std::pair<std::size_t, std::size_t>> mate_pairs(std::span<const Agent> agents);

/// Offspring of one mating. Child ids are taken from `next_id`.
std::vector<Agent> reproduce(const Agent& first, const Agent& second, double mutation_sd,
                             RngStream& reproduction, RngStream& mutation, int current_generation,
                             std::uint64_t& next_id);

/// Bernoulli death draw per living agent; dead agents are removed.
std::int64_t apply_mortality(Society& society);

/// Throws StateError when the society has already failed or hit the cap.
GenerationRecord step_generation(Society& society, const EvolutionConfig& config);

std::vector<GenerationRecord> run_society(Society& society, int max_generations,
                                          const EvolutionConfig& config);

}  // namespace fairsoc
