#include "fairsoc/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "fairsoc/errors.hpp"
#include "fairsoc/metrics.hpp"

namespace fairsoc {

namespace {

constexpr double kPreferenceMargin = 0.01;
// Founding draws ignore the strategy, so society i starts from the same
// population under every strategy.
constexpr std::uint32_t kFoundingTag = 0xFFFFFFFFu;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double draw_open_unit(RngStream& stream) {
  double u = uniform01(stream);
  while (u == 0.0) u = uniform01(stream);
  return u;
}

// Strict total order on candidate pairs: distance, then the smaller id, then the larger.
struct PairKey {
  double distance2;
  std::uint64_t low;
  std::uint64_t high;

  friend bool operator<(const PairKey& a, const PairKey& b) {
    return std::tie(a.distance2, a.low, a.high) < std::tie(b.distance2, b.low, b.high);
  }
};

PairKey pair_key(const Agent& a, const Agent& b) {
  const double da = a.prefs.alpha() - b.prefs.alpha();
  const double ds = a.prefs.sigma() - b.prefs.sigma();
  return {da * da + ds * ds, std::min(a.id, b.id), std::max(a.id, b.id)};
}

double stat_or_nan(double (*stat)(std::span<const double>), std::span<const double> values) {
  try {
    return stat(values);
  } catch (const StatisticError&) {
    return kNaN;
  }
}

}  // namespace

void EvolutionConfig::validate() const {
  if (initial_population < 2) throw ParameterError("initial_population must be at least 2");
  if (!(gamma_rate > 0.0)) throw ParameterError("gamma_rate must be positive");
  if (!(mortality_scale > 0.0)) throw ParameterError("mortality_scale must be positive");
  if (!(mortality_mid > 0.0)) throw ParameterError("mortality_mid must be positive");
  if (k_max < 1) throw ParameterError("k_max must be at least 1");
  if (!(mutation_sd >= 0.0)) throw ParameterError("mutation_sd must be non-negative");
  if (population_cap < 2) throw ParameterError("population_cap must be at least 2");
  if (!(allocation.myopic_floor >= 0.0)) throw ParameterError("myopic_floor must be non-negative");
  allocation.simplex.validate();
}

SocietyStreams SocietyStreams::derive(std::uint64_t master_seed, StrategyKind strategy,
                                      std::uint64_t society_index) {
  const std::uint32_t tag = strategy_tag(strategy);
  return {derive_stream(master_seed, kFoundingTag, society_index, Purpose::Proposal),
          derive_stream(master_seed, tag, society_index, Purpose::Optimizer),
          derive_stream(master_seed, tag, society_index, Purpose::Mating),
          derive_stream(master_seed, tag, society_index, Purpose::Reproduction),
          derive_stream(master_seed, tag, society_index, Purpose::Mutation),
          derive_stream(master_seed, tag, society_index, Purpose::Mortality)};
}

Society found_society(std::uint64_t index, StrategyKind strategy, const EvolutionConfig& config,
                      std::uint64_t master_seed) {
  Society s{.society_index = index,
            .strategy = strategy,
            .params = {},
            .agents = {},
            .streams = SocietyStreams::derive(master_seed, strategy, index),
            .last_consumptions = {}};
  RngStream& proposal = s.streams.proposal;

  s.params.gamma = 1.0 + exponential(proposal, config.gamma_rate);
  if (!(s.params.gamma > 1.0)) s.params.gamma = std::nextafter(1.0, 2.0);
  s.params.mortality_mid = config.mortality_mid;
  s.params.mortality_scale = config.mortality_scale;
  s.params.k_max = config.k_max;
  s.params.initial_population = config.initial_population;
  s.params.weighting = config.weighting;

  s.agents.reserve(static_cast<std::size_t>(config.initial_population));
  for (int i = 0; i < config.initial_population; ++i) {
    const double alpha = draw_open_unit(proposal);
    const double sigma = uniform01(proposal);
    Agent a;
    a.id = s.next_id++;
    a.prefs = Preferences(alpha, sigma);
    s.agents.push_back(a);
  }
  // Generation 0 has no history: every other agent is assumed to work 12 hours.
  s.prev_total_labor = config.allocation.myopic_floor * config.initial_population;
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> mate_pairs(std::span<const Agent> agents) {
  // Nearest-neighbour chain. Under a strict total order on pairs, greedy
  // closest-pair matching coincides with repeatedly matching mutual nearest
  // neighbours, and the chain finds those in O(n^2) overall.
  const std::size_t n = agents.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n < 2) return pairs;
  pairs.reserve(n / 2);

  std::vector<char> unpaired(n, 1);
  std::size_t remaining = n;
  std::size_t first_unpaired = 0;
  std::vector<std::size_t> chain;

  auto nearest = [&](std::size_t i) {
    std::size_t best = n;
    PairKey best_key{};
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !unpaired[j]) continue;
      const PairKey key = pair_key(agents[i], agents[j]);
      if (best == n || key < best_key) {
        best = j;
        best_key = key;
      }
    }
    return best;
  };

  while (remaining >= 2) {
    if (chain.empty()) {
      while (!unpaired[first_unpaired]) ++first_unpaired;
      chain.push_back(first_unpaired);
    }
    const std::size_t a = chain.back();
    const std::size_t b = nearest(a);
    if (chain.size() >= 2 && chain[chain.size() - 2] == b) {
      pairs.emplace_back(std::min(a, b), std::max(a, b));
      unpaired[a] = unpaired[b] = 0;
      remaining -= 2;
      chain.resize(chain.size() - 2);
    } else {
      chain.push_back(b);
    }
  }
  return pairs;
}

std::vector<Agent> reproduce(const Agent& first, const Agent& second, double mutation_sd,
                             RngStream& reproduction, RngStream& mutation, int current_generation,
                             std::uint64_t& next_id) {
  const double mean_children = (first.fertility + second.fertility) / 2.0;
  const std::uint64_t count = poisson(reproduction, mean_children);
  const double alpha_mid = (first.prefs.alpha() + second.prefs.alpha()) / 2.0;
  const double sigma_mid = (first.prefs.sigma() + second.prefs.sigma()) / 2.0;

  std::vector<Agent> children;
  children.reserve(count);
  for (std::uint64_t c = 0; c < count; ++c) {
    const double alpha = std::clamp(gaussian(mutation, alpha_mid, mutation_sd), kPreferenceMargin,
                                    1.0 - kPreferenceMargin);
    const double sigma =
        std::clamp(gaussian(mutation, sigma_mid, mutation_sd), 0.0, 1.0 - kPreferenceMargin);
    Agent child;
    child.id = next_id++;
    child.prefs = Preferences(alpha, sigma);
    child.birth_generation = current_generation + 1;
    children.push_back(child);
  }
  return children;
}

std::int64_t apply_mortality(Society& society) {
  std::int64_t deaths = 0;
  for (Agent& a : society.agents) {
    if (bernoulli(society.streams.mortality, mortality(a.cumulative_labor, society.params))) {
      a.alive = false;
      ++deaths;
    }
  }
  std::erase_if(society.agents, [](const Agent& a) { return !a.alive; });
  return deaths;
}

GenerationRecord step_generation(Society& society, const EvolutionConfig& config) {
  if (society.failed) throw StateError("step_generation: society has failed");
  if (society.capped) throw StateError("step_generation: society reached the population cap");
  if (society.agents.empty()) throw StateError("step_generation: empty society");

  const std::size_t n = society.agents.size();
  const AllocationResult alloc =
      allocate(society.strategy, society.agents, society.params, society.prev_total_labor,
               config.allocation, society.streams.optimizer);

  double total_labor = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Agent& a = society.agents[i];
    const double before = a.cumulative_labor;
    a.labor = alloc.labor[i];
    a.leisure = kHoursPerDay - a.labor;
    a.fertility = alloc.fertility[i];
    a.cumulative_labor += a.labor;
    if (a.cumulative_labor < before) {
      throw InvariantViolation("cumulative labor decreased for agent " + std::to_string(a.id));
    }
    total_labor += a.labor;
  }

  // Realized shares of this generation's output.
  std::vector<double> labor(n);
  for (std::size_t i = 0; i < n; ++i) labor[i] = society.agents[i].labor;
  const std::vector<double> shares =
      consumptions_for(StrategyKind::SA, labor, society.params.gamma, 0.0);

  GenerationRecord rec;
  rec.generation = society.generation;
  rec.population = static_cast<std::int64_t>(n);
  rec.total_labor = total_labor;
  rec.total_output = std::pow(total_labor, society.params.gamma);
  double consumption_sum = 0.0;
  double utility_sum = 0.0;
  double fertility_sum = 0.0;
  rec.min_utility = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    Agent& a = society.agents[i];
    a.consumption = shares[i];
    const double u =
        family_utility(a.leisure, a.consumption, a.prefs, a.fertility, society.params.weighting);
    consumption_sum += a.consumption;
    utility_sum += u;
    fertility_sum += a.fertility;
    rec.min_utility = std::min(rec.min_utility, u);
  }
  const double count = static_cast<double>(n);
  rec.mean_consumption = consumption_sum / count;
  rec.mean_utility = utility_sum / count;
  rec.mean_fertility = fertility_sum / count;
  rec.consumption_cv = stat_or_nan(coefficient_of_variation, shares);
  rec.consumption_skewness = stat_or_nan(skewness, shares);
  society.last_consumptions = shares;

  const auto pairs = mate_pairs(society.agents);
  std::vector<char> seen(n, 0);
  std::vector<Agent> children;
  for (const auto& [i, j] : pairs) {
    if (i == j || seen[i] || seen[j]) throw InvariantViolation("mating reused an agent");
    seen[i] = seen[j] = 1;
    auto brood = reproduce(society.agents[i], society.agents[j], config.mutation_sd,
                           society.streams.reproduction, society.streams.mutation,
                           society.generation, society.next_id);
    children.insert(children.end(), std::make_move_iterator(brood.begin()),
                    std::make_move_iterator(brood.end()));
  }

  rec.deaths = apply_mortality(society);
  rec.births = static_cast<std::int64_t>(children.size());
  society.agents.insert(society.agents.end(), std::make_move_iterator(children.begin()),
                        std::make_move_iterator(children.end()));

  const auto next_population = static_cast<std::int64_t>(society.agents.size());
  if (next_population != rec.population - rec.deaths + rec.births) {
    throw InvariantViolation("population conservation violated");
  }
  for (const Agent& a : society.agents) {
    if (!a.alive) throw InvariantViolation("dead agent " + std::to_string(a.id) + " in roster");
  }

  ++society.generation;
  society.prev_total_labor = total_labor;
  if (next_population < 2) {
    society.failed = true;
  } else if (next_population > config.population_cap) {
    society.capped = true;
  }
  rec.failed = society.failed;
  rec.capped = society.capped;
  return rec;
}

std::vector<GenerationRecord> run_society(Society& society, int max_generations,
                                          const EvolutionConfig& config) {
  if (max_generations < 1) throw ParameterError("run_society: max_generations must be >= 1");
  std::vector<GenerationRecord> records;
  records.reserve(static_cast<std::size_t>(max_generations));
  while (static_cast<int>(records.size()) < max_generations && !society.failed &&
         !society.capped) {
    records.push_back(step_generation(society, config));
  }
  return records;
}

}  // namespace fairsoc
