#include "fairsoc/strategies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "fairsoc/errors.hpp"

namespace fairsoc {

namespace {

constexpr double kLaborLow = std::numeric_limits<double>::denorm_min();
constexpr double kLaborHigh = 24.0 - 3.552713678800501e-15;  // nextafter(24, 0)
constexpr int kSeriesTerms = 24;

double labor_from_unconstrained(double u) noexcept {
  return std::clamp(kHoursPerDay * logistic(u), kLaborLow, kLaborHigh);
}

double unconstrained_from_labor(double labor) noexcept {
  const double p = std::clamp(labor / kHoursPerDay, 1e-12, 1.0 - 1e-12);
  return logit(p);
}

// Per-generation view of the population used by every objective.
class Model {
 public:
  Model(StrategyKind kind, std::span<const Agent> agents, const SocietyParams& params,
        double prev_total_labor, double myopic_floor)
      : kind_(kind), n_(agents.size()), gamma_(params.gamma) {
    alpha_.reserve(n_);
    beta_.reserve(n_);
    bracket_.reserve(n_);
    fertility_.reserve(n_);
    for (const Agent& a : agents) {
      const int k = choose_k(a.prefs, params.k_max, params.weighting);
      fertility_.push_back(k);
      alpha_.push_back(a.prefs.alpha());
      beta_.push_back(a.prefs.beta());
      bracket_.push_back(family_bracket(a.prefs.sigma(), k, params.weighting));
    }
    others_ = myopic_others_labor(prev_total_labor, n_, myopic_floor);
  }

  std::size_t size() const noexcept { return n_; }
  StrategyKind kind() const noexcept { return kind_; }
  double gamma() const noexcept { return gamma_; }
  double others() const noexcept { return others_; }
  const std::vector<int>& fertility() const noexcept { return fertility_; }

  // B(k) z^alpha c^beta
  double unit(std::size_t i, double labor, double consumption) const {
    return bracket_[i] * std::pow(kHoursPerDay - labor, alpha_[i]) * std::pow(consumption, beta_[i]);
  }

  double myopic_consumption(double labor) const {
    return labor * std::pow(labor + others_, gamma_ - 1.0);
  }

  double myopic_unit(std::size_t i, double labor) const {
    return unit(i, labor, myopic_consumption(labor));
  }

  double score(std::span<const double> labor) const {
    const bool take_min = uses_min_objective(kind_);
    double acc = take_min ? std::numeric_limits<double>::infinity() : 0.0;
    auto fold = [&](double u) { acc = take_min ? std::min(acc, u) : acc + u; };
    if (uses_self_consistent_accounting(kind_)) {
      const double total = std::accumulate(labor.begin(), labor.end(), 0.0);
      const double scale = std::pow(total, gamma_ - 1.0);
      for (std::size_t i = 0; i < n_; ++i) fold(unit(i, labor[i], labor[i] * scale));
    } else {
      for (std::size_t i = 0; i < n_; ++i) fold(myopic_unit(i, labor[i]));
    }
    return take_min ? acc : acc / static_cast<double>(n_);
  }

  double score_unconstrained(std::span<const double> u) const {
    std::vector<double> labor(u.size());
    std::transform(u.begin(), u.end(), labor.begin(), labor_from_unconstrained);
    return score(labor);
  }

  double alpha(std::size_t i) const { return alpha_[i]; }
  double beta(std::size_t i) const { return beta_[i]; }
  double bracket(std::size_t i) const { return bracket_[i]; }

 private:
  StrategyKind kind_;
  std::size_t n_;
  double gamma_;
  double others_ = 0.0;
  std::vector<double> alpha_, beta_, bracket_;
  std::vector<int> fertility_;
};

// Per-agent quantities that depend only on the agent's own coordinate,
// refreshed lazily so a block solve only pays for the coordinates that moved.
class CoordinateCache {
 public:
  explicit CoordinateCache(const Model& m)
      : m_(m),
        u_(m.size(), std::numeric_limits<double>::quiet_NaN()),
        labor_(m.size()),
        own_(m.size()),
        log_weight_(m.size()),
        exponent_(m.size()),
        scaled_(m.size()) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      exponent_[i] = (m.gamma() - 1.0) * m.beta(i);
      max_exponent_ = std::max(max_exponent_, exponent_[i]);
    }
  }

  void sync(std::span<const double> u) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] == u_[i]) continue;
      u_[i] = u[i];
      const double l = labor_from_unconstrained(u[i]);
      labor_[i] = l;
      if (uses_self_consistent_accounting(m_.kind())) {
        // w_i = B z^alpha l^beta, so that utility is w_i S^{e_i}.
        const double w = m_.bracket(i) * std::pow(kHoursPerDay - l, m_.alpha(i)) *
                         std::pow(l, m_.beta(i));
        own_[i] = w;
        log_weight_[i] = std::log(w);
        if (reference_ > 0.0) scaled_[i] = w * std::pow(reference_, exponent_[i]);
      } else {
        own_[i] = m_.myopic_unit(i, l);
      }
    }
  }

  // Re-centres the series expansion when S drifts too far from the reference.
  void ensure_reference(double total) {
    if (reference_ > 0.0 && std::fabs(std::log(total / reference_)) * max_exponent_ <= 0.25) return;
    reference_ = total;
    for (std::size_t i = 0; i < u_.size(); ++i) {
      scaled_[i] = own_[i] * std::pow(reference_, exponent_[i]);
    }
  }

  double labor(std::size_t i) const { return labor_[i]; }
  double own(std::size_t i) const { return own_[i]; }
  double log_weight(std::size_t i) const { return log_weight_[i]; }
  double exponent(std::size_t i) const { return exponent_[i]; }
  double scaled(std::size_t i) const { return scaled_[i]; }
  double reference() const { return reference_; }
  double max_exponent() const { return max_exponent_; }

 private:
  const Model& m_;
  std::vector<double> u_, labor_, own_, log_weight_, exponent_, scaled_;
  double reference_ = 0.0;
  double max_exponent_ = 0.0;
};

std::vector<char> block_mask(std::size_t n, std::span<const std::size_t> block) {
  std::vector<char> in_block(n, 0);
  for (std::size_t i : block) in_block[i] = 1;
  return in_block;
}

// Sb: each utility depends on its own labor only, so the agents outside the
// block contribute a constant minimum.
ScoreFn restrict_min_myopic(const Model& m, const CoordinateCache& cache,
                            std::span<const std::size_t> block) {
  const auto in_block = block_mask(m.size(), block);
  double rest_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!in_block[i]) rest_min = std::min(rest_min, cache.own(i));
  }
  std::vector<std::size_t> ids(block.begin(), block.end());
  return [&m, rest_min, ids = std::move(ids)](std::span<const double> y) {
    double value = rest_min;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      value = std::min(value, m.myopic_unit(ids[j], labor_from_unconstrained(y[j])));
    }
    return value;
  };
}

// SA: the outside agents contribute R(S) = sum_i w_i S^{e_i}. Around a
// reference total S_ref, R(S) = sum_m t^m / m! * sum_i w_i S_ref^{e_i} e_i^m with
// t = ln(S / S_ref), which turns each evaluation into a short polynomial.
ScoreFn restrict_mean_planner(const Model& m, CoordinateCache& cache,
                              std::span<const std::size_t> block) {
  const auto in_block = block_mask(m.size(), block);
  double rest_labor = 0.0;
  double block_labor = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    (in_block[i] ? block_labor : rest_labor) += cache.labor(i);
  }
  cache.ensure_reference(rest_labor + block_labor);

  struct State {
    std::vector<std::size_t> ids;
    std::vector<std::size_t> rest;
    std::array<double, kSeriesTerms + 1> moments{};
    double rest_labor = 0.0;
    double reference = 0.0;
    double max_exponent = 0.0;
  };
  auto st = std::make_shared<State>();
  st->ids.assign(block.begin(), block.end());
  st->rest_labor = rest_labor;
  st->reference = cache.reference();
  st->max_exponent = cache.max_exponent();
  st->rest.reserve(m.size() - block.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (in_block[i]) continue;
    st->rest.push_back(i);
    const double e = cache.exponent(i);
    double term = cache.scaled(i);
    for (int k = 0; k <= kSeriesTerms; ++k) {
      st->moments[k] += term;
      term *= e;
    }
  }
  const double n = static_cast<double>(m.size());

  return [&m, &cache, st, n](std::span<const double> y) {
    double total = st->rest_labor;
    for (std::size_t j = 0; j < st->ids.size(); ++j) total += labor_from_unconstrained(y[j]);
    const double t = std::log(total / st->reference);
    double rest_sum = 0.0;
    if (std::fabs(t) * st->max_exponent <= 0.5) {
      for (int k = kSeriesTerms; k >= 0; --k) {
        rest_sum = st->moments[k] + t / (k + 1) * rest_sum;
      }
    } else {
      for (std::size_t i : st->rest) rest_sum += cache.own(i) * std::pow(total, cache.exponent(i));
    }
    const double scale = std::pow(total, m.gamma() - 1.0);
    double block_sum = 0.0;
    for (std::size_t j = 0; j < st->ids.size(); ++j) {
      const double l = labor_from_unconstrained(y[j]);
      block_sum += m.unit(st->ids[j], l, l * scale);
    }
    return (rest_sum + block_sum) / n;
  };
}

// SAb: outside utility i is w_i S^{e_i}, a line in ln S after taking logs.
// Over the reachable range of S only lines that can touch the lower envelope
// matter; the others are dropped up front.
ScoreFn restrict_min_planner(const Model& m, const CoordinateCache& cache,
                             std::span<const std::size_t> block) {
  const auto in_block = block_mask(m.size(), block);
  double rest_labor = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!in_block[i]) rest_labor += cache.labor(i);
  }
  std::vector<std::size_t> ids(block.begin(), block.end());
  std::vector<std::pair<std::size_t, double>> rest;  // (agent, labor)

  if (rest_labor > 0.0) {
    const double x0 = std::log(rest_labor);
    const double x1 = std::log(rest_labor + kHoursPerDay * static_cast<double>(ids.size()));
    auto at = [&](std::size_t i, double x) { return cache.log_weight(i) + cache.exponent(i) * x; };
    double threshold = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!in_block[i]) threshold = std::min(threshold, std::max(at(i, x0), at(i, x1)));
    }
    threshold += 1e-9 * (1.0 + std::fabs(threshold));
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!in_block[i] && std::min(at(i, x0), at(i, x1)) <= threshold) {
        rest.emplace_back(i, cache.labor(i));
      }
    }
  }

  return [&m, rest = std::move(rest), ids = std::move(ids), rest_labor](std::span<const double> y) {
    double total = rest_labor;
    for (std::size_t j = 0; j < ids.size(); ++j) total += labor_from_unconstrained(y[j]);
    const double scale = std::pow(total, m.gamma() - 1.0);
    double value = std::numeric_limits<double>::infinity();
    for (const auto& [i, l] : rest) value = std::min(value, m.unit(i, l, l * scale));
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const double l = labor_from_unconstrained(y[j]);
      value = std::min(value, m.unit(ids[j], l, l * scale));
    }
    return value;
  };
}

ScoreFn restrict_to_block(const Model& m, CoordinateCache& cache, std::span<const double> u,
                          std::span<const std::size_t> block) {
  cache.sync(u);
  switch (m.kind()) {
    case StrategyKind::SA:
      return restrict_mean_planner(m, cache, block);
    case StrategyKind::Sb:
      return restrict_min_myopic(m, cache, block);
    case StrategyKind::SAb:
      return restrict_min_planner(m, cache, block);
    case StrategyKind::S0:
      break;
  }
  std::vector<std::size_t> ids(block.begin(), block.end());
  Point base(u.begin(), u.end());
  return [&m, ids = std::move(ids), base = std::move(base)](std::span<const double> y) mutable {
    for (std::size_t j = 0; j < ids.size(); ++j) base[ids[j]] = y[j];
    return m.score_unconstrained(base);
  };
}

std::vector<double> solve_individuals(const Model& m, std::span<const Agent> agents,
                                      const SimplexOptions& simplex, const RngStream& rng) {
  std::vector<double> labor(m.size());
  const Point start{0.0};
  for (std::size_t i = 0; i < m.size(); ++i) {
    Objective obj;
    obj.arity = 1;
    obj.evaluate = [&m, i](std::span<const double> u) {
      return m.myopic_unit(i, labor_from_unconstrained(u[0]));
    };
    RngStream own = rng.split(agents[i].id);
    const OptimumResult r = nelder_mead_max(obj, start, simplex, own);
    labor[i] = labor_from_unconstrained(r.argmax[0]);
  }
  return labor;
}

std::vector<double> solve_planner(const Model& m, std::span<const double> initial_labor,
                                  const SimplexOptions& simplex, RngStream& rng) {
  Objective obj;
  obj.arity = m.size();
  obj.evaluate = [&m](std::span<const double> u) { return m.score_unconstrained(u); };
  auto cache = std::make_shared<CoordinateCache>(m);
  obj.restrict_to_block = [&m, cache](std::span<const double> u,
                                      std::span<const std::size_t> block) {
    return restrict_to_block(m, *cache, u, block);
  };
  Point start(initial_labor.size());
  std::transform(initial_labor.begin(), initial_labor.end(), start.begin(),
                 unconstrained_from_labor);
  const OptimumResult r = nelder_mead_max(obj, start, simplex, rng);
  std::vector<double> labor(r.argmax.size());
  std::transform(r.argmax.begin(), r.argmax.end(), labor.begin(), labor_from_unconstrained);
  return labor;
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::S0:
      return "0";
    case StrategyKind::SA:
      return "A";
    case StrategyKind::Sb:
      return "b";
    case StrategyKind::SAb:
      return "Ab";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view text) {
  if (text == "0" || text == "S0") return StrategyKind::S0;
  if (text == "A" || text == "SA") return StrategyKind::SA;
  if (text == "b" || text == "Sb") return StrategyKind::Sb;
  if (text == "Ab" || text == "SAb") return StrategyKind::SAb;
  throw ParameterError("unknown strategy '" + std::string(text) + "' (expected 0, A, b or Ab)");
}

bool uses_min_objective(StrategyKind kind) noexcept {
  return kind == StrategyKind::Sb || kind == StrategyKind::SAb;
}

bool uses_self_consistent_accounting(StrategyKind kind) noexcept {
  return kind == StrategyKind::SA || kind == StrategyKind::SAb;
}

double myopic_others_labor(double prev_total_labor, std::size_t population,
                           double floor_per_agent) {
  if (population == 0) return 0.0;
  const double n = static_cast<double>(population);
  return std::max(prev_total_labor - prev_total_labor / n, floor_per_agent * (n - 1.0));
}

std::vector<double> consumptions_for(StrategyKind kind, std::span<const double> labor,
                                     double gamma, double myopic_others) {
  std::vector<double> out(labor.size());
  if (uses_self_consistent_accounting(kind)) {
    const double total = std::accumulate(labor.begin(), labor.end(), 0.0);
    for (std::size_t i = 0; i < labor.size(); ++i) {
      out[i] = consumption(labor[i], std::max(0.0, total - labor[i]), gamma);
    }
  } else {
    for (std::size_t i = 0; i < labor.size(); ++i) {
      out[i] = consumption(labor[i], myopic_others, gamma);
    }
  }
  return out;
}

double objective_value(StrategyKind kind, std::span<const double> labor,
                       std::span<const Agent> agents, const SocietyParams& params,
                       double prev_total_labor, double myopic_floor) {
  if (labor.size() != agents.size()) {
    throw ParameterError("objective_value: labor vector length must equal the population");
  }
  if (agents.empty()) throw StateError("objective_value: empty society");
  for (double l : labor) {
    if (!(l >= 0.0 && l <= kHoursPerDay)) {
      throw DomainError("objective_value: labor must lie in [0,24]");
    }
  }
  const Model m(kind, agents, params, prev_total_labor, myopic_floor);
  return m.score(labor);
}

AllocationResult allocate(StrategyKind kind, std::span<const Agent> agents,
                          const SocietyParams& params, double prev_total_labor,
                          const AllocationOptions& options, RngStream& rng) {
  if (agents.empty()) throw StateError("allocate: empty society");
  if (!(prev_total_labor >= 0.0)) {
    throw ParameterError("allocate: previous total labor must be non-negative");
  }
  params.validate();
  options.simplex.validate();

  const Model m(kind, agents, params, prev_total_labor, options.myopic_floor);
  const std::vector<double> individual = solve_individuals(m, agents, options.simplex, rng);

  std::vector<double> labor;
  if (kind == StrategyKind::S0) {
    labor = individual;
  } else {
    double best = -std::numeric_limits<double>::infinity();
    auto consider = [&](std::vector<double> candidate) {
      const double v = m.score(candidate);
      if (v > best) {
        best = v;
        labor = std::move(candidate);
      }
    };
    if (options.warm_start || options.initial_labor) {
      std::vector<double> warm = options.initial_labor.value_or(individual);
      if (warm.size() != m.size()) {
        throw ParameterError("allocate: initial labor length must equal the population");
      }
      consider(warm);
      consider(solve_planner(m, warm, options.simplex, rng));
    }
    if (options.cold_start || labor.empty()) {
      const std::vector<double> uniform(m.size(), kHoursPerDay / 2.0);
      consider(solve_planner(m, uniform, options.simplex, rng));
    }
  }

  AllocationResult result;
  result.fertility = m.fertility();
  result.consumptions = consumptions_for(kind, labor, params.gamma, m.others());
  result.utilities.resize(labor.size());
  for (std::size_t i = 0; i < labor.size(); ++i) {
    result.utilities[i] = family_utility(kHoursPerDay - labor[i], result.consumptions[i],
                                         agents[i].prefs, result.fertility[i], params.weighting);
  }
  result.objective_value = m.score(labor);
  result.labor = std::move(labor);
  return result;
}

}  // namespace fairsoc
