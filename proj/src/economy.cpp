#include "fairsoc/economy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fairsoc/errors.hpp"

namespace fairsoc {

Preferences::Preferences(double alpha, double sigma)
    : alpha_(alpha), beta_(1.0 - alpha), sigma_(sigma) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("preferences: alpha must lie in (0,1), got " + std::to_string(alpha));
  }
  if (!(sigma >= 0.0 && sigma < 1.0)) {
    throw ParameterError("preferences: sigma must lie in [0,1), got " + std::to_string(sigma));
  }
}

void SocietyParams::validate() const {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw ParameterError("society: gamma must exceed 1, got " + std::to_string(gamma));
  }
  if (!(mortality_scale > 0.0) || !std::isfinite(mortality_scale)) {
    throw ParameterError("society: mortality_scale must be positive");
  }
  if (!std::isfinite(mortality_mid)) throw ParameterError("society: mortality_mid must be finite");
  if (k_max < 1) throw ParameterError("society: k_max must be at least 1");
  if (initial_population < 2) throw ParameterError("society: initial_population must be at least 2");
}

double utility(double leisure, double consumption, const Preferences& prefs) {
  if (!(leisure >= 0.0) || !(consumption >= 0.0)) {
    throw DomainError("utility: leisure and consumption must be non-negative");
  }
  // 0^a = 0 for a > 0, which std::pow already honours.
  return std::pow(leisure, prefs.alpha()) * std::pow(consumption, prefs.beta());
}

double consumption(double labor, double others_labor, double gamma) {
  if (!(labor >= 0.0 && labor <= kHoursPerDay)) {
    throw DomainError("consumption: labor must lie in [0,24], got " + std::to_string(labor));
  }
  if (!(others_labor >= 0.0)) throw DomainError("consumption: others_labor must be non-negative");
  if (!(gamma > 1.0)) throw DomainError("consumption: gamma must exceed 1");
  if (labor == 0.0) return 0.0;
  return labor * std::pow(labor + others_labor, gamma - 1.0);
}

double sigma_weight(double sigma, int k, FertilityWeighting weighting) {
  if (!(sigma >= 0.0 && sigma < 1.0)) {
    throw ParameterError("sigma_weight: sigma must lie in [0,1), got " + std::to_string(sigma));
  }
  if (k < 0) throw ParameterError("sigma_weight: k must be non-negative");
  if (weighting == FertilityWeighting::Linear) return sigma * k;
  double sum = 0.0;
  double term = 1.0;
  for (int j = 1; j <= k; ++j) {
    term *= sigma;
    sum += term;
  }
  return sum;
}

double family_bracket(double sigma, int k, FertilityWeighting weighting) {
  return 1.0 / (k + 1.0) + sigma_weight(sigma, k, weighting);
}

double family_utility(double leisure, double consumption, const Preferences& prefs, int k,
                      FertilityWeighting weighting) {
  if (k < 0) throw ParameterError("family_utility: k must be non-negative");
  // U(z/(k+1), c/(k+1)) = U(z, c)/(k+1) because alpha + beta = 1.
  return utility(leisure, consumption, prefs) * family_bracket(prefs.sigma(), k, weighting);
}

int choose_k(const Preferences& prefs, int k_max, FertilityWeighting weighting) {
  if (k_max < 1) throw ParameterError("choose_k: k_max must be at least 1");
  // Compare B(k) - B(0) = sigma(k) - k/(k+1); at k = 1 this is sigma - 0.5
  // evaluated without rounding, so the one-child threshold is exact.
  int best = 0;
  double best_gain = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    const double gain = sigma_weight(prefs.sigma(), k, weighting) - k / (k + 1.0);
    if (gain > best_gain) {
      best_gain = gain;
      best = k;
    }
  }
  return best;
}

double mortality(double cumulative_labor, const SocietyParams& params) {
  if (!(cumulative_labor >= 0.0)) {
    throw DomainError("mortality: cumulative labor must be non-negative");
  }
  const double x = (cumulative_labor - params.mortality_mid) / params.mortality_scale;
  const double m = 1.0 / (1.0 + std::exp(-x));
  // Keep the hazard inside the open interval when the logistic saturates.
  return std::clamp(m, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

}  // namespace fairsoc
