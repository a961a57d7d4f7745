#pragma once

// Economic primitives: Cobb-Douglas utility over leisure and consumption,
// the proportional consumption share, family utility with k children, the
// fertility choice, and the labor-driven mortality hazard.

#include <cstdint>

namespace fairsoc {

inline constexpr double kHoursPerDay = 24.0;

/// Taste parameters. beta is always stored as 1 - alpha.
class Preferences {
 public:
  /// Throws ParameterError unless 0 < alpha < 1 and 0 <= sigma < 1.
  Preferences(double alpha, double sigma);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double sigma() const noexcept { return sigma_; }

 private:
  double alpha_;
  double beta_;
  double sigma_;
};

/// How the offspring weight sigma(k) grows with the number of children.
enum class FertilityWeighting : std::uint8_t {
  Geometric,  // sum_{j=1..k} sigma^j
  Linear,     // sigma * k
};

struct SocietyParams {
  double gamma = 2.0;
  double mortality_mid = 240.0;
  double mortality_scale = 60.0;
  int k_max = 10;
  int initial_population = 100;
  FertilityWeighting weighting = FertilityWeighting::Geometric;

  /// Throws ParameterError when any field is out of range.
  void validate() const;
};

struct Agent {
  std::uint64_t id = 0;
  Preferences prefs{0.5, 0.0};
  double cumulative_labor = 0.0;
  double labor = 0.0;
  double leisure = kHoursPerDay;
  int fertility = 0;
  double consumption = 0.0;
  bool alive = true;
  int birth_generation = 0;
};

/// z^alpha * c^beta. Throws DomainError for negative or non-finite inputs.
double utility(double leisure, double consumption, const Preferences& prefs);

/// labor * (labor + others_labor)^(gamma - 1).
double consumption(double labor, double others_labor, double gamma);

double sigma_weight(double sigma, int k,
                    FertilityWeighting weighting = FertilityWeighting::Geometric);

/// U(z/(k+1), c/(k+1)) + sigma(k) U(z, c).
double family_utility(double leisure, double consumption, const Preferences& prefs, int k,
                      FertilityWeighting weighting = FertilityWeighting::Geometric);

/// Factor B(k) = 1/(k+1) + sigma(k) such that family utility equals U(z,c) B(k).
double family_bracket(double sigma, int k,
                      FertilityWeighting weighting = FertilityWeighting::Geometric);

/// Utility-maximizing number of children; independent of (z, c).
/// Ties resolve toward fewer children.
int choose_k(const Preferences& prefs, int k_max,
             FertilityWeighting weighting = FertilityWeighting::Geometric);

/// Logistic hazard in cumulative lifetime labor hours.
double mortality(double cumulative_labor, const SocietyParams& params);

}  // namespace fairsoc
