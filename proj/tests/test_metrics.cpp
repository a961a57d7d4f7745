#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fairsoc/errors.hpp"
#include "fairsoc/metrics.hpp"
#include "oracles.hpp"

using namespace fairsoc;

namespace {

std::vector<GenerationRecord> series(const std::vector<double>& totals) {
  std::vector<GenerationRecord> out;
  for (std::size_t t = 0; t < totals.size(); ++t) {
    GenerationRecord r;
    r.generation = static_cast<int>(t);
    r.population = 10;
    r.mean_consumption = totals[t] / 10.0;
    out.push_back(r);
  }
  return out;
}

SocietySummary summary(std::uint64_t index, StrategyKind kind, std::int64_t deaths,
                       std::int64_t exposure, double cv, double growth, bool failed = false) {
  SocietySummary s;
  s.society_index = index;
  s.strategy = kind;
  s.generations_completed = 10;
  s.total_deaths = deaths;
  s.total_agent_generations = exposure;
  s.mean_cv = cv;
  s.mean_growth = growth;
  s.failed = failed;
  return s;
}

bool within_ulps(double a, double b, int ulps) {
  double x = a;
  for (int i = 0; i <= ulps; ++i) {
    if (x == b) return true;
    x = std::nextafter(x, b);
  }
  return false;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("growth_series examples") {
    const auto flat = growth_series(series({5, 5, 5, 5}));
    CHECK(flat.values == std::vector<double>{0, 0, 0});
    const auto up = growth_series(series({100, 102.5}));
    REQUIRE(up.values.size() == 1);
    CHECK(up.values[0] == doctest::Approx(0.025));
    const auto zero = growth_series(series({100, 0, 50}));
    CHECK(zero.values.size() == 1);
    CHECK(zero.values[0] == doctest::Approx(-1.0));
    CHECK(zero.undefined == 1);
    CHECK_THROWS_AS(growth_series(series({1})), StatisticError);
  }

  TEST_CASE("count_recessions examples") {
    CHECK(count_recessions(std::vector<double>{-0.01, -0.02, -0.005}) == 1);
    CHECK(count_recessions(std::vector<double>{-0.01, -0.02, 0.005, -0.01}) == 0);
    CHECK(count_recessions(std::vector<double>{-1, -1, -1, 0.1, -1, -1, -1, -1}) == 2);
    CHECK(count_recessions(std::vector<double>{}) == 0);
  }

  TEST_CASE("count_recessions agrees with a run-length scanner") {
    RngStream rng = derive_stream(8, 0, 0, 0);
    for (int i = 0; i < 10000; ++i) {
      const std::size_t n = static_cast<std::size_t>(uniform01(rng) * 40);
      const double bias = uniform01(rng);
      std::vector<double> g(n);
      for (double& x : g) x = uniform01(rng) < bias ? -uniform01(rng) : uniform01(rng);
      REQUIRE(count_recessions(g) == oracle::scan_recessions(g));
      g.push_back(0.0);
      const int with_tail = count_recessions(g);
      g.pop_back();
      REQUIRE(with_tail == count_recessions(g));
    }
  }

  TEST_CASE("coefficient_of_variation examples and errors") {
    CHECK(coefficient_of_variation(std::vector<double>{3, 3, 3}) == 0.0);
    CHECK(coefficient_of_variation(std::vector<double>{1, 3}) == doctest::Approx(0.5));
    CHECK(coefficient_of_variation(std::vector<double>{1, 2, 3, 4}) ==
          doctest::Approx(std::sqrt(1.25) / 2.5));
    CHECK(coefficient_of_variation(std::vector<double>{1, 2, 3, 4}) == doctest::Approx(0.4472).epsilon(1e-4));
    CHECK_THROWS_AS(coefficient_of_variation(std::vector<double>{1}), StatisticError);
    CHECK_THROWS_AS(coefficient_of_variation(std::vector<double>{0, 0}), StatisticError);
  }

  TEST_CASE("skewness examples and errors") {
    CHECK(skewness(std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(skewness(std::vector<double>{1, 1, 1, 10}) > 0.0);
    CHECK(skewness(std::vector<double>{0, 0, 0, 0, 1}) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK_THROWS_AS(skewness(std::vector<double>{1, 2}), StatisticError);
    CHECK_THROWS_AS(skewness(std::vector<double>{2, 2, 2}), StatisticError);
  }

  TEST_CASE("moment statistics agree with extended-precision oracles") {
    RngStream rng = derive_stream(9, 0, 0, 0);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> v(3 + static_cast<std::size_t>(uniform01(rng) * 200));
      for (double& x : v) x = exponential(rng, 0.5) + 0.1;
      CHECK(coefficient_of_variation(v) == doctest::Approx(oracle::cv(v)).epsilon(1e-12));
      CHECK(skewness(v) == doctest::Approx(oracle::skew(v)).epsilon(1e-9));
    }
  }

  TEST_CASE("scale and translation invariance within 4 ulps") {
    // Scaling by a power of two and shifting by an exactly representable
    // amount leave the floating-point moments unchanged up to rounding.
    RngStream rng = derive_stream(10, 0, 0, 0);
    int cv_failures = 0;
    int skew_failures = 0;
    for (int i = 0; i < 500; ++i) {
      std::vector<double> v(5 + static_cast<std::size_t>(uniform01(rng) * 50));
      for (double& x : v) x = std::ldexp(std::floor(uniform01(rng) * 1024.0) + 1.0, -4);
      const double lambda = std::ldexp(1.0, static_cast<int>(uniform01(rng) * 16) - 8);
      std::vector<double> scaled = v, shifted = v;
      for (double& x : scaled) x *= lambda;
      for (double& x : shifted) x = x * lambda + 3.0;
      cv_failures += !within_ulps(coefficient_of_variation(scaled), coefficient_of_variation(v), 4);
      if (*std::max_element(v.begin(), v.end()) != *std::min_element(v.begin(), v.end())) {
        skew_failures += !within_ulps(skewness(scaled), skewness(v), 4);
        skew_failures += !within_ulps(skewness(shifted), skewness(scaled), 4);
      }
    }
    CHECK(cv_failures == 0);
    CHECK(skew_failures == 0);
  }

  TEST_CASE("mortality_rate examples") {
    CHECK(mortality_rate(summary(0, StrategyKind::S0, 10, 1000, 0.1, 0.0)) == doctest::Approx(0.01));
    CHECK(mortality_rate(summary(0, StrategyKind::S0, 0, 1000, 0.1, 0.0)) == 0.0);
    CHECK_THROWS_AS(mortality_rate(summary(0, StrategyKind::S0, 1001, 1000, 0.1, 0.0)),
                    InvariantViolation);
    CHECK_THROWS_AS(mortality_rate(summary(0, StrategyKind::S0, 0, 0, 0.1, 0.0)), StatisticError);
  }

  TEST_CASE("summarize collects records") {
    auto recs = series({100, 90, 80, 70, 75});
    recs[0].deaths = 2;
    recs[3].deaths = 1;
    for (auto& r : recs) r.consumption_cv = 0.5;
    recs[4].consumption_cv = std::nan("");
    const SocietySummary s = summarize(4, StrategyKind::Sb, recs, {1.0, 2.0});
    CHECK(s.society_index == 4);
    CHECK(s.recession_count == 1);
    CHECK(s.total_deaths == 3);
    CHECK(s.total_agent_generations == 50);
    CHECK(s.mean_cv == doctest::Approx(0.5));
    CHECK(s.final_consumption_sample.size() == 2);
    CHECK_THROWS_AS(summarize(0, StrategyKind::S0, std::vector<GenerationRecord>{}), StatisticError);
  }

  TEST_CASE("build_report examples") {
    const std::vector<SocietySummary> base{summary(0, StrategyKind::S0, 10, 1000, 0.2, 0.03),
                                           summary(1, StrategyKind::S0, 10, 1000, 0.2, 0.02)};
    const auto self = build_report(base, base);
    REQUIRE(self.row(StrategyKind::S0) != nullptr);
    CHECK(*self.row(StrategyKind::S0)->mortality_index == 100.0);
    CHECK(*self.row(StrategyKind::S0)->cv_index == 100.0);
    CHECK(*self.row(StrategyKind::S0)->growth_pct == doctest::Approx(2.5));

    std::vector<SocietySummary> all = base;
    for (std::uint64_t i = 0; i < 100; ++i) {
      all.push_back(summary(i, StrategyKind::SAb, 20, 1000, 0.4, 0.01, i < 29));
    }
    const auto report = build_report(all, base);
    const StrategyRow* ab = report.row(StrategyKind::SAb);
    REQUIRE(ab != nullptr);
    CHECK(*ab->mortality_index == doctest::Approx(200.0));
    CHECK(*ab->cv_index == doctest::Approx(200.0));
    CHECK(*ab->failed_pct == doctest::Approx(29.0));
    CHECK(report.row(StrategyKind::SA) == nullptr);
    CHECK_THROWS_AS(build_report(all, std::vector<SocietySummary>{}), StatisticError);
  }

  TEST_CASE("build_report is permutation-invariant and never yields NaN") {
    std::vector<SocietySummary> all;
    RngStream rng = derive_stream(12, 0, 0, 0);
    for (StrategyKind k : kAllStrategies) {
      for (std::uint64_t i = 0; i < 15; ++i) {
        const bool failed = uniform01(rng) < 0.2;
        const double cv = uniform01(rng) < 0.1 ? std::nan("") : uniform01(rng);
        all.push_back(summary(i, k, static_cast<std::int64_t>(uniform01(rng) * 50), 1000, cv,
                              uniform01(rng) - 0.3, failed));
      }
    }
    std::vector<SocietySummary> base;
    for (const auto& s : all) {
      if (s.strategy == StrategyKind::S0) base.push_back(s);
    }
    const auto r1 = build_report(all, base);
    std::vector<SocietySummary> shuffled(all.rbegin(), all.rend());
    std::rotate(shuffled.begin(), shuffled.begin() + 7, shuffled.end());
    std::vector<SocietySummary> base_shuffled(base.rbegin(), base.rend());
    const auto r2 = build_report(shuffled, base_shuffled);
    REQUIRE(r1.rows.size() == r2.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
      CHECK(r1.rows[i].growth_pct == r2.rows[i].growth_pct);
      CHECK(r1.rows[i].recession_pct == r2.rows[i].recession_pct);
      CHECK(r1.rows[i].mortality_index == r2.rows[i].mortality_index);
      CHECK(r1.rows[i].cv_index == r2.rows[i].cv_index);
      CHECK(r1.rows[i].failed_pct == r2.rows[i].failed_pct);
      for (const auto* field : {&r1.rows[i].growth_pct, &r1.rows[i].recession_pct,
                                &r1.rows[i].mortality_index, &r1.rows[i].cv_index,
                                &r1.rows[i].failed_pct}) {
        if (*field) CHECK(std::isfinite(**field));
      }
    }
  }

  TEST_CASE("all-failed strategy reports undefined growth and CV") {
    const std::vector<SocietySummary> base{summary(0, StrategyKind::S0, 1, 100, 0.3, 0.1)};
    std::vector<SocietySummary> all = base;
    all.push_back(summary(0, StrategyKind::Sb, 5, 100, 0.3, 0.1, true));
    const auto r = build_report(all, base);
    const StrategyRow* sb = r.row(StrategyKind::Sb);
    REQUIRE(sb != nullptr);
    CHECK_FALSE(sb->growth_pct.has_value());
    CHECK_FALSE(sb->cv_index.has_value());
    CHECK(*sb->failed_pct == 100.0);
    CHECK(*sb->mortality_index == doctest::Approx(500.0));
  }
}
