#include <cmath>
#include <vector>

#include "doctest.h"
#include "fairsoc/errors.hpp"
#include "fairsoc/stochastics.hpp"
#include "oracles.hpp"

using namespace fairsoc;

namespace {

constexpr int kDraws = 100000;

RngStream stream(std::uint64_t seed = 42, std::uint64_t society = 0, std::uint32_t purpose = 0) {
  return derive_stream(seed, 0, society, purpose);
}

}  // namespace

TEST_SUITE("stochastics") {
  TEST_CASE("same lineage replays the same sequence") {
    RngStream a = stream();
    RngStream b = stream();
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("different society index gives a different sequence") {
    RngStream a = stream(42, 0);
    RngStream b = stream(42, 1);
    int differing = 0;
    for (int i = 0; i < 1000; ++i) differing += uniform01(a) != uniform01(b);
    CHECK(differing > 0);
  }

  TEST_CASE("every lineage component matters") {
    const std::uint64_t base = derive_stream(7, 3, 99, 2).next_u64();
    CHECK(derive_stream(8, 3, 99, 2).next_u64() != base);
    CHECK(derive_stream(7, 4, 99, 2).next_u64() != base);
    CHECK(derive_stream(7, 3, 98, 2).next_u64() != base);
    CHECK(derive_stream(7, 3, 99, 1).next_u64() != base);
    CHECK(derive_stream(7, 3, 99, 2).lineage() == Lineage{7, 3, 99, 2});
  }

  TEST_CASE("split depends on the key and not on draws consumed") {
    RngStream parent = stream();
    const RngStream before = parent.split(5);
    for (int i = 0; i < 17; ++i) parent.next_u64();
    RngStream after = parent.split(5);
    RngStream copy = before;
    for (int i = 0; i < 100; ++i) CHECK(copy.next_u64() == after.next_u64());
    RngStream other = parent.split(6);
    RngStream again = parent.split(5);
    CHECK(other.next_u64() != again.next_u64());
  }

  TEST_CASE("consuming one purpose stream leaves another untouched") {
    RngStream mating = stream(1, 0, static_cast<std::uint32_t>(Purpose::Mating));
    RngStream mortality_a = stream(1, 0, static_cast<std::uint32_t>(Purpose::Mortality));
    for (int i = 0; i < 500; ++i) mating.next_u64();
    RngStream mortality_b = stream(1, 0, static_cast<std::uint32_t>(Purpose::Mortality));
    for (int i = 0; i < 100; ++i) CHECK(mortality_a.next_u64() == mortality_b.next_u64());
  }

  TEST_CASE("uniform01 range, mean and KS fit") {
    RngStream s = stream(11);
    std::vector<double> xs(kDraws);
    double sum = 0.0;
    for (double& x : xs) {
      x = uniform01(s);
      REQUIRE(x >= 0.0);
      REQUIRE(x < 1.0);
      sum += x;
    }
    CHECK(std::abs(sum / kDraws - 0.5) < 0.01);
    const double d = oracle::ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(d < oracle::ks_critical_1pct(kDraws));
  }

  TEST_CASE("exponential is the inverse CDF of the next uniform") {
    RngStream a = stream(3);
    RngStream b = a;
    const double u = uniform01(b);
    CHECK(exponential(a, 1.0) == doctest::Approx(-std::log(1.0 - u)).epsilon(1e-15));
    // At u = 0.5 the inversion gives ln 2.
    CHECK(-std::log(1.0 - 0.5) == doctest::Approx(0.6931471805599453));
  }

  TEST_CASE("exponential mean and KS fit") {
    RngStream s = stream(12);
    std::vector<double> xs(kDraws);
    double sum = 0.0;
    for (double& x : xs) {
      x = exponential(s, 1.0);
      REQUIRE(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum / kDraws - 1.0) < 0.02);
    const double d = oracle::ks_statistic(xs, [](double x) { return 1.0 - std::exp(-x); });
    CHECK(d < oracle::ks_critical_1pct(kDraws));

    RngStream t = stream(13);
    std::vector<double> ys(kDraws);
    for (double& y : ys) y = exponential(t, 2.5);
    CHECK(oracle::ks_statistic(ys, [](double x) { return 1.0 - std::exp(-2.5 * x); }) <
          oracle::ks_critical_1pct(kDraws));
  }

  TEST_CASE("exponential rejects a non-positive rate") {
    RngStream s = stream();
    CHECK_THROWS_AS(exponential(s, 0.0), ParameterError);
    CHECK_THROWS_AS(exponential(s, -1.0), ParameterError);
  }

  TEST_CASE("poisson degenerate and invalid means") {
    RngStream s = stream();
    for (int i = 0; i < 100; ++i) CHECK(poisson(s, 0.0) == 0);
    CHECK_THROWS_AS(poisson(s, -1.0), ParameterError);
    CHECK_THROWS_AS(poisson(s, std::nan("")), ParameterError);
  }

  TEST_CASE("poisson moments and chi-square fit across both sampling regimes") {
    for (double mean : {2.0, 0.3, 7.5, 10.0, 35.0, 400.0}) {
      CAPTURE(mean);
      RngStream s = stream(static_cast<std::uint64_t>(mean * 1000) + 5);
      std::vector<long> draws(kDraws);
      double sum = 0.0, sum2 = 0.0;
      for (long& d : draws) {
        d = static_cast<long>(poisson(s, mean));
        sum += static_cast<double>(d);
        sum2 += static_cast<double>(d) * static_cast<double>(d);
      }
      const double m = sum / kDraws;
      const double var = sum2 / kDraws - m * m;
      if (mean == 2.0) {
        CHECK(std::abs(m - 2.0) < 0.03);
        CHECK(std::abs(var - 2.0) < 0.1);
      }
      CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / kDraws));
      const auto [chi, df] = oracle::poisson_chi_square(draws, mean);
      CAPTURE(chi);
      CAPTURE(df);
      CHECK(chi < oracle::chi_square_critical_01pct(df));
    }
  }

  TEST_CASE("bernoulli edges, frequency and invalid probability") {
    RngStream s = stream(21);
    for (int i = 0; i < 1000; ++i) {
      CHECK_FALSE(bernoulli(s, 0.0));
      CHECK(bernoulli(s, 1.0));
    }
    int hits = 0;
    for (int i = 0; i < kDraws; ++i) hits += bernoulli(s, 0.3);
    const double p = static_cast<double>(hits) / kDraws;
    CHECK(std::abs(p - 0.3) < 0.01);
    CHECK(std::abs(p - 0.3) < 2.5758 * std::sqrt(0.3 * 0.7 / kDraws));
    CHECK_THROWS_AS(bernoulli(s, -0.1), ParameterError);
    CHECK_THROWS_AS(bernoulli(s, 1.1), ParameterError);
  }

  TEST_CASE("gaussian degenerate sd, spread, KS fit and invalid sd") {
    RngStream s = stream(31);
    CHECK(gaussian(s, 5.0, 0.0) == 5.0);
    std::vector<double> xs(kDraws);
    double sum = 0.0, sum2 = 0.0;
    for (double& x : xs) {
      x = gaussian(s, 0.0, 1.0);
      sum += x;
      sum2 += x * x;
    }
    const double m = sum / kDraws;
    CHECK(std::abs(std::sqrt(sum2 / kDraws - m * m) - 1.0) < 0.02);
    CHECK(oracle::ks_statistic(xs, oracle::normal_cdf) < oracle::ks_critical_1pct(kDraws));
    CHECK_THROWS_AS(gaussian(s, 0.0, -0.1), ParameterError);
  }

  TEST_CASE("sd = 0 consumes no draws") {
    RngStream a = stream(2);
    RngStream b = stream(2);
    gaussian(a, 1.0, 0.0);
    CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("mix64 is deterministic and separates neighbouring inputs") {
    CHECK(mix64(0) != mix64(1));
    CHECK(mix64(1) != mix64(2));
    CHECK(mix64(12345) == mix64(12345));
  }
}
