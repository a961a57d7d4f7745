#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fairsoc/economy.hpp"
#include "fairsoc/errors.hpp"
#include "fairsoc/optimizer.hpp"
#include "oracles.hpp"

using namespace fairsoc;

namespace {

Objective make(std::size_t arity, ScoreFn f) {
  Objective o;
  o.arity = arity;
  o.evaluate = std::move(f);
  return o;
}

RngStream rng_for(std::uint64_t key) {
  return derive_stream(99, 0, key, static_cast<std::uint32_t>(Purpose::Optimizer));
}

// Strategy-0 objective of one agent in the unconstrained labor coordinate.
double labor_score(double u, double alpha, double others, double gamma) {
  const double l = 24.0 * logistic(u);
  return utility(24.0 - l, consumption(l, others, gamma), Preferences(alpha, 0.0));
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("one-dimensional quadratic") {
    RngStream rng = rng_for(1);
    const auto r = nelder_mead_max(make(1, [](std::span<const double> x) { return -(x[0] - 3) * (x[0] - 3); }),
                                   std::vector<double>{0.0}, SimplexOptions{}, rng);
    CHECK(r.argmax[0] == doctest::Approx(3.0).epsilon(1e-6));
  }

  TEST_CASE("Rosenbrock from (-1.2, 1)") {
    RngStream rng = rng_for(2);
    SimplexOptions opts;
    opts.tolerance = 1e-14;
    const auto rosen = [](std::span<const double> p) {
      const double x = p[0], y = p[1];
      return -(100.0 * (y - x * x) * (y - x * x) + (1.0 - x) * (1.0 - x));
    };
    const auto r = nelder_mead_max(make(2, rosen), std::vector<double>{-1.2, 1.0}, opts, rng);
    CHECK(std::abs(r.argmax[0] - 1.0) < 1e-4);
    CHECK(std::abs(r.argmax[1] - 1.0) < 1e-4);
  }

  TEST_CASE("exogenous-economy labor choice approaches 24 beta") {
    RngStream rng = rng_for(3);
    const auto r = nelder_mead_max(
        make(1, [](std::span<const double> u) { return labor_score(u[0], 0.4, 1e6, 1.2); }),
        std::vector<double>{0.0}, SimplexOptions{}, rng);
    CHECK(std::abs(24.0 * logistic(r.argmax[0]) - 14.4) < 0.01);
  }

  TEST_CASE("one-dimensional results agree with a fine grid search") {
    RngStream draws = derive_stream(4, 0, 0, 0);
    for (int i = 0; i < 25; ++i) {
      const double alpha = 0.05 + 0.9 * uniform01(draws);
      const double gamma = 1.0 + 0.05 + 2.0 * uniform01(draws);
      const double others = 10.0 + 2000.0 * uniform01(draws);
      RngStream rng = rng_for(100 + static_cast<std::uint64_t>(i));
      const auto r = nelder_mead_max(make(1,
                                          [&](std::span<const double> u) {
                                            return labor_score(u[0], alpha, others, gamma);
                                          }),
                                     std::vector<double>{0.0}, SimplexOptions{}, rng);
      const double l_nm = 24.0 * logistic(r.argmax[0]);
      const double l_grid = oracle::grid_argmax(
          [&](double l) {
            return utility(24.0 - l, consumption(l, others, gamma), Preferences(alpha, 0.0));
          },
          0.0, 24.0, 100001);
      CAPTURE(alpha);
      CAPTURE(gamma);
      CHECK(std::abs(l_nm - l_grid) < 1e-3);
    }
  }

  TEST_CASE("best value never decreases across iterations and restarts") {
    RngStream rng = rng_for(5);
    SimplexOptions opts;
    opts.record_trace = true;
    opts.restarts = 3;
    const auto bumpy = [](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += -v * v + std::cos(3.0 * v);
      return s;
    };
    const auto r = nelder_mead_max(make(3, bumpy), std::vector<double>{2.0, -1.5, 0.7}, opts, rng);
    REQUIRE(r.trace.size() > 3);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
    CHECK(r.value == r.trace.back());
  }

  TEST_CASE("block-coordinate mode on a separable problem") {
    RngStream rng = rng_for(6);
    const std::size_t n = 60;
    SimplexOptions opts;
    opts.record_trace = true;
    const auto f = [](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s -= (x[i] - 0.01 * i) * (x[i] - 0.01 * i);
      return s;
    };
    const auto r = nelder_mead_max(make(n, f), std::vector<double>(n, 1.0), opts, rng);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r.argmax[i] - 0.01 * i) < 1e-3);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
  }

  TEST_CASE("every candidate is strictly inside the box after the transform") {
    RngStream rng = rng_for(7);
    bool inside = true;
    const auto f = [&](std::span<const double> u) {
      const std::vector<double> lo(u.size(), 0.0), hi(u.size(), 24.0);
      const Point l = bounded_transform(u, lo, hi);
      double s = 0.0;
      for (double v : l) {
        inside = inside && v > 0.0 && v < 24.0;
        s += v;  // pushes towards the upper bound
      }
      return s;
    };
    nelder_mead_max(make(3, f), std::vector<double>{0.0, 5.0, -5.0}, SimplexOptions{}, rng);
    CHECK(inside);
  }

  TEST_CASE("same inputs and lineage give bit-identical results") {
    const auto f = [](std::span<const double> x) { return -std::abs(x[0] - 1.0) - std::abs(x[1] + 2.0); };
    RngStream a = rng_for(8);
    RngStream b = rng_for(8);
    const auto ra = nelder_mead_max(make(2, f), std::vector<double>{0.0, 0.0}, SimplexOptions{}, a);
    const auto rb = nelder_mead_max(make(2, f), std::vector<double>{0.0, 0.0}, SimplexOptions{}, b);
    CHECK(ra.argmax == rb.argmax);
    CHECK(ra.value == rb.value);
    CHECK(ra.evaluations == rb.evaluations);
  }

  TEST_CASE("non-finite scores are treated as minus infinity") {
    RngStream rng = rng_for(9);
    const auto f = [](std::span<const double> x) {
      return x[0] > 2.0 ? std::numeric_limits<double>::quiet_NaN() : x[0];
    };
    const auto r = nelder_mead_max(make(1, f), std::vector<double>{0.0}, SimplexOptions{}, rng);
    CHECK(r.argmax[0] <= 2.0);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
  }

  TEST_CASE("errors") {
    RngStream rng = rng_for(10);
    const auto nan_start = [](std::span<const double>) { return std::nan(""); };
    CHECK_THROWS_AS(nelder_mead_max(make(1, nan_start), std::vector<double>{0.0}, SimplexOptions{}, rng),
                    InitializationError);
    const auto ok = [](std::span<const double>) { return 0.0; };
    CHECK_THROWS_AS(nelder_mead_max(make(2, ok), std::vector<double>{0.0}, SimplexOptions{}, rng),
                    ParameterError);
    SimplexOptions bad;
    bad.contraction = 1.5;
    CHECK_THROWS_AS(nelder_mead_max(make(1, ok), std::vector<double>{0.0}, bad, rng), ParameterError);
  }

  TEST_CASE("bounded_transform examples") {
    const std::vector<double> lo{0.0}, hi{24.0};
    CHECK(bounded_transform(std::vector<double>{0.0}, lo, hi)[0] == doctest::Approx(12.0));
    CHECK(bounded_transform(std::vector<double>{std::log(3.0)}, lo, hi)[0] == doctest::Approx(18.0));
    const double top = bounded_transform(std::vector<double>{1e6}, lo, hi)[0];
    CHECK(top < 24.0);
    CHECK(top > 23.999999);
    const double bottom = bounded_transform(std::vector<double>{-1e6}, lo, hi)[0];
    CHECK(bottom > 0.0);
    CHECK(logit(logistic(0.7)) == doctest::Approx(0.7));
    CHECK_THROWS_AS(bounded_transform(std::vector<double>{0.0}, hi, lo), ParameterError);
  }
}
