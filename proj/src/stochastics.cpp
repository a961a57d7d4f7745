#include "fairsoc/stochastics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fairsoc/errors.hpp"

namespace fairsoc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t combine(std::uint64_t h, std::uint64_t value, std::uint64_t salt) noexcept {
  return mix64(h ^ mix64(value + salt * kGolden));
}

std::uint64_t lineage_digest(const Lineage& l) noexcept {
  std::uint64_t h = mix64(l.master_seed);
  h = combine(h, l.strategy_tag, 1);
  h = combine(h, l.society_index, 2);
  h = combine(h, l.purpose_tag, 3);
  return h;
}

// log Gamma(x) for x >= 1, Stirling series with upward recurrence for x < 7.
double log_gamma(double x) {
  static constexpr double a[] = {8.333333333333333e-02, -2.777777777777778e-03,
                                 7.936507936507937e-04, -5.952380952380952e-04,
                                 8.417508417508418e-04, -1.917526917526918e-03,
                                 6.410256410256410e-03, -2.955065359477124e-02,
                                 1.796443723688307e-01, -1.39243221690590e+00};
  if (x == 1.0 || x == 2.0) return 0.0;
  double x0 = x;
  int n = 0;
  if (x <= 7.0) {
    n = static_cast<int>(7 - x);
    x0 = x + n;
  }
  const double x2 = 1.0 / (x0 * x0);
  double gl0 = a[9];
  for (int k = 8; k >= 0; --k) gl0 = gl0 * x2 + a[k];
  double gl = gl0 / x0 + 0.5 * std::log(2.0 * std::numbers::pi) + (x0 - 0.5) * std::log(x0) - x0;
  for (int k = 1; k <= n; ++k) {
    x0 -= 1.0;
    gl -= std::log(x0);
  }
  return gl;
}

std::uint64_t poisson_inversion(RngStream& stream, double mean) {
  const double u = uniform01(stream);
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  // The tail guard only matters when cumulative rounding leaves cdf < u.
  while (u >= cdf && k < 1000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

// Hormann (1993) transformed rejection with squeeze, valid for mean >= 10.
std::uint64_t poisson_ptrs(RngStream& stream, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform01(stream) - 0.5;
    const double v = uniform01(stream);
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - log_gamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(const Lineage& lineage) : RngStream(lineage, lineage_digest(lineage)) {}

RngStream::RngStream(const Lineage& lineage, std::uint64_t digest)
    : lineage_(lineage), digest_(digest) {
  seed_from(digest);
}

void RngStream::seed_from(std::uint64_t digest) noexcept {
  std::uint64_t x = digest;
  for (auto& word : s_) {
    x += kGolden;
    word = mix64(x);
  }
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

RngStream RngStream::split(std::uint64_t key) const {
  return RngStream(lineage_, combine(digest_, key, 4));
}

RngStream derive_stream(std::uint64_t master_seed, std::uint32_t strategy_tag,
                        std::uint64_t society_index, std::uint32_t purpose_tag) {
  return RngStream(Lineage{master_seed, strategy_tag, society_index, purpose_tag});
}

double uniform01(RngStream& stream) noexcept {
  return static_cast<double>(stream.next_u64() >> 11) * 0x1.0p-53;
}

double exponential(RngStream& stream, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ParameterError("exponential: rate must be positive and finite, got " +
                         std::to_string(rate));
  }
  // 1 - u lies in (0,1], so the logarithm is finite.
  return -std::log1p(-uniform01(stream)) / rate;
}

std::uint64_t poisson(RngStream& stream, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw ParameterError("poisson: mean must be non-negative and finite, got " +
                         std::to_string(mean));
  }
  if (mean == 0.0) return 0;
  return mean < 10.0 ? poisson_inversion(stream, mean) : poisson_ptrs(stream, mean);
}

bool bernoulli(RngStream& stream, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError("bernoulli: probability must lie in [0,1], got " + std::to_string(p));
  }
  return uniform01(stream) < p;
}

double gaussian(RngStream& stream, double mean, double sd) {
  if (!(sd >= 0.0) || !std::isfinite(sd)) {
    throw ParameterError("gaussian: sd must be non-negative and finite, got " +
                         std::to_string(sd));
  }
  if (sd == 0.0) return mean;
  const double u1 = 1.0 - uniform01(stream);
  const double u2 = uniform01(stream);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + sd * radius * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace fairsoc
