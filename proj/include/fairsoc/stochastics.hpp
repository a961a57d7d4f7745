#pragma once

// Seed-reproducible random streams and the samplers used by the simulation.
//
// Every stream is identified by a lineage tuple (master seed, strategy,
// society, purpose). The generator state is a pure function of that tuple,
// so societies can be simulated in any order or on any thread and still
// produce identical draws.

#include <array>
#include <cstdint>

namespace fairsoc {

/// Purpose tags give each simulation phase its own stream.
enum class Purpose : std::uint32_t {
  Proposal = 0,
  Optimizer = 1,
  Mating = 2,
  Reproduction = 3,
  Mutation = 4,
  Mortality = 5,
};

struct Lineage {
  std::uint64_t master_seed = 0;
  std::uint32_t strategy_tag = 0;
  std::uint64_t society_index = 0;
  std::uint32_t purpose_tag = 0;

  friend bool operator==(const Lineage&, const Lineage&) = default;
};

/// xoshiro256** seeded through a splitmix64 hash of the lineage tuple.
class RngStream {
 public:
  explicit RngStream(const Lineage& lineage);

  std::uint64_t next_u64() noexcept;

  /// Independent child stream keyed by `key`. Depends on the lineage and
  /// key only, never on how many draws this stream has produced.
  RngStream split(std::uint64_t key) const;

  const Lineage& lineage() const noexcept { return lineage_; }

 private:
  RngStream(const Lineage& lineage, std::uint64_t digest);
  void seed_from(std::uint64_t digest) noexcept;

  Lineage lineage_;
  std::uint64_t digest_ = 0;
  std::array<std::uint64_t, 4> s_{};
};

RngStream derive_stream(std::uint64_t master_seed, std::uint32_t strategy_tag,
                        std::uint64_t society_index, std::uint32_t purpose_tag);

inline RngStream derive_stream(std::uint64_t master_seed, std::uint32_t strategy_tag,
                               std::uint64_t society_index, Purpose purpose) {
  return derive_stream(master_seed, strategy_tag, society_index,
                       static_cast<std::uint32_t>(purpose));
}

/// splitmix64 finalizer; exposed for hashing config digests and tests.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Uniform on [0,1) with 53 random bits.
double uniform01(RngStream& stream) noexcept;

/// Exp(rate) by inversion. Throws ParameterError unless rate > 0.
double exponential(RngStream& stream, double rate);

/// Poisson(mean): inversion for small means, PTRS rejection otherwise.
/// Throws ParameterError for negative or non-finite mean.
std::uint64_t poisson(RngStream& stream, double mean);

/// True with probability p; p outside [0,1] throws ParameterError.
bool bernoulli(RngStream& stream, double p);

/// Normal(mean, sd^2) via Box-Muller. sd == 0 returns mean without drawing.
double gaussian(RngStream& stream, double mean, double sd);

}  // namespace fairsoc
