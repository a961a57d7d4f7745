#pragma once

// Derivative-free maximization by the Nelder-Mead simplex method.
//
// Runs are restarted around the incumbent with random perturbations drawn
// from the caller's stream. Problems with more than `block_threshold`
// coordinates are solved by cyclic block-coordinate sweeps, each block being
// a small Nelder-Mead problem.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fairsoc/stochastics.hpp"

namespace fairsoc {

using Point = std::vector<double>;
using ScoreFn = std::function<double(std::span<const double>)>;

struct Objective {
  std::size_t arity = 0;
  /// Higher is better. Non-finite scores are treated as -infinity.
  ScoreFn evaluate;
  /// Optional fast path for block mode. Returns a score of the block
  /// coordinates equal to `evaluate` on `point` with `block` substituted.
  /// The returned function may reference `point` and `block`, which stay
  /// alive and unchanged while it is in use.
  std::function<ScoreFn(std::span<const double> point, std::span<const std::size_t> block)>
      restrict_to_block;
};

struct SimplexOptions {
  int max_iterations = 2000;
  double tolerance = 1e-8;
  int restarts = 4;
  /// Further restarts allowed while each one still improves the best value.
  int extra_restarts = 16;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_step = 0.25;
  double restart_scale = 0.5;
  std::size_t block_size = 10;
  std::size_t block_threshold = 40;
  int min_sweeps = 2;
  int max_sweeps = 50;
  double sweep_tolerance = 1e-6;
  /// Keep the best value after every iteration in OptimumResult::trace.
  bool record_trace = false;

  /// Throws ParameterError for inadmissible coefficients or limits.
  void validate() const;
};

struct OptimumResult {
  Point argmax;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> trace;
};

/// Throws InitializationError when the objective is not finite at `start`.
OptimumResult nelder_mead_max(const Objective& objective, std::span<const double> start,
                              const SimplexOptions& options, RngStream& rng);

double logistic(double u) noexcept;
double logit(double p) noexcept;

/// Maps unconstrained coordinates into the open box (lower, upper).
Point bounded_transform(std::span<const double> unconstrained, std::span<const double> lower,
                        std::span<const double> upper);

}  // namespace fairsoc
