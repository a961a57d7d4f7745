#include "fairsoc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairsoc/errors.hpp"

namespace fairsoc {

namespace {

// Spread below this many ulps of the best value is rounding noise.
constexpr double kSpreadUlps = 16.0;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sanitize(double value) noexcept { return std::isfinite(value) ? value : kNegInf; }

struct Simplex {
  std::vector<Point> vertices;
  std::vector<double> values;
};

class SimplexRunner {
 public:
  SimplexRunner(const ScoreFn& score, const SimplexOptions& options, std::size_t& evaluations,
                std::vector<double>* trace)
      : score_(score), opts_(options), evaluations_(evaluations), trace_(trace) {}

  double eval(std::span<const double> x) {
    ++evaluations_;
    return sanitize(score_(x));
  }

  // Runs one Nelder-Mead descent (ascent) from the given simplex. On return
  // vertices[0] holds the best vertex.
  void run(Simplex& s) {
    const std::size_t n = s.vertices.size() - 1;
    std::vector<std::size_t> order(n + 1);
    Point centroid(n), reflected(n), trial(n);

    auto sort_simplex = [&] {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.values[a] > s.values[b]; });
      Simplex sorted;
      sorted.vertices.reserve(n + 1);
      sorted.values.reserve(n + 1);
      for (std::size_t i : order) {
        sorted.vertices.push_back(std::move(s.vertices[i]));
        sorted.values.push_back(s.values[i]);
      }
      s = std::move(sorted);
    };

    auto along = [&](const Point& from, const Point& to, double coeff, Point& out) {
      for (std::size_t i = 0; i < n; ++i) out[i] = from[i] + coeff * (to[i] - from[i]);
    };

    for (int iter = 0; iter < opts_.max_iterations; ++iter) {
      sort_simplex();
      if (trace_) trace_->push_back(s.values[0]);
      const double best = s.values[0];
      const double worst = s.values[n];
      if (std::isfinite(worst) && best - worst <= std::max(opts_.tolerance, kSpreadUlps * std::numeric_limits<double>::epsilon() * std::fabs(best))) {
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t i = 0; i < n; ++i) centroid[i] += s.vertices[v][i];
      }
      for (double& c : centroid) c /= static_cast<double>(n);

      // Reflection: centroid + r (centroid - worst).
      along(centroid, s.vertices[n], -opts_.reflection, reflected);
      const double f_reflected = eval(reflected);

      if (f_reflected > s.values[0]) {
        along(centroid, reflected, opts_.expansion, trial);
        const double f_expanded = eval(trial);
        if (f_expanded > f_reflected) {
          s.vertices[n] = trial;
          s.values[n] = f_expanded;
        } else {
          s.vertices[n] = reflected;
          s.values[n] = f_reflected;
        }
        continue;
      }
      if (f_reflected > s.values[n - 1]) {
        s.vertices[n] = reflected;
        s.values[n] = f_reflected;
        continue;
      }

      const bool outside = f_reflected > s.values[n];
      along(centroid, outside ? reflected : s.vertices[n], opts_.contraction, trial);
      const double f_contracted = eval(trial);
      if (f_contracted > (outside ? f_reflected : s.values[n]) ||
          (!outside && f_contracted == s.values[n] && std::isfinite(f_contracted))) {
        s.vertices[n] = trial;
        s.values[n] = f_contracted;
        continue;
      }

      for (std::size_t v = 1; v <= n; ++v) {
        along(s.vertices[0], s.vertices[v], opts_.shrink, trial);
        s.vertices[v] = trial;
        s.values[v] = eval(s.vertices[v]);
      }
    }
    sort_simplex();
  }

  Simplex axis_simplex(const Point& base, double base_value, double step) {
    Simplex s;
    s.vertices.push_back(base);
    s.values.push_back(base_value);
    for (std::size_t i = 0; i < base.size(); ++i) {
      Point v = base;
      v[i] += step;
      s.values.push_back(eval(v));
      s.vertices.push_back(std::move(v));
    }
    return s;
  }

  Simplex perturbed_simplex(const Point& base, double base_value, double scale, RngStream& rng) {
    Simplex s;
    s.vertices.push_back(base);
    s.values.push_back(base_value);
    for (std::size_t j = 0; j < base.size(); ++j) {
      Point v = base;
      for (double& x : v) x += gaussian(rng, 0.0, scale);
      s.values.push_back(eval(v));
      s.vertices.push_back(std::move(v));
    }
    return s;
  }

  // Initial run plus `restarts` perturbed re-runs around the incumbent, then
  // up to `extra_restarts` more while a re-run still improves the incumbent.
  std::pair<Point, double> solve(const Point& start, double start_value, int restarts,
                                 int extra_restarts, RngStream& rng) {
    Point best = start;
    double best_value = start_value;
    Simplex s = axis_simplex(start, start_value, opts_.initial_step);
    for (int round = 0;; ++round) {
      run(s);
      const double gain = s.values[0] - best_value;
      if (s.values[0] > best_value) {
        best = s.vertices[0];
        best_value = s.values[0];
      }
      if (round >= restarts + extra_restarts) break;
      if (round >= restarts && !(gain > opts_.tolerance)) break;
      s = perturbed_simplex(best, best_value, opts_.restart_scale, rng);
    }
    return {std::move(best), best_value};
  }

 private:
  const ScoreFn& score_;
  const SimplexOptions& opts_;
  std::size_t& evaluations_;
  std::vector<double>* trace_;
};

OptimumResult solve_blockwise(const Objective& objective, Point x, double fx,
                              const SimplexOptions& options, RngStream& rng,
                              OptimumResult result) {
  const std::size_t n = objective.arity;
  const std::size_t width = std::max<std::size_t>(1, options.block_size);
  std::vector<std::size_t> block;

  for (int sweep = 1;; ++sweep) {
    const Point before = x;
    const double f_before = fx;

    // Inner block solves stop on a spread relative to the current value.
    SimplexOptions block_options = options;
    block_options.tolerance = options.tolerance * std::max(1.0, std::fabs(fx));
    for (std::size_t first = 0; first < n; first += width) {
      const std::size_t last = std::min(n, first + width);
      block.resize(last - first);
      std::iota(block.begin(), block.end(), first);

      ScoreFn sub;
      if (objective.restrict_to_block) {
        sub = objective.restrict_to_block(x, block);
      } else {
        sub = [&objective, &x, &block](std::span<const double> y) {
          Point full = x;
          for (std::size_t i = 0; i < block.size(); ++i) full[block[i]] = y[i];
          return objective.evaluate(full);
        };
      }

      SimplexRunner runner(sub, block_options, result.evaluations, nullptr);
      Point y0(block.size());
      for (std::size_t i = 0; i < block.size(); ++i) y0[i] = x[block[i]];
      const double g0 = runner.eval(y0);
      auto [y, g] = runner.solve(y0, g0, 0, 0, rng);
      if (g > g0) {
        for (std::size_t i = 0; i < block.size(); ++i) x[block[i]] = y[i];
      }
    }

    ++result.evaluations;
    fx = sanitize(objective.evaluate(x));
    if (!(fx >= f_before)) {
      // Block scores can disagree with the full score in the last ulp.
      x = before;
      fx = f_before;
    }
    if (options.record_trace) result.trace.push_back(fx);

    const double gain = fx - f_before;
    if (sweep >= options.max_sweeps) break;
    if (sweep >= options.min_sweeps &&
        gain <= options.sweep_tolerance * std::max(std::fabs(f_before), 1e-300)) {
      break;
    }
  }
  result.argmax = std::move(x);
  result.value = fx;
  return result;
}

}  // namespace

void SimplexOptions::validate() const {
  if (max_iterations < 1) throw ParameterError("optimizer: max_iterations must be positive");
  if (!(tolerance > 0.0)) throw ParameterError("optimizer: tolerance must be positive");
  if (restarts < 0) throw ParameterError("optimizer: restarts must be non-negative");
  if (extra_restarts < 0) throw ParameterError("optimizer: extra_restarts must be non-negative");
  if (!(reflection > 0.0)) throw ParameterError("optimizer: reflection must be positive");
  if (!(expansion > 1.0)) throw ParameterError("optimizer: expansion must exceed 1");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw ParameterError("optimizer: contraction must lie in (0,1)");
  }
  if (!(shrink > 0.0 && shrink < 1.0)) throw ParameterError("optimizer: shrink must lie in (0,1)");
  if (!(initial_step > 0.0)) throw ParameterError("optimizer: initial_step must be positive");
  if (!(restart_scale > 0.0)) throw ParameterError("optimizer: restart_scale must be positive");
  if (block_size < 1) throw ParameterError("optimizer: block_size must be positive");
  if (min_sweeps < 1 || max_sweeps < min_sweeps) {
    throw ParameterError("optimizer: need 1 <= min_sweeps <= max_sweeps");
  }
}

OptimumResult nelder_mead_max(const Objective& objective, std::span<const double> start,
                              const SimplexOptions& options, RngStream& rng) {
  options.validate();
  if (objective.arity == 0 || start.size() != objective.arity) {
    throw ParameterError("nelder_mead_max: start length must equal the objective arity");
  }
  if (!std::all_of(start.begin(), start.end(), [](double v) { return std::isfinite(v); })) {
    throw InitializationError("nelder_mead_max: start point has non-finite coordinates");
  }

  OptimumResult result;
  Point x(start.begin(), start.end());
  const double f0 = objective.evaluate(x);
  result.evaluations = 1;
  if (!std::isfinite(f0)) {
    throw InitializationError("nelder_mead_max: objective is not finite at the start point");
  }

  if (objective.arity > options.block_threshold) {
    if (options.record_trace) result.trace.push_back(f0);
    return solve_blockwise(objective, std::move(x), f0, options, rng, std::move(result));
  }

  SimplexRunner runner(objective.evaluate, options, result.evaluations,
                       options.record_trace ? &result.trace : nullptr);
  auto [best, value] = runner.solve(x, f0, options.restarts, options.extra_restarts, rng);
  result.argmax = std::move(best);
  result.value = value;
  return result;
}

double logistic(double u) noexcept {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

Point bounded_transform(std::span<const double> unconstrained, std::span<const double> lower,
                        std::span<const double> upper) {
  if (lower.size() != unconstrained.size() || upper.size() != unconstrained.size()) {
    throw ParameterError("bounded_transform: bound vectors must match the input length");
  }
  Point out(unconstrained.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw ParameterError("bounded_transform: lower bound must be below upper bound");
    }
    const double v = lower[i] + (upper[i] - lower[i]) * logistic(unconstrained[i]);
    out[i] = std::clamp(v, std::nextafter(lower[i], upper[i]), std::nextafter(upper[i], lower[i]));
  }
  return out;
}

}  // namespace fairsoc
