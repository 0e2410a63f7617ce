#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gwgp/errors.hpp"

namespace gwgp {

using ParamMap = std::map<std::string, double>;

enum class ParamScale { Linear, Log };

struct ParamRange {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  ParamScale scale = ParamScale::Log;
};

/// Box-bounded search space. Log-scaled parameters are searched in ln-space.
class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<ParamRange> params) : params_(std::move(params)) {}

  void add(ParamRange p) {
    for (auto& existing : params_)
      if (existing.name == p.name) {
        existing = std::move(p);
        return;
      }
    params_.push_back(std::move(p));
  }

  void validate() const {
    if (params_.empty()) throw ConfigError("search space is empty");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& p = params_[i];
      if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper))
        throw ConfigError("search range for '" + p.name + "' needs finite lower < upper");
      if (p.scale == ParamScale::Log && !(p.lower > 0.0))
        throw ConfigError("log-scaled parameter '" + p.name + "' needs lower > 0");
      for (std::size_t j = 0; j < i; ++j)
        if (params_[j].name == p.name) throw ConfigError("duplicate search parameter '" + p.name + "'");
    }
  }

  void remove(const std::string& name) {
    std::erase_if(params_, [&](const auto& p) { return p.name == name; });
  }

  bool contains(const std::string& name) const {
    return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p.name == name; });
  }

  std::size_t size() const noexcept { return params_.size(); }
  const std::vector<ParamRange>& params() const noexcept { return params_; }
  const ParamRange& operator[](std::size_t i) const { return params_[i]; }

  double internal_lower(std::size_t i) const { return to_internal(i, params_[i].lower); }
  double internal_upper(std::size_t i) const { return to_internal(i, params_[i].upper); }

  double to_internal(std::size_t i, double v) const {
    return params_[i].scale == ParamScale::Log ? std::log(v) : v;
  }
  double to_natural(std::size_t i, double v) const {
    if (params_[i].scale == ParamScale::Log) return std::clamp(std::exp(v), params_[i].lower, params_[i].upper);
    return v;
  }

  ParamMap to_map(std::span<const double> natural) const {
    ParamMap m;
    for (std::size_t i = 0; i < params_.size(); ++i) m[params_[i].name] = natural[i];
    return m;
  }

 private:
  std::vector<ParamRange> params_;
};

struct SwarmConfig {
  int particles = 40;
  int iterations = 300;
  double beta_start = 1.0;  // contraction-expansion coefficient, linearly annealed
  double beta_end = 0.5;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;  // early stop when the best improves less than this ...
  int patience = 50;        // ... over this many iterations
  unsigned threads = 1;     // objective evaluations per iteration run on this many workers

  void validate() const {
    if (particles < 2) throw ConfigError("swarm needs at least 2 particles");
    if (iterations < 1) throw ConfigError("swarm needs at least 1 iteration");
    for (double b : {beta_start, beta_end})
      if (!(b > 0.0 && b < 2.0)) throw ConfigError("contraction-expansion coefficients must lie in (0, 2)");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

struct OptimResult {
  std::vector<double> best;            // natural scale, in search-space order
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> trace;           // best-so-far after initialization and each iteration
  std::vector<std::size_t> evaluations_trace;
  std::size_t evaluations = 0;
  std::vector<double> initial_values;  // objective at the initial particle positions
};

using Objective = std::function<double(std::span<const double>)>;

namespace detail {

inline double safe_eval(const Objective& f, std::span<const double> x) {
  double v;
  try {
    v = f(x);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

// Evaluates every particle; results land in index order regardless of the
// worker count.
inline void evaluate_all(const Objective& f, const SearchSpace& space,
                         const std::vector<std::vector<double>>& positions, std::vector<double>& out,
                         unsigned threads) {
  const std::size_t n = positions.size();
  out.assign(n, 0.0);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> natural(space.size());
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t d = 0; d < space.size(); ++d) natural[d] = space.to_natural(d, positions[i][d]);
      out[i] = safe_eval(f, natural);
    }
  };
  if (threads <= 1 || n < 2) {
    work(0, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back(work, n * w / workers, n * (w + 1) / workers);
}

}  // namespace detail

/// Quantum-behaved particle swarm minimization (mean-best-position form).
/// Each coordinate moves to
///   x <- p +/- beta |mbest - x| ln(1/u),
/// where p is a random convex mix of the personal and global bests and
/// mbest is the mean of all personal bests. Proposals are clamped to the box.
inline OptimResult qpso_minimize(const Objective& objective, const SearchSpace& space,
                                 const SwarmConfig& cfg) {
  space.validate();
  cfg.validate();
  const std::size_t dims = space.size();
  const auto np = static_cast<std::size_t>(cfg.particles);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> lo(dims), hi(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    lo[d] = space.internal_lower(d);
    hi[d] = space.internal_upper(d);
  }

  std::vector<std::vector<double>> x(np, std::vector<double>(dims));
  for (auto& particle : x)
    for (std::size_t d = 0; d < dims; ++d) particle[d] = lo[d] + unif(rng) * (hi[d] - lo[d]);

  OptimResult res;
  std::vector<double> f;
  detail::evaluate_all(objective, space, x, f, cfg.threads);
  res.evaluations = np;
  res.initial_values = f;

  std::vector<std::vector<double>> pbest = x;
  std::vector<double> pbest_f = f;
  std::size_t g = 0;
  for (std::size_t i = 1; i < np; ++i)
    if (pbest_f[i] < pbest_f[g]) g = i;
  res.trace.push_back(pbest_f[g]);
  res.evaluations_trace.push_back(res.evaluations);

  std::vector<double> mbest(dims);
  for (int it = 1; it <= cfg.iterations; ++it) {
    const double frac = cfg.iterations > 1 ? double(it - 1) / double(cfg.iterations - 1) : 0.0;
    const double beta = cfg.beta_start + (cfg.beta_end - cfg.beta_start) * frac;

    std::fill(mbest.begin(), mbest.end(), 0.0);
    for (const auto& p : pbest)
      for (std::size_t d = 0; d < dims; ++d) mbest[d] += p[d];
    for (auto& m : mbest) m /= double(np);

    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t d = 0; d < dims; ++d) {
        const double phi = unif(rng);
        const double attractor = phi * pbest[i][d] + (1.0 - phi) * pbest[g][d];
        const double u = 1.0 - unif(rng);  // (0, 1]
        const double step = beta * std::abs(mbest[d] - x[i][d]) * std::log(1.0 / u);
        const double v = unif(rng) < 0.5 ? attractor - step : attractor + step;
        x[i][d] = std::clamp(v, lo[d], hi[d]);
      }

    detail::evaluate_all(objective, space, x, f, cfg.threads);
    res.evaluations += np;
    for (std::size_t i = 0; i < np; ++i)
      if (f[i] < pbest_f[i]) {
        pbest_f[i] = f[i];
        pbest[i] = x[i];
      }
    for (std::size_t i = 0; i < np; ++i)
      if (pbest_f[i] < pbest_f[g]) g = i;

    res.trace.push_back(pbest_f[g]);
    res.evaluations_trace.push_back(res.evaluations);

    const auto k = res.trace.size() - 1;
    if (k >= static_cast<std::size_t>(cfg.patience) &&
        res.trace[k - static_cast<std::size_t>(cfg.patience)] - res.trace[k] < cfg.tolerance)
      break;
  }

  res.best_value = pbest_f[g];
  res.best.resize(dims);
  for (std::size_t d = 0; d < dims; ++d) res.best[d] = space.to_natural(d, pbest[g][d]);
  return res;
}

}  // namespace gwgp
