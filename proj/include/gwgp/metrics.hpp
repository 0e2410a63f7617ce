#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gwgp/errors.hpp"
#include "gwgp/gp.hpp"

namespace gwgp {

/// Normalized mean squared error in percent: 100 ||y - y*||^2 / (n var(y)),
/// with the population variance. Predicting the mean of y scores 100.
inline double nmse(std::span<const double> y, std::span<const double> y_star) {
  if (y.size() != y_star.size()) throw DimensionMismatch("observed and predicted lengths differ");
  if (y.size() < 2) throw TooFewPoints("NMSE needs at least 2 points");
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double var = 0.0, sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    var += (y[i] - mean) * (y[i] - mean);
    sse += (y[i] - y_star[i]) * (y[i] - y_star[i]);
  }
  if (!(var > 0.0)) throw DegenerateData("observed values have zero variance");
  return 100.0 * sse / var;
}

inline double nmse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_star) {
  return nmse(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
              std::span<const double>(y_star.data(), static_cast<std::size_t>(y_star.size())));
}

/// Sum of univariate Gaussian log densities using the marginal variances only.
inline double pll_independent(const Eigen::VectorXd& y, const PredictiveDistribution& pred) {
  if (y.size() != pred.mean.size() || y.size() != pred.variance.size())
    throw DimensionMismatch("observations and predictive distribution differ in length");
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = pred.variance(i);
    if (!(v > 0.0)) throw NonpositiveVariance("predictive variance at test point " + std::to_string(i) + " is not > 0");
    const double r = y(i) - pred.mean(i);
    s += -0.5 * (std::log(2.0 * std::numbers::pi * v) + r * r / v);
  }
  return s;
}

/// Log density of the joint Gaussian predictive, covariance included.
inline double pll_correlated(const Eigen::VectorXd& y, const PredictiveDistribution& pred,
                             double max_jitter = 1e-4) {
  const Eigen::Index n = y.size();
  if (n != pred.mean.size()) throw DimensionMismatch("observations and predictive distribution differ in length");
  if (n == 0) return 0.0;
  if (pred.covariance.rows() != n || pred.covariance.cols() != n)
    throw DimensionMismatch("correlated PLL needs the full predictive covariance");
  const JitteredCholesky chol = cholesky_with_jitter(pred.covariance, max_jitter);
  const Eigen::VectorXd z = chol.lower.triangularView<Eigen::Lower>().solve(y - pred.mean);
  const double log_det = 2.0 * chol.lower.diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + log_det + static_cast<double>(n) * std::log(2.0 * std::numbers::pi));
}

inline double training_lml(const GPModel& model) { return -model.nlml(); }

struct SplitSpec {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded uniform split of n items. Both sides get at least one item; each
/// index list is sorted.
inline SplitIndices split(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 4) throw TooFewPoints("split needs at least 4 points");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(idx[i], idx[pick(rng)]);
  }
  auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

template <class T>
std::vector<T> take(std::span<const T> items, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(items[i]);
  return out;
}

struct EvalReport {
  double lml = 0.0;
  double pll_i = 0.0;
  double pll_c = 0.0;
  double nmse = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// Scores a fitted model on held-out data. Predictions include the noise
/// variance and, for log-space models, are mapped back to amplitudes so every
/// strategy is scored in the same units.
inline EvalReport evaluate(const GPModel& model, std::span<const Location> test_x, std::span<const double> test_y) {
  if (test_x.size() != test_y.size()) throw DimensionMismatch("test inputs and targets differ in length");
  PredictOptions po;
  po.noisy = true;
  po.amplitude = true;
  po.full_covariance = true;
  const PredictiveDistribution pred = predict(model, test_x, po);
  const Eigen::Map<const Eigen::VectorXd> y(test_y.data(), static_cast<Eigen::Index>(test_y.size()));
  EvalReport r;
  r.lml = training_lml(model);
  r.pll_i = pll_independent(y, pred);
  r.pll_c = pll_correlated(y, pred);
  r.nmse = nmse(y, pred.mean);
  r.n_train = model.size();
  r.n_test = test_y.size();
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  return {{"lml", r.lml}, {"pll_i", r.pll_i}, {"pll_c", r.pll_c},
          {"nmse", r.nmse}, {"n_train", r.n_train}, {"n_test", r.n_test}};
}

inline constexpr const char* kReportCsvHeader = "lml,pll_i,pll_c,nmse,n_train,n_test";

}  // namespace gwgp
