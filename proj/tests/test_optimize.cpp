#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "gwgp/optimize.hpp"
#include "gwgp/synth.hpp"

using namespace gwgp;

namespace {

SearchSpace box(std::initializer_list<ParamRange> ranges) { return SearchSpace(std::vector<ParamRange>(ranges)); }

SwarmConfig swarm(int particles, int iterations, std::uint64_t seed = 1) {
  SwarmConfig c;
  c.particles = particles;
  c.iterations = iterations;
  c.seed = seed;
  return c;
}

double quadratic(std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); }

double rosenbrock(std::span<const double> x) {
  return (1.0 - x[0]) * (1.0 - x[0]) + 100.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]);
}

KernelSpec se1d() {
  return make_kernel(KernelKind::SquaredExponential, {{"l", 1.0}, {"sigma_f2", 1.0}}, InputSpace::Cartesian);
}

struct Data1D {
  std::vector<Location> xs;
  std::vector<double> y;
};

// Draw from SE(l = 0.3, sigma_f2 = 1) plus noise of variance 0.01.
Data1D se_data(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  Data1D d;
  for (int i = 0; i < 100; ++i) d.xs.push_back(Location::from_cartesian({u(rng), 0.0}));
  const KernelSpec truth = make_kernel(KernelKind::SquaredExponential, {{"l", 0.3}, {"sigma_f2", 1.0}});
  const Eigen::MatrixXd f = sample_prior(truth, ZeroMean{}, d.xs, 1, seed + 1);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < f.rows(); ++i) d.y.push_back(f(i, 0) + 0.1 * normal(rng));
  return d;
}

SearchSpace se_space() {
  return box({{"l", 0.01, 5.0}, {"sigma_f2", 0.01, 100.0}, {"sigma_n2", 1e-5, 1.0}});
}

}  // namespace

TEST(SearchSpace, Validation) {
  EXPECT_THROW(SearchSpace().validate(), ConfigError);
  EXPECT_THROW(box({{"a", 1.0, 1.0}}).validate(), ConfigError);
  EXPECT_THROW(box({{"a", 0.0, 1.0, ParamScale::Log}}).validate(), ConfigError);
  EXPECT_THROW(box({{"a", -1.0, std::numeric_limits<double>::infinity(), ParamScale::Linear}}).validate(),
               ConfigError);
  EXPECT_NO_THROW(box({{"a", -1.0, 1.0, ParamScale::Linear}}).validate());
}

TEST(SearchSpace, LogScaleRoundTrip) {
  const SearchSpace s = box({{"a", 1e-3, 1e3}, {"b", -2.0, 2.0, ParamScale::Linear}});
  EXPECT_NEAR(s.internal_lower(0), std::log(1e-3), 1e-15);
  EXPECT_NEAR(s.to_natural(0, s.to_internal(0, 0.37)), 0.37, 1e-15);
  EXPECT_EQ(s.to_internal(1, -1.5), -1.5);
  // exp(ln(upper)) can land one ulp outside the box; natural values are clamped.
  EXPECT_LE(s.to_natural(0, s.internal_upper(0)), 1e3);
}

TEST(SwarmConfig, Validation) {
  const SearchSpace s = box({{"x", 0.0, 10.0, ParamScale::Linear}});
  SwarmConfig c = swarm(0, 10);
  EXPECT_THROW(qpso_minimize(quadratic, s, c), ConfigError);
  c = swarm(10, 0);
  EXPECT_THROW(qpso_minimize(quadratic, s, c), ConfigError);
  c = swarm(10, 10);
  c.beta_start = -1.0;
  EXPECT_THROW(qpso_minimize(quadratic, s, c), ConfigError);
}

TEST(Qpso, QuadraticOptimum) {
  const OptimResult r = qpso_minimize(quadratic, box({{"x", 0.0, 10.0, ParamScale::Linear}}), swarm(30, 100));
  ASSERT_EQ(r.best.size(), 1u);
  EXPECT_NEAR(r.best[0], 3.0, 1e-3);
  EXPECT_EQ(r.best_value, quadratic(r.best));
}

TEST(Qpso, Rosenbrock) {
  const SearchSpace s = box({{"x", -2.0, 2.0, ParamScale::Linear}, {"y", -2.0, 2.0, ParamScale::Linear}});
  const OptimResult r = qpso_minimize(rosenbrock, s, swarm(50, 200));
  EXPECT_LT(r.best_value, 1e-2);
}

TEST(Qpso, ConstantObjectiveGivesFlatTrace) {
  const SearchSpace s = box({{"x", 1.0, 2.0}, {"y", -1.0, 1.0, ParamScale::Linear}});
  const OptimResult r = qpso_minimize([](std::span<const double>) { return 4.0; }, s, swarm(10, 20));
  for (double v : r.trace) EXPECT_EQ(v, 4.0);
  EXPECT_GE(r.best[0], 1.0);
  EXPECT_LE(r.best[0], 2.0);
}

TEST(Qpso, TraceIsMonotoneAndBestBeatsInitialParticles) {
  const SearchSpace s = box({{"x", -2.0, 2.0, ParamScale::Linear}, {"y", -2.0, 2.0, ParamScale::Linear}});
  const OptimResult r = qpso_minimize(rosenbrock, s, swarm(20, 80, 9));
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
  for (double v : r.initial_values) EXPECT_LE(r.best_value, v);
  EXPECT_EQ(r.trace.back(), r.best_value);
  EXPECT_EQ(r.evaluations, r.evaluations_trace.back());
  EXPECT_EQ(r.initial_values.size(), 20u);
}

TEST(Qpso, SeedDeterminismAndThreadInvariance) {
  const SearchSpace s = box({{"x", -2.0, 2.0, ParamScale::Linear}, {"y", -2.0, 2.0, ParamScale::Linear}});
  SwarmConfig c = swarm(16, 40, 123);
  const OptimResult a = qpso_minimize(rosenbrock, s, c);
  const OptimResult b = qpso_minimize(rosenbrock, s, c);
  c.threads = 4;
  const OptimResult t = qpso_minimize(rosenbrock, s, c);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.trace, t.trace);
  EXPECT_EQ(a.best, t.best);
  c.threads = 1;
  c.seed = 124;
  EXPECT_NE(qpso_minimize(rosenbrock, s, c).trace, a.trace);
}

TEST(Qpso, FailingEvaluationsScoreInfinity) {
  const SearchSpace s = box({{"x", 0.0, 10.0, ParamScale::Linear}});
  const Objective f = [](std::span<const double> x) -> double {
    if (x[0] > 5.0) throw std::runtime_error("bad region");
    if (x[0] < 1.0) return std::numeric_limits<double>::quiet_NaN();
    return (x[0] - 3.0) * (x[0] - 3.0);
  };
  const OptimResult r = qpso_minimize(f, s, swarm(20, 60));
  EXPECT_NEAR(r.best[0], 3.0, 1e-3);
  for (double v : r.initial_values) EXPECT_FALSE(std::isnan(v));
}

TEST(Qpso, EarlyStopWhenStalled) {
  SwarmConfig c = swarm(10, 1000);
  c.patience = 5;
  c.tolerance = 1.0;
  const OptimResult r = qpso_minimize([](std::span<const double>) { return 0.0; },
                                      box({{"x", 1.0, 2.0}}), c);
  EXPECT_EQ(r.trace.size(), 6u);
}

TEST(FitHyperparameters, MissingNoiseParameter) {
  const Data1D d = se_data(1);
  SearchSpace s = se_space();
  s.remove("sigma_n2");
  EXPECT_THROW(fit_hyperparameters(kernel_template(se1d()), d.xs, d.y, s, swarm(5, 2)), MissingParameter);
  try {
    fit_hyperparameters(kernel_template(se1d()), d.xs, d.y, s, swarm(5, 2));
  } catch (const MissingParameter& e) {
    EXPECT_EQ(e.name(), "sigma_n2");
  }
  SearchSpace e = default_search_space(ModelStrategy::E, d.xs, d.y);
  e.remove("l2");
  EXPECT_THROW(fit_hyperparameters(ModelStrategy::E, d.xs, d.y, e, swarm(5, 2)), MissingParameter);
}

TEST(FitHyperparameters, RecoversSquaredExponentialParameters) {
  const Data1D d = se_data(2024);
  const HyperFit fit = fit_hyperparameters(kernel_template(se1d()), d.xs, d.y, se_space(), swarm(30, 100, 5));
  const double l = fit.params.at("l"), noise = fit.params.at("sigma_n2");
  EXPECT_GT(l, 0.3 / 1.5);
  EXPECT_LT(l, 0.3 * 1.5);
  EXPECT_GT(noise, 0.01 / 2.0);
  EXPECT_LT(noise, 0.01 * 2.0);
  EXPECT_NEAR(fit.model.nlml(), fit.result.best_value, 1e-9);
  for (double v : fit.result.initial_values) EXPECT_LE(fit.model.nlml(), v + 1e-9);
  EXPECT_EQ(fit.model.noise_var(), noise);
}

TEST(FitHyperparameters, FixedValuesReachTheModel) {
  const Data1D d = se_data(3);
  SearchSpace s = se_space();
  s.remove("sigma_f2");
  ModelTemplate t = kernel_template(se1d());
  t.fix("sigma_f2", 0.8);
  const HyperFit fit = fit_hyperparameters(t, d.xs, d.y, s, swarm(8, 5));
  EXPECT_EQ(fit.params.at("sigma_f2"), 0.8);
  EXPECT_EQ(fit.model.kernel_spec().hyper.at("sigma_f2"), 0.8);
}

TEST(FitHyperparameters, AttenuationWeightsAreSearched) {
  FieldConfig cfg;
  cfg.grid_nx = cfg.grid_ny = 8;
  const FeatureDataset ds = generate_field(cfg, 4);
  const auto xs = ds.locations();
  const auto y = ds.values();
  const SearchSpace s = default_search_space(ModelStrategy::D, xs, y);
  const HyperFit fit = fit_hyperparameters(ModelStrategy::D, xs, y, s, swarm(10, 10));
  const auto& mean = std::get<AttenuationMean>(fit.model.mean());
  EXPECT_EQ(mean.weights(0), fit.params.at("w1"));
  EXPECT_EQ(mean.weights(1), fit.params.at("w2"));
}

TEST(FitHyperparameters, InputsInsideExclusionRadiusFailFast) {
  std::vector<Location> xs{Location::from_polar(PolarPoint(1.0, 0.0)), Location::from_polar(PolarPoint(20.0, 1.0))};
  std::vector<double> y{1.0, 0.5};
  const SearchSpace s = default_search_space(ModelStrategy::E, xs, y);
  EXPECT_THROW(fit_hyperparameters(ModelStrategy::E, xs, y, s, swarm(5, 2)), DomainError);
}
