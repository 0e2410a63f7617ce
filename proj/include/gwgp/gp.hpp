#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gwgp/blr.hpp"
#include "gwgp/errors.hpp"
#include "gwgp/geometry.hpp"
#include "gwgp/kernels.hpp"

namespace gwgp {

struct ZeroMean {
  friend bool operator==(const ZeroMean&, const ZeroMean&) = default;
};

/// Attenuation law along rho used as a log-space mean function.
struct AttenuationMean {
  BasisModel basis = BasisModel::phi3();
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(2);

  friend bool operator==(const AttenuationMean& a, const AttenuationMean& b) {
    return a.basis == b.basis && a.weights.size() == b.weights.size() && a.weights == b.weights;
  }
};

using MeanFunctionSpec = std::variant<ZeroMean, AttenuationMean>;

/// True when the model works on log amplitudes.
inline bool log_space(const MeanFunctionSpec& mean) {
  return std::holds_alternative<AttenuationMean>(mean);
}

/// Prior mean in model space at one location (log space for attenuation,
/// spreading offset included).
inline double mean_value(const MeanFunctionSpec& mean, const Location& x) {
  if (const auto* att = std::get_if<AttenuationMean>(&mean)) {
    if (!att->weights.allFinite()) throw DomainError("attenuation weights must be finite");
    return attenuation_log_mean(att->basis, att->weights, x.rho());
  }
  return 0.0;
}

inline Eigen::VectorXd mean_vector(const MeanFunctionSpec& mean, std::span<const Location> xs) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i)) = mean_value(mean, xs[i]);
  return m;
}

/// Residual targets the process is trained on: y itself for a zero mean,
/// ln y - m(x) for the attenuation mean (m includes the spreading offset).
inline Eigen::VectorXd transform_targets(std::span<const double> y, const MeanFunctionSpec& mean,
                                         std::span<const Location> xs) {
  if (y.size() != xs.size()) throw DimensionMismatch("targets and inputs differ in length");
  Eigen::VectorXd r(static_cast<Eigen::Index>(y.size()));
  const bool logs = log_space(mean);
  for (std::size_t i = 0; i < y.size(); ++i) {
    double v = y[i];
    if (logs) {
      if (!(v > 0.0)) throw DomainError("attenuation mean requires targets > 0");
      if (!(xs[i].rho() > 0.0)) throw DomainError("attenuation mean requires rho > 0");
      v = std::log(v) - mean_value(mean, xs[i]);
    }
    r(static_cast<Eigen::Index>(i)) = v;
  }
  return r;
}

struct GPOptions {
  double rho_min = 5.0;     // mm; enforced for kernels or means singular at the source
  double max_jitter = 1e-4;
};

/// Cholesky factor of a symmetric matrix with jitter escalation: first try
/// as-is, then 1e-10 growing by x10 up to max_jitter.
struct JitteredCholesky {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

inline JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& k, double max_jitter = 1e-4) {
  if (!k.allFinite()) throw FactorizationError("covariance has non-finite entries", 0.0);
  const Eigen::Index n = k.rows();
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      if ((l.diagonal().array() > 0.0).all() && l.allFinite()) return {std::move(l), jitter};
    }
    if (jitter >= max_jitter || n == 0) break;
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > max_jitter) jitter = max_jitter;
  }
  throw FactorizationError("covariance is not positive definite", jitter);
}

namespace detail {

inline void check_rho_min(const Kernel& k, const MeanFunctionSpec& mean, std::span<const Location> xs,
                          double rho_min) {
  if (!k.singular_at_origin() && !log_space(mean)) return;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i].rho() < rho_min)
      throw DomainError("point " + std::to_string(i) + " lies inside rho_min (rho = " +
                        std::to_string(xs[i].rho()) + ")");
}

}  // namespace detail

/// Exact GP fitted to training data. Immutable once built.
class GPModel {
 public:
  static GPModel fit(const KernelSpec& kernel, const MeanFunctionSpec& mean, double noise_var,
                     std::vector<Location> inputs, std::vector<double> targets,
                     const GPOptions& opts = {}) {
    if (inputs.empty()) throw TooFewPoints("GP fit needs at least one training point");
    if (inputs.size() != targets.size()) throw DimensionMismatch("inputs and targets differ in length");
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) throw InvalidHyper("noise variance must be >= 0");
    GPModel m(kernel, mean, noise_var, opts);
    detail::check_rho_min(m.kernel_, mean, inputs, opts.rho_min);
    m.inputs_ = std::move(inputs);
    m.targets_ = std::move(targets);
    m.residuals_ = transform_targets(m.targets_, mean, m.inputs_);

    GramMatrix k = gram(m.kernel_, m.inputs_, 0.0);
    k.values.diagonal().array() += noise_var;
    JitteredCholesky chol = cholesky_with_jitter(k.values, opts.max_jitter);
    m.lower_ = std::move(chol.lower);
    m.jitter_ = chol.jitter;
    m.alpha_ = m.lower_.triangularView<Eigen::Lower>().solve(m.residuals_);
    m.lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha_);
    m.log_det_ = 2.0 * m.lower_.diagonal().array().log().sum();
    return m;
  }

  const KernelSpec& kernel_spec() const noexcept { return kernel_.spec(); }
  const Kernel& kernel() const noexcept { return kernel_; }
  const MeanFunctionSpec& mean() const noexcept { return mean_; }
  double noise_var() const noexcept { return noise_var_; }
  double jitter() const noexcept { return jitter_; }
  const GPOptions& options() const noexcept { return opts_; }
  const std::vector<Location>& inputs() const noexcept { return inputs_; }
  const std::vector<double>& targets() const noexcept { return targets_; }
  const Eigen::VectorXd& residuals() const noexcept { return residuals_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  /// Lower Cholesky factor of K(X,X) + (noise + jitter) I.
  const Eigen::MatrixXd& lower() const noexcept { return lower_; }
  std::size_t size() const noexcept { return inputs_.size(); }

  /// Negative log marginal likelihood of the residual targets.
  double nlml() const {
    const double n = static_cast<double>(inputs_.size());
    return 0.5 * log_det_ + 0.5 * residuals_.dot(alpha_) + 0.5 * n * std::log(2.0 * std::numbers::pi);
  }

 private:
  GPModel(const KernelSpec& spec, const MeanFunctionSpec& mean, double noise_var, const GPOptions& opts)
      : kernel_(spec), mean_(mean), noise_var_(noise_var), opts_(opts) {}

  Kernel kernel_;
  MeanFunctionSpec mean_;
  double noise_var_ = 0.0;
  GPOptions opts_;
  std::vector<Location> inputs_;
  std::vector<double> targets_;
  Eigen::VectorXd residuals_;
  Eigen::MatrixXd lower_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double log_det_ = 0.0;
};

inline GPModel fit(const KernelSpec& kernel, const MeanFunctionSpec& mean, double noise_var,
                   std::vector<Location> inputs, std::vector<double> targets, const GPOptions& opts = {}) {
  return GPModel::fit(kernel, mean, noise_var, std::move(inputs), std::move(targets), opts);
}

inline double nlml(const KernelSpec& kernel, const MeanFunctionSpec& mean, double noise_var,
                   std::vector<Location> inputs, std::vector<double> targets, const GPOptions& opts = {}) {
  return GPModel::fit(kernel, mean, noise_var, std::move(inputs), std::move(targets), opts).nlml();
}

struct PredictOptions {
  bool noisy = false;            // include noise variance (targets y*) rather than latent f*
  bool amplitude = false;        // back-transform log-space models to amplitudes
  bool full_covariance = true;   // otherwise only marginal variances are computed
};

struct PredictiveDistribution {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::MatrixXd covariance;  // empty unless full covariance was requested
  bool noisy = false;
  bool amplitude = false;

  bool has_covariance() const noexcept { return covariance.size() > 0 || mean.size() == 0; }
};

namespace detail {
inline double clamp_variance(double v, double scale) {
  if (v >= 0.0) return v;
  if (v >= -1e-10 * std::max(1.0, scale)) return 0.0;
  throw NonpositiveVariance("negative predictive variance " + std::to_string(v));
}
}  // namespace detail

/// Posterior over f* (or y* when noisy) at the test locations. Log-space
/// models can be mapped back to amplitudes: the mean is exponentiated (the
/// log-normal median) and the covariance is propagated to first order.
inline PredictiveDistribution predict(const GPModel& model, std::span<const Location> xs,
                                      const PredictOptions& opts = {}) {
  detail::check_rho_min(model.kernel(), model.mean(), xs, model.options().rho_min);
  const auto m = static_cast<Eigen::Index>(xs.size());
  PredictiveDistribution pd;
  pd.noisy = opts.noisy;
  const Eigen::MatrixXd ks = cross_gram(model.kernel(), xs, model.inputs());
  pd.mean = mean_vector(model.mean(), xs) + ks * model.alpha();
  const Eigen::MatrixXd v = model.lower().triangularView<Eigen::Lower>().solve(ks.transpose());
  const double extra = opts.noisy ? model.noise_var() : 0.0;

  pd.variance.resize(m);
  if (opts.full_covariance) {
    pd.covariance = gram(model.kernel(), xs, 0.0).values;
    pd.covariance.noalias() -= v.transpose() * v;
    pd.covariance = 0.5 * (pd.covariance + pd.covariance.transpose());
    for (Eigen::Index i = 0; i < m; ++i) {
      const double prior = model.kernel().diagonal(xs[static_cast<std::size_t>(i)]);
      pd.covariance(i, i) = detail::clamp_variance(pd.covariance(i, i), prior) + extra;
    }
    pd.variance = pd.covariance.diagonal();
  } else {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double prior = model.kernel().diagonal(xs[static_cast<std::size_t>(i)]);
      pd.variance(i) = detail::clamp_variance(prior - v.col(i).squaredNorm(), prior) + extra;
    }
  }

  if (opts.amplitude && log_space(model.mean())) {
    pd.amplitude = true;
    const Eigen::VectorXd scale = pd.mean.array().exp();
    pd.mean = scale;
    pd.variance = pd.variance.cwiseProduct(scale.cwiseProduct(scale));
    if (opts.full_covariance) pd.covariance = scale.asDiagonal() * pd.covariance * scale.asDiagonal();
  } else {
    pd.amplitude = !log_space(model.mean());
  }
  return pd;
}

/// Draws from N(m(X), K(X,X) + jitter I); columns are draws.
inline Eigen::MatrixXd sample_prior(const KernelSpec& kernel, const MeanFunctionSpec& mean,
                                    std::span<const Location> xs, int count, std::uint64_t seed,
                                    const GPOptions& opts = {}) {
  if (count < 1) throw ConfigError("sample count must be >= 1");
  const Kernel k(kernel);
  detail::check_rho_min(k, mean, xs, opts.rho_min);
  const JitteredCholesky chol = cholesky_with_jitter(gram(k, xs, 0.0).values, opts.max_jitter);
  const Eigen::VectorXd mu = mean_vector(mean, xs);
  const auto n = static_cast<Eigen::Index>(xs.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(n, count);
  for (Eigen::Index c = 0; c < count; ++c)
    for (Eigen::Index i = 0; i < n; ++i) z(i, c) = normal(rng);
  Eigen::MatrixXd draws = chol.lower.triangularView<Eigen::Lower>() * z;
  draws.colwise() += mu;
  return draws;
}

/// Prior variance k(x, x) at each grid point.
inline Eigen::VectorXd prior_variance_field(const KernelSpec& kernel, std::span<const Location> grid) {
  const Kernel k(kernel);
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v(static_cast<Eigen::Index>(i)) = k.diagonal(grid[i]);
  return v;
}

}  // namespace gwgp
