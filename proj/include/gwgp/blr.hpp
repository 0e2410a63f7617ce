#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "gwgp/errors.hpp"

namespace gwgp {

/// Switches (phi1, phi2, phi3) selecting the attenuation terms of
///   ln A(x) = w1 phi1 - w2 x phi2 + ln(x^{-1/2}) phi3.
struct BasisModel {
  std::array<bool, 3> flags{true, true, true};

  static BasisModel phi1() { return {{true, true, false}}; }  // damping only
  static BasisModel phi2() { return {{true, false, true}}; }  // spreading only
  static BasisModel phi3() { return {{true, true, true}}; }   // both

  bool intercept() const noexcept { return flags[0]; }
  bool decay() const noexcept { return flags[1]; }
  bool spreading() const noexcept { return flags[2]; }

  int columns() const noexcept { return int(flags[0]) + int(flags[1]); }

  std::string name() const {
    if (*this == phi1()) return "phi1";
    if (*this == phi2()) return "phi2";
    if (*this == phi3()) return "phi3";
    return std::string("[") + char('0' + flags[0]) + "," + char('0' + flags[1]) + "," +
           char('0' + flags[2]) + "]";
  }

  friend bool operator==(const BasisModel&, const BasisModel&) = default;
};

inline BasisModel parse_basis(const std::string& name) {
  if (name == "phi1") return BasisModel::phi1();
  if (name == "phi2") return BasisModel::phi2();
  if (name == "phi3") return BasisModel::phi3();
  throw ConfigError("unknown basis model '" + name + "'");
}

/// Weighted columns plus the fixed ln(x^{-1/2}) offset, which has no weight
/// and is subtracted from the log targets before fitting.
struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd offset;
};

inline double spreading_offset(double x) { return -0.5 * std::log(x); }

inline DesignMatrix design_matrix(std::span<const double> x, const BasisModel& basis) {
  const auto n = static_cast<Eigen::Index>(x.size());
  DesignMatrix d{Eigen::MatrixXd(n, basis.columns()), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    if (!(xi > 0.0)) throw DomainError("design matrix requires propagation distances > 0");
    Eigen::Index c = 0;
    if (basis.intercept()) d.X(i, c++) = 1.0;
    if (basis.decay()) d.X(i, c++) = -xi;
    if (basis.spreading()) d.offset(i) = spreading_offset(xi);
  }
  return d;
}

/// Log-amplitude of the attenuation law at x, offset included.
inline double attenuation_log_mean(const BasisModel& basis, const Eigen::VectorXd& w, double x) {
  if (!(x > 0.0)) throw DomainError("attenuation mean requires propagation distance > 0");
  if (w.size() != basis.columns()) throw DimensionMismatch("attenuation weights do not match basis");
  double v = 0.0;
  Eigen::Index c = 0;
  if (basis.intercept()) v += w(c++);
  if (basis.decay()) v -= w(c++) * x;
  if (basis.spreading()) v += spreading_offset(x);
  return v;
}

/// Normal-inverse-gamma prior. Without an explicit V0 the g-prior
/// V0 = g (X^T X)^{-1} is used.
struct BLRPrior {
  std::optional<Eigen::VectorXd> w0;
  std::optional<Eigen::MatrixXd> V0;
  double a0 = 0.0;
  double b0 = 0.0;
  double g = 1e3;

  static BLRPrior g_prior(double g) {
    BLRPrior p;
    p.g = g;
    return p;
  }
};

struct NIGPosterior {
  Eigen::VectorXd w;  // w_N
  Eigen::MatrixXd V;  // V_N
  double a = 0.0;     // a_N
  double b = 0.0;     // b_N
  std::size_t n = 0;
};

inline NIGPosterior fit_blr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const BLRPrior& prior = {}) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw DimensionMismatch("design rows and targets differ in length");
  if (n < p || p == 0) throw DimensionMismatch("need at least as many observations as columns");
  if (prior.a0 < 0.0 || prior.b0 < 0.0) throw ConfigError("a0 and b0 must be >= 0");

  const Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (lu.rank() < p) throw SingularMatrix("X^T X is not invertible");

  const Eigen::VectorXd w0 = prior.w0.value_or(Eigen::VectorXd::Zero(p));
  if (w0.size() != p) throw DimensionMismatch("prior mean does not match design columns");

  Eigen::MatrixXd prec0;
  if (prior.V0) {
    if (prior.V0->rows() != p || prior.V0->cols() != p)
      throw DimensionMismatch("prior covariance does not match design columns");
    Eigen::LLT<Eigen::MatrixXd> llt0(*prior.V0);
    if (llt0.info() != Eigen::Success) throw SingularMatrix("prior covariance is not positive definite");
    prec0 = llt0.solve(Eigen::MatrixXd::Identity(p, p));
  } else {
    if (!(prior.g > 0.0)) throw ConfigError("g-prior strength must be > 0");
    prec0 = xtx / prior.g;
  }

  const Eigen::MatrixXd precN = prec0 + xtx;
  Eigen::LLT<Eigen::MatrixXd> lltN(precN);
  if (lltN.info() != Eigen::Success) throw SingularMatrix("posterior precision is not positive definite");

  NIGPosterior post;
  post.n = static_cast<std::size_t>(n);
  post.V = lltN.solve(Eigen::MatrixXd::Identity(p, p));
  post.V = 0.5 * (post.V + post.V.transpose());
  post.w = lltN.solve(prec0 * w0 + X.transpose() * y);
  post.a = prior.a0 + 0.5 * static_cast<double>(n);
  // Sum-of-squares form of b0 + (w0' P0 w0 + y'y - wN' PN wN) / 2; it is
  // algebraically identical and cannot go negative through cancellation.
  const Eigen::VectorXd resid = y - X * post.w;
  const Eigen::VectorXd dw = post.w - w0;
  post.b = prior.b0 + 0.5 * (resid.squaredNorm() + dw.dot(prec0 * dw));
  if (post.b <= 0.0) post.b = std::numeric_limits<double>::min();
  return post;
}

/// Student-t predictive of the NIG posterior: location X* w_N, squared scale
/// (b_N / a_N)(1 + x* V_N x*'), 2 a_N degrees of freedom.
struct BLRPredictive {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale2;
  double dof = 0.0;

  Eigen::VectorXd variance() const {
    if (dof <= 2.0) return Eigen::VectorXd::Constant(scale2.size(), std::numeric_limits<double>::infinity());
    return scale2 * (dof / (dof - 2.0));
  }

  /// Half-width of the central interval at the given level, per point.
  Eigen::VectorXd half_width(double level = 0.95) const {
    boost::math::students_t dist(dof);
    const double t = boost::math::quantile(dist, 0.5 + 0.5 * level);
    return t * scale2.array().sqrt().matrix();
  }
};

inline BLRPredictive blr_predict(const NIGPosterior& post, const Eigen::MatrixXd& Xs) {
  if (Xs.rows() > 0 && Xs.cols() != post.w.size())
    throw DimensionMismatch("prediction design does not match posterior weights");
  BLRPredictive pred;
  pred.dof = 2.0 * post.a;
  pred.mean = Xs.rows() > 0 ? Eigen::VectorXd(Xs * post.w) : Eigen::VectorXd();
  pred.scale2.resize(Xs.rows());
  const double s = post.b / post.a;
  for (Eigen::Index i = 0; i < Xs.rows(); ++i) {
    const Eigen::VectorXd xi = Xs.row(i).transpose();
    pred.scale2(i) = s * (1.0 + xi.dot(post.V * xi));
  }
  return pred;
}

struct AttenuationBetas {
  std::optional<double> beta1;  // source scale exp(w1)
  std::optional<double> beta2;  // decay rate w2
};

inline AttenuationBetas recover_betas(const Eigen::VectorXd& w, const BasisModel& basis) {
  if (w.size() != basis.columns()) throw DimensionMismatch("weights do not match basis");
  AttenuationBetas b;
  Eigen::Index c = 0;
  if (basis.intercept()) b.beta1 = std::exp(w(c++));
  if (basis.decay()) b.beta2 = w(c++);
  return b;
}

struct AttenuationFit {
  BasisModel basis;
  NIGPosterior posterior;
  AttenuationBetas betas;
};

/// Fits a basis model to raw amplitudes along one propagation direction.
inline AttenuationFit fit_attenuation(std::span<const double> x, std::span<const double> amplitude,
                                      const BasisModel& basis, const BLRPrior& prior = {}) {
  if (x.size() != amplitude.size()) throw DimensionMismatch("distances and amplitudes differ in length");
  const DesignMatrix d = design_matrix(x, basis);
  Eigen::VectorXd y(d.X.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double a = amplitude[static_cast<std::size_t>(i)];
    if (!(a > 0.0)) throw DomainError("amplitudes must be > 0 to take logs");
    y(i) = std::log(a) - d.offset(i);
  }
  AttenuationFit fit{basis, fit_blr(d.X, y, prior), {}};
  fit.betas = recover_betas(fit.posterior.w, basis);
  return fit;
}

}  // namespace gwgp
