#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gwgp/blr.hpp"
#include "gwgp/io.hpp"

using namespace gwgp;

namespace {

// Ordinary least squares via the normal equations.
Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

TEST(DesignMatrix, DampingOnly) {
  const std::vector<double> x{1.0, 2.0};
  const DesignMatrix d = design_matrix(x, BasisModel::phi1());
  ASSERT_EQ(d.X.cols(), 2);
  EXPECT_EQ(d.X(0, 0), 1.0);
  EXPECT_EQ(d.X(1, 0), 1.0);
  EXPECT_EQ(d.X(0, 1), -1.0);
  EXPECT_EQ(d.X(1, 1), -2.0);
  EXPECT_EQ(d.offset(0), 0.0);
  EXPECT_EQ(d.offset(1), 0.0);
}

TEST(DesignMatrix, SpreadingOnly) {
  const std::vector<double> x{1.0, 4.0};
  const DesignMatrix d = design_matrix(x, BasisModel::phi2());
  ASSERT_EQ(d.X.cols(), 1);
  EXPECT_EQ(d.X(0, 0), 1.0);
  EXPECT_EQ(d.X(1, 0), 1.0);
  EXPECT_EQ(d.offset(0), 0.0);
  EXPECT_NEAR(d.offset(1), std::log(0.5), 1e-15);
}

TEST(DesignMatrix, RejectsNonPositiveDistance) {
  const std::vector<double> x{1.0, 0.0};
  EXPECT_THROW(design_matrix(x, BasisModel::phi3()), DomainError);
}

TEST(BasisModel, FlagsAndNames) {
  EXPECT_EQ(BasisModel::phi1().flags, (std::array<bool, 3>{true, true, false}));
  EXPECT_EQ(BasisModel::phi2().flags, (std::array<bool, 3>{true, false, true}));
  EXPECT_EQ(BasisModel::phi3().flags, (std::array<bool, 3>{true, true, true}));
  EXPECT_EQ(parse_basis("phi2"), BasisModel::phi2());
  EXPECT_THROW(parse_basis("phi4"), ConfigError);
}

TEST(FitBlr, SlopeOnlyLeastSquares) {
  Eigen::MatrixXd X(4, 1);
  X << 1, 2, 3, 4;
  const Eigen::VectorXd y = 2.0 * X.col(0);
  const NIGPosterior post = fit_blr(X, y, BLRPrior::g_prior(1e6));
  EXPECT_NEAR(post.w(0), 2.0, 1e-4);
}

TEST(FitBlr, FlatPriorLimitMatchesOrdinaryLeastSquares) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  const auto x = linspace(5.0, 140.0, 40);
  const DesignMatrix d = design_matrix(x, BasisModel::phi3());
  Eigen::VectorXd y(d.X.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = 0.3 - 0.02 * x[i] + 0.1 * n(rng);
  const NIGPosterior post = fit_blr(d.X, y, BLRPrior::g_prior(1e12));
  const Eigen::VectorXd ref = ols(d.X, y);
  EXPECT_NEAR(post.w(0), ref(0), 1e-6);
  EXPECT_NEAR(post.w(1), ref(1), 1e-6);
}

TEST(FitBlr, ShapeParameterIsPriorPlusHalfCount) {
  Eigen::MatrixXd X(7, 2);
  X.col(0).setOnes();
  X.col(1) << 1, 2, 3, 4, 5, 6, 8;
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(7, 0.0, 1.0);
  BLRPrior prior;
  prior.a0 = 1.25;
  prior.b0 = 0.5;
  EXPECT_EQ(fit_blr(X, y, prior).a, 1.25 + 3.5);
  EXPECT_EQ(fit_blr(X, y).a, 3.5);
}

TEST(FitBlr, AddingPointsNeverDecreasesShape) {
  Eigen::MatrixXd X(10, 2);
  X.col(0).setOnes();
  X.col(1) = Eigen::VectorXd::LinSpaced(10, 1.0, 10.0);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 3.0, -1.0);
  double prev = 0.0;
  for (int n = 2; n <= 10; ++n) {
    const double a = fit_blr(X.topRows(n), y.head(n)).a;
    EXPECT_GE(a, prev);
    prev = a;
  }
}

TEST(FitBlr, ExplicitPriorCovarianceShrinks) {
  Eigen::MatrixXd X(6, 2);
  X.col(0).setOnes();
  X.col(1) << 1, 2, 3, 5, 8, 13;
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, 0.0, 1.0);
  BLRPrior prior;
  prior.w0 = Eigen::Vector2d(0.1, -0.2);
  Eigen::Matrix2d V0;
  V0 << 2.0, 0.3, 0.3, 1.0;
  prior.V0 = V0;
  const NIGPosterior post = fit_blr(X, y, prior);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(V0 - post.V);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  EXPECT_LE((post.V - post.V.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(post.b, 0.0);
}

TEST(FitBlr, GPriorIsScaleInvariant) {
  Eigen::MatrixXd X(5, 2);
  X.col(0).setOnes();
  X.col(1) << -1, -2, -4, -7, -9;
  Eigen::VectorXd y(5);
  y << 0.3, -0.1, -0.6, -1.6, -2.0;
  const NIGPosterior a = fit_blr(X, y);
  const NIGPosterior b = fit_blr(3.7 * X, 3.7 * y);
  EXPECT_NEAR(a.w(0), b.w(0), 1e-8);
  EXPECT_NEAR(a.w(1), b.w(1), 1e-8);
}

TEST(FitBlr, SingularDesignAndBadShapes) {
  Eigen::MatrixXd X(3, 2);
  X << 1, -2, 1, -2, 1, -2;
  EXPECT_THROW(fit_blr(X, Eigen::Vector3d(1, 2, 3)), SingularMatrix);
  EXPECT_THROW(fit_blr(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1)), DimensionMismatch);
  EXPECT_THROW(fit_blr(Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(2)), DimensionMismatch);
}

TEST(FitBlr, ExactFitKeepsScaleStrictlyPositive) {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  const NIGPosterior post = fit_blr(X, Eigen::Vector3d(0, 0, 0));
  EXPECT_GT(post.b, 0.0);
}

TEST(BlrPredict, ReproducesNoiselessTrainingTargets) {
  const auto x = linspace(10.0, 100.0, 8);
  const DesignMatrix d = design_matrix(x, BasisModel::phi1());
  const Eigen::VectorXd y = d.X * Eigen::Vector2d(0.5, 0.03);
  const NIGPosterior post = fit_blr(d.X, y, BLRPrior::g_prior(1e12));
  const BLRPredictive pred = blr_predict(post, d.X);
  for (Eigen::Index i = 0; i < y.size(); ++i) EXPECT_NEAR(pred.mean(i), y(i), 1e-6);
  EXPECT_TRUE((pred.scale2.array() > 0.0).all());
}

TEST(BlrPredict, EmptyInputGivesEmptyOutput) {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  const NIGPosterior post = fit_blr(X, Eigen::Vector3d(1, 2, 3.5));
  const BLRPredictive pred = blr_predict(post, Eigen::MatrixXd(0, 1));
  EXPECT_EQ(pred.mean.size(), 0);
  EXPECT_EQ(pred.scale2.size(), 0);
  EXPECT_THROW(blr_predict(post, Eigen::MatrixXd::Ones(2, 3)), DimensionMismatch);
}

TEST(BlrPredict, StudentTIntervalAndVariance) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  const int N = 1000;
  Eigen::MatrixXd X(N, 1);
  Eigen::VectorXd y(N);
  for (int i = 0; i < N; ++i) {
    X(i, 0) = 1.0;
    y(i) = n(rng);
  }
  const NIGPosterior post = fit_blr(X, y);
  const BLRPredictive pred = blr_predict(post, Eigen::MatrixXd::Ones(1, 1));
  EXPECT_DOUBLE_EQ(pred.dof, 1000.0);
  // t quantile for 1000 degrees of freedom at 0.975
  EXPECT_NEAR(pred.half_width(0.95)(0) / std::sqrt(pred.scale2(0)), 1.962339, 1e-5);
  EXPECT_NEAR(pred.variance()(0), pred.scale2(0) * 1000.0 / 998.0, 1e-15);
}

TEST(RecoverBetas, Examples) {
  EXPECT_DOUBLE_EQ(*recover_betas(Eigen::Vector2d(0.0, 0.01), BasisModel::phi3()).beta1, 1.0);
  EXPECT_NEAR(*recover_betas(Eigen::Vector2d(std::log(0.005934), 0.01), BasisModel::phi3()).beta1, 0.005934, 1e-15);
  const AttenuationBetas b = recover_betas(Eigen::VectorXd::Constant(1, 0.2), BasisModel::phi2());
  EXPECT_TRUE(b.beta1.has_value());
  EXPECT_FALSE(b.beta2.has_value());
}

TEST(FitAttenuation, NoiselessRayRecoveredExactly) {
  const double beta1 = 0.8, beta2 = 0.012;
  const auto x = linspace(10.0, 150.0, 30);
  std::vector<double> a;
  for (double xi : x) a.push_back(beta1 * std::exp(-beta2 * xi) / std::sqrt(xi));
  const AttenuationFit f = fit_attenuation(x, a, BasisModel::phi3(), BLRPrior::g_prior(1e12));
  EXPECT_NEAR(*f.betas.beta1, beta1, 1e-6);
  EXPECT_NEAR(*f.betas.beta2, beta2, 1e-6);
}

TEST(FitAttenuation, NoisyRayRecoveredWithinFivePercent) {
  const double beta1 = 0.8, beta2 = 0.012;
  const auto x = linspace(10.0, 150.0, 60);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n;
  std::vector<double> a;
  for (double xi : x) a.push_back(beta1 * std::exp(-beta2 * xi) / std::sqrt(xi) * std::exp(0.05 * n(rng)));
  const AttenuationFit f = fit_attenuation(x, a, BasisModel::phi3());
  EXPECT_NEAR(*f.betas.beta1 / beta1, 1.0, 0.05);
  EXPECT_NEAR(*f.betas.beta2 / beta2, 1.0, 0.05);
}

TEST(FitAttenuation, RejectsNonPositiveAmplitude) {
  const std::vector<double> x{1.0, 2.0, 3.0}, a{1.0, 0.0, 0.5};
  EXPECT_THROW(fit_attenuation(x, a, BasisModel::phi3()), DomainError);
}

TEST(FitAttenuation, SerializesPosteriorAndBetas) {
  const auto x = linspace(10.0, 50.0, 5);
  std::vector<double> a;
  for (double xi : x) a.push_back(std::exp(-0.01 * xi));
  const nlohmann::json j = io::to_json(fit_attenuation(x, a, BasisModel::phi1()));
  EXPECT_EQ(j["basis"], "phi1");
  EXPECT_EQ(j["w"].size(), 2u);
  EXPECT_EQ(j["V"].size(), 2u);
  EXPECT_EQ(j["a"], 2.5);
  EXPECT_TRUE(j["beta2"].is_number());
}
