#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gwgp/geometry.hpp"

namespace gwgp::testing {

inline std::vector<Location> random_polar(std::mt19937_64& rng, int n, double rho_lo, double rho_hi) {
  std::uniform_real_distribution<double> r(rho_lo, rho_hi), t(0.0, kTwoPi);
  std::vector<Location> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Location::from_polar(PolarPoint(r(rng), t(rng))));
  return xs;
}

inline std::vector<Location> random_cartesian(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Location> xs;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng), y = u(rng);
    xs.push_back(Location::from_cartesian({x, y}));
  }
  return xs;
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_asymmetry(const Eigen::MatrixXd& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace gwgp::testing
