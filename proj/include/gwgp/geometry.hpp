#pragma once

#include <cmath>
#include <numbers>

#include "gwgp/errors.hpp"

namespace gwgp {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle into [0, 2pi).
inline double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2pi.
  if (t >= kTwoPi) t = 0.0;
  return t;
}

/// Plate location in millimetres.
struct CartesianPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const CartesianPoint&, const CartesianPoint&) = default;
};

/// Location relative to the wave source: radius (mm) and angle (rad).
/// The angle is normalized into [0, 2pi) on construction.
class PolarPoint {
 public:
  PolarPoint() = default;
  PolarPoint(double rho, double theta) : rho_(rho), theta_(normalize_angle(theta)) {
    if (!std::isfinite(rho) || !std::isfinite(theta) || rho < 0.0)
      throw DomainError("polar point requires finite rho >= 0 and finite theta");
  }

  double rho() const noexcept { return rho_; }
  double theta() const noexcept { return theta_; }

  friend bool operator==(const PolarPoint&, const PolarPoint&) = default;

 private:
  double rho_ = 0.0;
  double theta_ = 0.0;
};

inline PolarPoint cart_to_polar(const CartesianPoint& p, const CartesianPoint& origin = {}) {
  const double dx = p.x - origin.x;
  const double dy = p.y - origin.y;
  return {std::hypot(dx, dy), std::atan2(dy, dx)};
}

inline CartesianPoint polar_to_cart(const PolarPoint& p, const CartesianPoint& origin = {}) {
  return {origin.x + p.rho() * std::cos(p.theta()), origin.y + p.rho() * std::sin(p.theta())};
}

/// |2 sin((a - b) / 2)|, in [0, 2].
inline double chordal_distance(double theta, double theta2) {
  return std::abs(2.0 * std::sin(0.5 * (theta - theta2)));
}

// arccos(cos(x)) equals |x| reduced to [-pi, pi]; the remainder form keeps
// full precision for small separations where arccos saturates.
inline double folded_angle(double delta) { return std::abs(std::remainder(delta, kTwoPi)); }

/// Arc distance arccos(cos(a - b)), in [0, pi].
inline double geodesic_distance(double theta, double theta2) { return folded_angle(theta - theta2); }

/// arccos(cos(2n (a - b))): geodesic distance on a circle folded 2n times.
inline double modified_geodesic_distance(double theta, double theta2, int n) {
  if (n < 1) throw DomainError("modified geodesic distance requires n >= 1");
  return folded_angle(2.0 * n * (theta - theta2));
}

/// A sample location carrying both coordinate systems so any kernel can
/// consume whichever dimensions it declares.
struct Location {
  CartesianPoint cart;
  PolarPoint polar;

  static Location from_cartesian(const CartesianPoint& p, const CartesianPoint& origin = {}) {
    return {p, cart_to_polar(p, origin)};
  }
  static Location from_polar(const PolarPoint& p, const CartesianPoint& origin = {}) {
    return {polar_to_cart(p, origin), p};
  }
  double rho() const noexcept { return polar.rho(); }
  double theta() const noexcept { return polar.theta(); }
};

}  // namespace gwgp
