#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gwgp/geometry.hpp"

using namespace gwgp;

namespace {
constexpr double pi = std::numbers::pi;
double deg(double d) { return d * pi / 180.0; }
}  // namespace

TEST(CartToPolar, CoincidentPointHasZeroRadiusAndAngle) {
  const PolarPoint p = cart_to_polar({3.0, -2.0}, {3.0, -2.0});
  EXPECT_EQ(p.rho(), 0.0);
  EXPECT_EQ(p.theta(), 0.0);
}

TEST(CartToPolar, AxisAligned) {
  const PolarPoint p = cart_to_polar({1.0, 0.0});
  EXPECT_DOUBLE_EQ(p.rho(), 1.0);
  EXPECT_DOUBLE_EQ(p.theta(), 0.0);
}

TEST(CartToPolar, ThirdQuadrantNormalizedToPositiveAngle) {
  const PolarPoint p = cart_to_polar({-1.0, -1.0});
  EXPECT_NEAR(p.rho(), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(p.theta(), 5.0 * pi / 4.0, 1e-15);
}

TEST(PolarToCart, ZeroRadiusMapsToOrigin) {
  const CartesianPoint c = polar_to_cart(PolarPoint(0.0, 1.234), {7.0, 8.0});
  EXPECT_DOUBLE_EQ(c.x, 7.0);
  EXPECT_DOUBLE_EQ(c.y, 8.0);
}

TEST(PolarToCart, AxisAligned) {
  const CartesianPoint c = polar_to_cart(PolarPoint(2.0, pi / 2.0));
  EXPECT_NEAR(c.x, 0.0, 1e-15);
  EXPECT_NEAR(c.y, 2.0, 1e-15);
}

TEST(PolarToCart, RoundTripIsIdentity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  const CartesianPoint origin{12.5, -3.0};
  for (int i = 0; i < 1000; ++i) {
    const CartesianPoint p{u(rng), u(rng)};
    const CartesianPoint q = polar_to_cart(cart_to_polar(p, origin), origin);
    EXPECT_NEAR(q.x, p.x, 1e-12);
    EXPECT_NEAR(q.y, p.y, 1e-12);
  }
}

TEST(PolarPoint, NormalizesAngleIntoHalfOpenRange) {
  EXPECT_NEAR(PolarPoint(1.0, -pi / 2.0).theta(), 3.0 * pi / 2.0, 1e-15);
  EXPECT_NEAR(PolarPoint(1.0, 5.0 * pi).theta(), pi, 1e-12);
  EXPECT_EQ(PolarPoint(1.0, 2.0 * pi).theta(), 0.0);
  const double t = PolarPoint(1.0, -1e-18).theta();
  EXPECT_GE(t, 0.0);
  EXPECT_LT(t, 2.0 * pi);
}

TEST(PolarPoint, RejectsNegativeRadiusAndNonFinite) {
  EXPECT_THROW(PolarPoint(-1.0, 0.0), DomainError);
  EXPECT_THROW(PolarPoint(1.0, std::nan("")), DomainError);
  EXPECT_THROW(PolarPoint(INFINITY, 0.0), DomainError);
}

TEST(ChordalDistance, Examples) {
  EXPECT_EQ(chordal_distance(0.0, 0.0), 0.0);
  EXPECT_NEAR(chordal_distance(0.0, pi), 2.0, 1e-15);
  EXPECT_NEAR(chordal_distance(deg(359.0), deg(1.0)), std::abs(2.0 * std::sin(deg(179.0))), 1e-15);
  EXPECT_NEAR(chordal_distance(deg(359.0), deg(1.0)), 0.03490, 1e-5);
}

TEST(GeodesicDistance, Examples) {
  EXPECT_EQ(geodesic_distance(1.3, 1.3), 0.0);
  EXPECT_NEAR(geodesic_distance(0.0, pi), pi, 1e-15);
  EXPECT_NEAR(geodesic_distance(deg(359.0), deg(1.0)), deg(2.0), 1e-12);
  EXPECT_NEAR(geodesic_distance(deg(359.0), deg(1.0)), 0.034907, 1e-6);
}

TEST(GeodesicDistance, MatchesArccosForm) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(geodesic_distance(a, b), std::acos(std::cos(a - b)), 1e-7);
  }
}

TEST(ModifiedGeodesicDistance, Examples) {
  EXPECT_EQ(modified_geodesic_distance(0.7, 0.7, 3), 0.0);
  EXPECT_NEAR(modified_geodesic_distance(0.0, pi / 2.0, 1), pi, 1e-15);
  EXPECT_NEAR(modified_geodesic_distance(0.0, pi / 2.0, 2), 0.0, 1e-12);
  EXPECT_THROW(modified_geodesic_distance(0.0, 1.0, 0), DomainError);
}

TEST(AngularDistances, SymmetricWrappedAndBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    const double d1 = chordal_distance(a, b), d2 = geodesic_distance(a, b);
    EXPECT_EQ(d1, chordal_distance(b, a));
    EXPECT_EQ(d2, geodesic_distance(b, a));
    EXPECT_NEAR(d1, chordal_distance(a + 2.0 * pi, b), 1e-12);
    EXPECT_NEAR(d2, geodesic_distance(a + 2.0 * pi, b), 1e-12);
    EXPECT_GE(d1, 0.0);
    EXPECT_LE(d1, 2.0);
    EXPECT_GE(d2, 0.0);
    EXPECT_LE(d2, pi);
  }
}

TEST(Location, CarriesBothCoordinateSystems) {
  const Location l = Location::from_cartesian({153.0, 154.0}, {150.0, 150.0});
  EXPECT_NEAR(l.rho(), 5.0, 1e-14);
  EXPECT_NEAR(l.theta(), std::atan2(4.0, 3.0), 1e-14);
  const Location m = Location::from_polar(PolarPoint(5.0, std::atan2(4.0, 3.0)), {150.0, 150.0});
  EXPECT_NEAR(m.cart.x, 153.0, 1e-12);
  EXPECT_NEAR(m.cart.y, 154.0, 1e-12);
}
