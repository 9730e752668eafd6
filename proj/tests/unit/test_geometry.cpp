#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lhbs/geometry.hpp"

using namespace lhbs;

TEST(DerivePolar, UeStraightAlongX) {
    const PolarParams p = derive_polar(Scenario({0.0, 100.0}, {100.0, 100.0}));
    EXPECT_NEAR(p.phi_HU, 0.0, 1e-15);
    EXPECT_NEAR(p.r_HU, 100.0, 1e-12);
    EXPECT_NEAR(p.r_BH, 100.0, 1e-12);
}

TEST(DerivePolar, UeBelowHris) {
    const PolarParams p = derive_polar(Scenario({0.0, 100.0}, {0.0, 0.0}));
    EXPECT_NEAR(p.r_HU, 100.0, 1e-12);
    EXPECT_NEAR(p.phi_HU, kPi / 2.0, 1e-15);
    // the BS also sits straight below the HRIS
    EXPECT_NEAR(p.theta_BH, kPi / 2.0, 1e-15);
    EXPECT_NEAR(p.phi_BH, -kPi / 2.0, 1e-15);
}

TEST(DerivePolar, DelaysAndTotals) {
    const PolarParams p = derive_polar(Scenario({30.0, 40.0}, {90.0, -40.0}));
    EXPECT_DOUBLE_EQ(p.r_BH, 50.0);
    EXPECT_DOUBLE_EQ(p.r_HU, 100.0);
    EXPECT_DOUBLE_EQ(p.tau_HU * kSpeedOfLight, p.r_HU);
    EXPECT_DOUBLE_EQ(p.tau_BH * kSpeedOfLight, p.r_BH);
    EXPECT_DOUBLE_EQ(p.d_tot, 150.0);
    EXPECT_DOUBLE_EQ(p.tau, p.d_tot / kSpeedOfLight);
}

TEST(Scenario, RejectsDegenerateGeometry) {
    EXPECT_THROW(Scenario({0.0, 100.0}, {0.0, 100.0}), ConfigError);
    EXPECT_THROW(Scenario({0.0, 0.0}, {10.0, 0.0}), ConfigError);
    EXPECT_THROW(Scenario({NAN, 1.0}, {10.0, 0.0}), ConfigError);
}

TEST(PositionFromPolar, Examples) {
    const Point2 q(0.0, 100.0);
    EXPECT_TRUE(position_from_polar(q, 0.0, 100.0).isApprox(Point2(100.0, 100.0), 1e-14));
    const Point2 below = position_from_polar(q, kPi / 2.0, 100.0);
    EXPECT_NEAR(below.x(), 0.0, 1e-12);
    EXPECT_NEAR(below.y(), 0.0, 1e-12);
}

TEST(PositionFromPolar, RoundTripRandom) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-500.0, 500.0);
    for (int i = 0; i < 1000; ++i) {
        const Point2 q(u(rng), u(rng));
        const Point2 p(u(rng), u(rng));
        if (q.norm() < 1e-3 || (p - q).norm() < 1e-3) continue;
        const PolarParams pp = derive_polar(Scenario(q, p));
        const Point2 back = position_from_polar(q, pp.phi_HU, pp.r_HU);
        EXPECT_LT((back - p).norm(), 1e-9);
    }
}

TEST(PositionJacobian, KnownValue) {
    Eigen::Matrix2d expected;
    expected << 0.0, 1.0, -1.0, 0.0;
    EXPECT_TRUE(position_jacobian(0.0, 1.0).isApprox(expected, 1e-15));
}

TEST(PositionJacobian, MatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uphi(-kPi / 2.0, kPi / 2.0);
    std::uniform_real_distribution<double> ur(1.0, 300.0);
    const Point2 q(0.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        const double phi = uphi(rng);
        const double r = ur(rng);
        const Eigen::Matrix2d j = position_jacobian(phi, r);
        const double hp = 1e-6;
        const double hr = 1e-6 * r;
        const Point2 dphi =
            (position_from_polar(q, phi + hp, r) - position_from_polar(q, phi - hp, r)) / (2.0 * hp);
        const Point2 dr = (position_from_polar(q, phi, r + hr) - position_from_polar(q, phi, r - hr)) / (2.0 * hr);
        EXPECT_LT((j.col(0) - dphi).norm(), 1e-5 * std::max(1.0, r));
        EXPECT_LT((j.col(1) - dr).norm(), 1e-5);
        EXPECT_NEAR(std::abs(j.determinant()), r, 1e-12 * r);
    }
}
