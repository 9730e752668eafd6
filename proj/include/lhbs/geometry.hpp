#pragma once

// 2D scenario geometry: BS at the origin, HRIS at q, UE at p.
//
// Angle convention: an angle phi seen from point a toward point b is
// atan2(-(b_y - a_y), b_x - a_x), i.e. measured clockwise from +x. This is the
// inverse of position_from_polar(), which places b = a + r [cos phi, -sin phi].

#include <cmath>

#include <Eigen/Dense>

#include "lhbs/constants.hpp"
#include "lhbs/errors.hpp"

namespace lhbs {

using Point2 = Eigen::Vector2d;

class Scenario {
public:
    Scenario(Point2 hris, Point2 ue) : hris_(std::move(hris)), ue_(std::move(ue)) {
        if (!hris_.allFinite() || !ue_.allFinite())
            throw ConfigError("scenario: positions must be finite");
        if ((hris_ - ue_).norm() == 0.0)
            throw ConfigError("scenario: HRIS and UE positions coincide");
        if (hris_.norm() == 0.0)
            throw ConfigError("scenario: HRIS and BS positions coincide");
    }

    static Point2 bs() { return Point2::Zero(); }
    const Point2& hris() const { return hris_; }
    const Point2& ue() const { return ue_; }

private:
    Point2 hris_;
    Point2 ue_;
};

struct PolarParams {
    double phi_HU;   // AoD at the HRIS toward the UE, rad
    double theta_BH; // AoA at the HRIS from the BS, rad
    double phi_BH;   // AoD at the BS toward the HRIS, rad
    double r_HU;     // m
    double r_BH;     // m
    double tau_HU;   // s
    double tau_BH;   // s
    double d_tot;    // m
    double tau;      // BS -> HRIS -> UE time of flight, s
};

inline double bearing(const Point2& from, const Point2& to) {
    const Point2 d = to - from;
    return std::atan2(-d.y(), d.x());
}

inline PolarParams derive_polar(const Scenario& s) {
    const Point2& q = s.hris();
    const Point2& p = s.ue();
    const Point2 b = Scenario::bs();

    PolarParams out{};
    out.phi_HU = bearing(q, p);
    out.theta_BH = bearing(q, b);
    out.phi_BH = bearing(b, q);
    out.r_HU = (p - q).norm();
    out.r_BH = (q - b).norm();
    out.tau_HU = out.r_HU / kSpeedOfLight;
    out.tau_BH = out.r_BH / kSpeedOfLight;
    out.d_tot = out.r_HU + out.r_BH;
    out.tau = out.d_tot / kSpeedOfLight;
    return out;
}

inline Point2 position_from_polar(const Point2& q, double phi, double r) {
    return q + Point2(r * std::cos(phi), -r * std::sin(phi));
}

/// d position / d [phi, r].
inline Eigen::Matrix2d position_jacobian(double phi, double r) {
    Eigen::Matrix2d j;
    j << -r * std::sin(phi), std::cos(phi),
         -r * std::cos(phi), -std::sin(phi);
    return j;
}

} // namespace lhbs
