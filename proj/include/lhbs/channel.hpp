#pragma once

// Single-path mmWave channel: ULA steering vectors, free-space coefficients,
// BS->HRIS matrix, UE<->HRIS vector, BS beamformer and HRIS phase profiles.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lhbs/constants.hpp"
#include "lhbs/errors.hpp"

namespace lhbs {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct ArrayConfig {
    int elements = 1;
    double spacing = 0.5;    // m
    double wavelength = 1.0; // m

    double kappa() const { return kTwoPi * spacing / wavelength; }

    static ArrayConfig half_wavelength(int elements, double wavelength) {
        return ArrayConfig{elements, 0.5 * wavelength, wavelength};
    }

    void validate(const char* name) const {
        if (elements < 1) throw FieldError(name, "array needs at least one element");
        if (!(spacing > 0.0) || !(wavelength > 0.0))
            throw FieldError(name, "spacing and wavelength must be positive");
    }
};

/// a_A(theta)_n = exp(-j kappa sin(theta) n).
inline CVector steering_vector(const ArrayConfig& cfg, double theta) {
    CVector a(cfg.elements);
    const double k = cfg.kappa() * std::sin(theta);
    for (int n = 0; n < cfg.elements; ++n) a[n] = std::polar(1.0, -k * n);
    return a;
}

struct ChannelCoeff {
    cplx xi;
    double gain() const { return std::norm(xi); } // gamma
};

/// Free-space coefficient sqrt(gamma) exp(-j(eps + 2 pi r / lambda)), gamma = (lambda / (4 pi r))^2.
inline ChannelCoeff channel_coeff(double r, double wavelength, double eps) {
    if (!(r > 0.0)) throw ConfigError("channel_coeff: range must be positive");
    const double amp = wavelength / (4.0 * kPi * r);
    // fold the (large) propagation phase before adding the clock offset
    const double prop = std::fmod(kTwoPi * r / wavelength, kTwoPi);
    return ChannelCoeff{std::polar(amp, -(eps + prop))};
}

/// h_UH = xi a_R(phi_HU).
inline CVector uplink_channel(const ArrayConfig& hris, const ChannelCoeff& xi, double phi_HU) {
    return xi.xi * steering_vector(hris, phi_HU);
}

/// H_BH = xi / sqrt(M) a_R(theta_BH) a_M(phi_BH)^H.
inline CMatrix bs_hris_channel(const ArrayConfig& bs, const ArrayConfig& hris, const ChannelCoeff& xi,
                               double theta_BH, double phi_BH) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(bs.elements));
    return (xi.xi * scale) * steering_vector(hris, theta_BH) * steering_vector(bs, phi_BH).adjoint();
}

/// b_BS = a_M(phi_BH) / sqrt(M).
inline CVector bs_beamformer(const ArrayConfig& bs, double phi_BH) {
    return steering_vector(bs, phi_BH) / std::sqrt(static_cast<double>(bs.elements));
}

struct HrisProfile {
    double rho = 1.0;
    std::vector<double> phases; // alpha_i, rad

    /// Diagonal of Omega: sqrt(rho) exp(j alpha_i).
    CVector diagonal() const {
        CVector d(static_cast<Eigen::Index>(phases.size()));
        const double g = std::sqrt(rho);
        for (std::size_t i = 0; i < phases.size(); ++i) d[static_cast<Eigen::Index>(i)] = std::polar(g, phases[i]);
        return d;
    }
};

namespace detail {

// Linear phase gradient that re-points the BS wave arriving from theta_BH
// toward phi_hat, plus a common phase offset.
inline HrisProfile steering_profile(const ArrayConfig& hris, double phi_hat, double theta_BH, double common) {
    HrisProfile p;
    p.rho = 1.0;
    p.phases.resize(static_cast<std::size_t>(hris.elements));
    const double grad = hris.kappa() * (std::sin(phi_hat) + std::sin(theta_BH));
    for (int i = 0; i < hris.elements; ++i) p.phases[static_cast<std::size_t>(i)] = grad * i + common;
    return p;
}

} // namespace detail

/// First acknowledgment: beam toward phi_hat and backscatter the message exp(j phi_hat).
inline HrisProfile hris_profile_tx1(const ArrayConfig& hris, double phi_hat, double theta_BH) {
    return detail::steering_profile(hris, phi_hat, theta_BH, phi_hat);
}

/// Second acknowledgment: same beam, no message phase.
inline HrisProfile hris_profile_tx2(const ArrayConfig& hris, double phi_hat, double theta_BH) {
    return detail::steering_profile(hris, phi_hat, theta_BH, 0.0);
}

/// Scalar BS -> HRIS -> UE gain xi_UH a_R(phi_HU)^T Omega H_BH b_BS.
inline cplx cascade_gain(const CMatrix& h_bh, const CVector& b_bs, const HrisProfile& omega,
                         const ArrayConfig& hris, const ChannelCoeff& xi_uh, double phi_HU) {
    const CVector incident = h_bh * b_bs;
    const CVector reflected = omega.diagonal().cwiseProduct(incident);
    return xi_uh.xi * (steering_vector(hris, phi_HU).array() * reflected.array()).sum();
}

} // namespace lhbs
