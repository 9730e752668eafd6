#pragma once

// Cramer-Rao bounds for the demodulated AoA, the two-burst range estimate and
// the resulting 2D position, for the oversampled Gaussian model
//   r ~ CN(s(phi_hat, r_HU), sigma_u^2 I).

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lhbs/constants.hpp"
#include "lhbs/errors.hpp"
#include "lhbs/geometry.hpp"
#include "lhbs/protocol.hpp"
#include "lhbs/signals.hpp"

namespace lhbs {

struct CrlbReport {
    double crlb_phi = 0.0; // rad^2
    double crlb_r = 0.0;   // m^2
    double alpha = 0.0;    // 1 / (rad m)
    Eigen::Matrix2d fim = Eigen::Matrix2d::Zero();
    double crlb_pos = 0.0; // m^2
    bool singular = false; // FIM not positive definite; crlb_pos is NaN
};

// ---------------------------------------------------------------------------
// Mean signal model

/// s_i = gain Sum_n x_n q~(i T_s - n T_c - delay), i = 0..N u_f - 1. With
/// delay = 0 sample 0 sits on the first symbol's peak.
inline CVector mean_signal(std::span<const cplx> symbols, const PulseConfig& cfg, cplx gain, double delay = 0.0) {
    const Eigen::Index len = static_cast<Eigen::Index>(symbols.size()) * cfg.oversampling;
    const double ts = cfg.sample_period();
    const double tc = cfg.symbol_period;
    CVector s(len);
    for (Eigen::Index i = 0; i < len; ++i) {
        cplx acc{};
        for (std::size_t n = 0; n < symbols.size(); ++n)
            acc += symbols[n] * raised_cosine(static_cast<double>(i) * ts - static_cast<double>(n) * tc - delay, cfg);
        s[i] = gain * acc;
    }
    return s;
}

/// d s / d r_HU. The burst delay is 2 r_HU / c, so ds/dtau = -2 gain Sum x_n q~'(.)
/// and ds/dr = (ds/dtau) / c.
inline CVector mean_signal_range_derivative(std::span<const cplx> symbols, const PulseConfig& cfg, cplx gain,
                                            double delay = 0.0) {
    const Eigen::Index len = static_cast<Eigen::Index>(symbols.size()) * cfg.oversampling;
    const double ts = cfg.sample_period();
    const double tc = cfg.symbol_period;
    CVector d(len);
    for (Eigen::Index i = 0; i < len; ++i) {
        cplx acc{};
        for (std::size_t n = 0; n < symbols.size(); ++n)
            acc += symbols[n]
                 * raised_cosine_derivative(static_cast<double>(i) * ts - static_cast<double>(n) * tc - delay, cfg);
        d[i] = -2.0 * gain * acc / kSpeedOfLight;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Bounds

/// sigma_u^2 / (2 ||s||^2).
inline double crlb_aoa(const CVector& s, double noise_variance_u) {
    const double e = s.squaredNorm();
    if (!(e > 0.0)) throw ConfigError("crlb_aoa: zero signal");
    return noise_variance_u / (2.0 * e);
}

/// c^2 / (8 * 2 * B2^2 * Es/N0). `rms_bandwidth_rad` is the angular RMS
/// bandwidth (rad/s) and `energy` the energy of one correlated burst.
inline double crlb_range(double energy, double n0, double rms_bandwidth_rad) {
    if (!(energy > 0.0) || !(n0 > 0.0) || !(rms_bandwidth_rad > 0.0))
        throw ConfigError("crlb_range: inputs must be positive");
    return kSpeedOfLight * kSpeedOfLight / (16.0 * rms_bandwidth_rad * rms_bandwidth_rad * (energy / n0));
}

/// Off-diagonal FIM entry -(2 / sigma_u^2) Im[s^H ds/dr].
inline double fim_alpha(const CVector& s, const CVector& s_dot, double noise_variance_u) {
    if (s.size() != s_dot.size()) throw ConfigError("fim_alpha: length mismatch");
    return -(2.0 / noise_variance_u) * s.dot(s_dot).imag();
}

inline Eigen::Matrix2d fisher_matrix(double crlb_phi, double crlb_r, double alpha) {
    Eigen::Matrix2d fim;
    fim << 1.0 / crlb_phi, alpha,
           alpha, 1.0 / crlb_r;
    return fim;
}

/// tr(J I^-1 J^T) with J the polar-to-Cartesian Jacobian.
inline double crlb_position(const Eigen::Matrix2d& fim, const Eigen::Matrix2d& jacobian) {
    if (!(fim(0, 0) > 0.0) || !(fim(0, 0) * fim(1, 1) > fim(0, 1) * fim(1, 0)))
        throw SingularFimError("crlb_position: FIM is not positive definite");
    return (jacobian * fim.inverse() * jacobian.transpose()).trace();
}

struct CrlbOptions {
    bool zero_alpha = false;
};

/// All bounds for a TrialContext at the given SNR, evaluated at the true
/// geometry with a perfect HRIS estimate.
inline CrlbReport crlb_report(const TrialContext& ctx, double snr_db, const CrlbOptions& opt = {}) {
    CrlbReport rep;
    const double sigma2 = snr_to_noise_variance(snr_db, ctx.scenario(), ctx.config());
    if (sigma2 == 0.0) return rep;

    const ProtocolConfig& cfg = ctx.config();
    const PulseConfig& pulse = ctx.pulse();
    const PolarParams& truth = ctx.truth();
    const double sigma2_u = cfg.oversampling * sigma2;

    const cplx gain = ctx.burst_gains(truth.phi_HU, 0.0).first;
    const CVector s = mean_signal(ctx.pilot(), pulse, gain);
    const CVector s_dot = mean_signal_range_derivative(ctx.pilot(), pulse, gain);

    rep.crlb_phi = crlb_aoa(s, sigma2_u);
    const double energy = cfg.pilot_length * std::norm(gain) * pulse.symbol_period;
    const double n0 = sigma2_u * pulse.sample_period();
    rep.crlb_r = crlb_range(energy, n0, kTwoPi * rms_bandwidth(pulse));
    rep.alpha = opt.zero_alpha ? 0.0 : fim_alpha(s, s_dot, sigma2_u);
    rep.fim = fisher_matrix(rep.crlb_phi, rep.crlb_r, rep.alpha);
    try {
        rep.crlb_pos = crlb_position(rep.fim, position_jacobian(truth.phi_HU, truth.r_HU));
    } catch (const SingularFimError&) {
        rep.singular = true;
        rep.crlb_pos = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

} // namespace lhbs
