#pragma once

// HRIS-side MUSIC AoA, UE-side differential demodulation of the backscattered
// AoA message, and correlation time-of-arrival / range estimation.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lhbs/channel.hpp"
#include "lhbs/constants.hpp"
#include "lhbs/errors.hpp"
#include "lhbs/signals.hpp"

namespace lhbs {

// ---------------------------------------------------------------------------
// MUSIC

/// One column per pilot symbol: y_H(n) = h_UH x_n + w_H(n).
struct SnapshotSet {
    CMatrix snapshots; // R x N
    std::vector<cplx> known_symbols;

    Eigen::Index count() const { return snapshots.cols(); }
};

struct AoaEstimate {
    double phi = 0.0;
    std::vector<double> grid;     // rad
    std::vector<double> spectrum; // pseudo-spectrum 1 / ||E_n^H a||^2 on grid
    bool ambiguous = false;       // a second peak within 1 dB of the maximum
};

inline constexpr double kDefaultMusicGridStep = 0.02 * kPi / 180.0;

namespace detail {

// Offset in (-0.5, 0.5) of the vertex of the parabola through (-1, a), (0, b), (1, c).
inline double parabolic_offset(double a, double b, double c) {
    const double den = a - 2.0 * b + c;
    if (den == 0.0) return 0.0;
    return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

} // namespace detail

/// Single-source MUSIC over the open interval (-pi/2, pi/2).
inline AoaEstimate music_aoa(const SnapshotSet& set, const ArrayConfig& cfg,
                             double grid_step = kDefaultMusicGridStep) {
    const Eigen::Index n = set.count();
    const Eigen::Index r = set.snapshots.rows();
    if (n < 1) throw ConfigError("music_aoa: no snapshots (degenerate covariance)");
    if (r != cfg.elements) throw ConfigError("music_aoa: snapshot length differs from array size");
    if (r < 2) throw ConfigError("music_aoa: need at least two elements for a noise subspace");
    if (!(grid_step > 0.0) || grid_step >= kPi / 2.0) throw ConfigError("music_aoa: invalid grid step");

    const CMatrix cov = set.snapshots * set.snapshots.adjoint() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov);
    if (eig.info() != Eigen::Success) throw DetectionFailure("music_aoa: eigendecomposition failed");
    // ascending eigenvalues: the first R-1 vectors span the noise subspace
    const CMatrix noise = eig.eigenvectors().leftCols(r - 1);

    const auto k_max = static_cast<int>(std::ceil((kPi / 2.0) / grid_step)) - 1;
    AoaEstimate out;
    out.grid.reserve(static_cast<std::size_t>(2 * k_max + 1));
    for (int k = -k_max; k <= k_max; ++k) out.grid.push_back(k * grid_step);

    const auto g = static_cast<Eigen::Index>(out.grid.size());
    CMatrix steering(r, g);
    for (Eigen::Index k = 0; k < g; ++k) steering.col(k) = steering_vector(cfg, out.grid[static_cast<std::size_t>(k)]);
    const Eigen::VectorXd null_power = (noise.adjoint() * steering).colwise().squaredNorm().transpose();

    constexpr double kFloor = 1e-300;
    out.spectrum.resize(static_cast<std::size_t>(g));
    Eigen::Index best = 0;
    for (Eigen::Index k = 0; k < g; ++k) {
        out.spectrum[static_cast<std::size_t>(k)] = 1.0 / std::max(null_power[k], kFloor);
        if (null_power[k] < null_power[best]) best = k;
    }

    double phi = out.grid[static_cast<std::size_t>(best)];
    if (best > 0 && best + 1 < g)
        phi += grid_step * detail::parabolic_offset(null_power[best - 1], null_power[best], null_power[best + 1]);
    out.phi = phi;

    const double peak = out.spectrum[static_cast<std::size_t>(best)];
    const double limit = peak * std::pow(10.0, -0.1);
    for (Eigen::Index k = 1; k + 1 < g; ++k) {
        if (std::abs(k - best) <= 1) continue;
        const double v = out.spectrum[static_cast<std::size_t>(k)];
        if (v > out.spectrum[static_cast<std::size_t>(k - 1)] && v >= out.spectrum[static_cast<std::size_t>(k + 1)]
            && v >= limit) {
            out.ambiguous = true;
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Differential demodulation

/// z = (1 / L) Sum r_n^* r'_n over two time-aligned, equal-length bursts.
inline cplx differential_combine(const Waveform& r, const Waveform& r2) {
    if (r.size() != r2.size() || r.size() == 0)
        throw ConfigError("differential_combine: bursts must have equal, nonzero length");
    return r.samples.dot(r2.samples) / static_cast<double>(r.size());
}

/// phi = -arg(z), wrapped to (-pi, pi].
inline double demod_aoa(cplx z) {
    if (std::abs(z) == 0.0) throw DetectionFailure("demod_aoa: combiner output is zero");
    return wrap_angle(-std::arg(z));
}

// ---------------------------------------------------------------------------
// Time of arrival

struct ToaEstimate {
    double t_rx = 0.0;       // s, UE clock
    cplx peak_value{};       // correlation at the integer peak
    bool interpolated = false;
    Eigen::Index lag = 0;    // integer peak lag, samples
    double fraction = 0.0;   // sub-sample refinement, samples
};

struct ToaOptions {
    bool interpolate = true;
    double min_peak_to_median_db = 6.0;
};

/// Cross-correlates `received` with the delay-0 `replica` and returns the
/// arrival time of the replica's reference instant.
inline ToaEstimate toa_correlate(const Waveform& received, const Waveform& replica, const ToaOptions& opt = {}) {
    const Eigen::Index lr = received.size();
    const Eigen::Index lt = replica.size();
    if (lt == 0 || lr < lt) throw ConfigError("toa_correlate: received window shorter than replica");
    if (std::abs(received.sample_period - replica.sample_period) > 1e-12 * replica.sample_period)
        throw ConfigError("toa_correlate: sample periods differ");

    const Eigen::Index lags = lr - lt + 1;
    std::vector<cplx> corr(static_cast<std::size_t>(lags));
    std::vector<double> power(static_cast<std::size_t>(lags));
    for (Eigen::Index m = 0; m < lags; ++m) {
        corr[static_cast<std::size_t>(m)] = replica.samples.dot(received.samples.segment(m, lt));
        power[static_cast<std::size_t>(m)] = std::norm(corr[static_cast<std::size_t>(m)]);
    }
    const auto best = static_cast<Eigen::Index>(std::max_element(power.begin(), power.end()) - power.begin());
    const double peak = power[static_cast<std::size_t>(best)];

    if (lags >= 3) {
        std::vector<double> sorted = power;
        auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
        std::nth_element(sorted.begin(), mid, sorted.end());
        const double median = *mid;
        if (!(peak > 0.0) || (median > 0.0 && 10.0 * std::log10(peak / median) < opt.min_peak_to_median_db))
            throw DetectionFailure("toa_correlate: correlation peak too low (missed detection)");
    } else if (!(peak > 0.0)) {
        throw DetectionFailure("toa_correlate: no correlation energy");
    }

    ToaEstimate est;
    est.lag = best;
    est.peak_value = corr[static_cast<std::size_t>(best)];
    if (opt.interpolate && best > 0 && best + 1 < lags) {
        est.fraction = detail::parabolic_offset(power[static_cast<std::size_t>(best - 1)], peak,
                                                power[static_cast<std::size_t>(best + 1)]);
        est.interpolated = true;
    }
    est.t_rx = (received.t0 - replica.t0) + (static_cast<double>(best) + est.fraction) * received.sample_period;
    return est;
}

/// Two-burst range: each burst gives tau = (t_rx - T - offset) / 2; r = c (tau1 + tau2) / 2.
inline double range_estimate(const ToaEstimate& first, const ToaEstimate& second, double turnaround,
                             int n_symbols, double symbol_period) {
    const double tau1 = (first.t_rx - turnaround) / 2.0;
    const double tau2 = (second.t_rx - turnaround - n_symbols * symbol_period) / 2.0;
    if (tau1 < 0.0 || tau2 < 0.0)
        throw ConfigError("range_estimate: negative time of flight (timing misconfiguration)");
    return kSpeedOfLight * (tau1 + tau2) / 2.0;
}

} // namespace lhbs
