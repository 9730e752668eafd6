#pragma once

// End-to-end localization timeline:
//   phase 1  UE pilot -> HRIS in full absorption, MUSIC AoA at the HRIS
//   phase 2  BS pilots reflected by the HRIS; the first carries exp(j phi_hat)
//   phase 3  UE correlates both bursts (ToA -> range), demodulates phi_hat
//            differentially, and fixes its position.
// All times are in the UE clock; the UE transmits its pilot at t = 0.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lhbs/channel.hpp"
#include "lhbs/constants.hpp"
#include "lhbs/errors.hpp"
#include "lhbs/estimators.hpp"
#include "lhbs/geometry.hpp"
#include "lhbs/signals.hpp"

namespace lhbs {

enum class HrisAoaMode { perfect, music };

struct ProtocolConfig {
    double carrier_hz = 25e9;
    double bandwidth_hz = 20e6;      // T_c = 1 / B
    double rolloff = 0.8;
    int oversampling = 10;
    int pulse_span = 16;             // symbols per side
    int pilot_length = 100;          // N
    double turnaround_s = 1e-3;      // T
    std::optional<double> clock_offset_rad; // eps; drawn U[0, 2 pi) per trial when unset
    double snr_db = 20.0;            // +inf for a noiseless run
    std::optional<double> phase1_snr_db; // per-element HRIS SNR; default reuses the phase-2 sigma^2
    HrisAoaMode hris_aoa_mode = HrisAoaMode::perfect;
    bool interpolation = false;
    int bs_elements = 16;            // M
    int hris_elements = 64;          // R
    double element_spacing_wavelengths = 0.5;
    double max_range_m = 300.0;      // sizes the UE receive window
    double music_grid_step_rad = kDefaultMusicGridStep;
    SynthesisMode synthesis = SynthesisMode::analytic;
    double detection_threshold_db = 6.0;

    double wavelength() const { return kSpeedOfLight / carrier_hz; }
    double symbol_period() const { return 1.0 / bandwidth_hz; }
    double sample_period() const { return symbol_period() / oversampling; }

    PulseConfig pulse() const {
        return PulseConfig{symbol_period(), rolloff, oversampling, pulse_span, synthesis};
    }
    ArrayConfig bs_array() const {
        return ArrayConfig{bs_elements, element_spacing_wavelengths * wavelength(), wavelength()};
    }
    ArrayConfig hris_array() const {
        return ArrayConfig{hris_elements, element_spacing_wavelengths * wavelength(), wavelength()};
    }
    ToaOptions toa_options() const { return ToaOptions{interpolation, detection_threshold_db}; }

    /// Guard symbols added to the receive window to cover round trips up to max_range_m.
    int range_guard_symbols() const {
        return static_cast<int>(std::ceil(2.0 * max_range_m / (kSpeedOfLight * symbol_period())));
    }

    void validate() const {
        if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz)) throw FieldError("carrier_hz", "must be positive");
        if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) throw FieldError("bandwidth_hz", "must be positive");
        if (pilot_length <= 0 || pilot_length % 2 != 0)
            throw FieldError("pilot_length", "N must be even and positive");
        if (!(rolloff > 0.0 && rolloff <= 1.0)) throw FieldError("rolloff", "must lie in (0, 1]");
        if (oversampling < 1) throw FieldError("oversampling", "must be >= 1");
        if (pulse_span < 8) throw FieldError("pulse_span_symbols", "must be >= 8");
        if (bs_elements < 1) throw FieldError("bs_elements", "must be >= 1");
        if (hris_elements < 2) throw FieldError("hris_elements", "must be >= 2");
        if (!(element_spacing_wavelengths > 0.0)) throw FieldError("element_spacing_wavelengths", "must be positive");
        if (!(max_range_m > 0.0)) throw FieldError("max_range_m", "must be positive");
        if (!(music_grid_step_rad > 0.0)) throw FieldError("music_grid_step_rad", "must be positive");
        if (std::isnan(snr_db)) throw FieldError("snr_db", "must be a number");
        if (clock_offset_rad && !std::isfinite(*clock_offset_rad))
            throw FieldError("clock_offset_rad", "must be finite");
        const double t_needed = 2.0 * max_range_m / kSpeedOfLight + pilot_length * symbol_period();
        if (!(turnaround_s > t_needed))
            throw FieldError("turnaround_s", "T must exceed the longest round trip plus one pilot burst ("
                                                 + std::to_string(t_needed) + " s)");
    }

    /// Checks that the scenario fits the receive window and the schedule.
    void validate(const Scenario& s) const {
        validate();
        const PolarParams p = derive_polar(s);
        if (p.r_HU > max_range_m) throw FieldError("max_range_m", "UE lies beyond the receive window range");
        if (!(p.tau_BH < turnaround_s))
            throw FieldError("turnaround_s", "BS-HRIS propagation exceeds the turnaround time");
        if (synthesis == SynthesisMode::convolution) {
            const double k = (turnaround_s + 2.0 * p.tau_HU) / sample_period();
            if (std::abs(k - std::nearbyint(k)) > 1e-6)
                throw FieldError("synthesis", "convolution synthesis needs a sample-aligned round trip");
        }
    }
};

/// Noise variance sigma^2 with SNR = |xi_BH xi_UH|^2 R^2 / sigma^2.
inline double snr_to_noise_variance(double snr_db, const Scenario& s, const ProtocolConfig& cfg) {
    if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
    if (!std::isfinite(snr_db)) throw FieldError("snr_db", "must be finite or +inf");
    const PolarParams p = derive_polar(s);
    const double lambda = cfg.wavelength();
    const double g = channel_coeff(p.r_BH, lambda, 0.0).gain() * channel_coeff(p.r_HU, lambda, 0.0).gain();
    const double r = cfg.hris_elements;
    return g * r * r / std::pow(10.0, snr_db / 10.0);
}

struct TrialResult {
    double phi_hat_hris = 0.0; // AoA the HRIS modulates
    double phi_demod = 0.0;    // AoA demodulated at the UE
    double r_hat = 0.0;        // m
    Point2 p_hat = Point2::Zero();
    PolarParams truth{};
    double clock_offset = 0.0;
    cplx z{};
    ToaEstimate toa_first{};
    ToaEstimate toa_second{};
    bool failed = false;
    std::string failure_reason;

    double range_error() const { return r_hat - truth.r_HU; }
    double aoa_error() const { return wrap_angle(phi_demod - truth.phi_HU); }
};

/// Everything about a trial that does not depend on the noise draw or the
/// clock offset. Built once per (scenario, config) and reused across trials.
class TrialContext {
public:
    TrialContext(Scenario scenario, ProtocolConfig cfg)
        : scenario_(std::move(scenario)), cfg_(std::move(cfg)) {
        cfg_.validate(scenario_);
        truth_ = derive_polar(scenario_);
        pulse_ = cfg_.pulse();
        bs_ = cfg_.bs_array();
        hris_ = cfg_.hris_array();
        pilot_ = cazac(cfg_.pilot_length);
        replica_ = modulate(pilot_, pulse_, 0.0);

        const double tc = pulse_.symbol_period;
        const double n_tc = cfg_.pilot_length * tc;
        const Eigen::Index window = static_cast<Eigen::Index>(
            (cfg_.pilot_length + 2 * cfg_.pulse_span + cfg_.range_guard_symbols()) * cfg_.oversampling);
        const double t0 = cfg_.turnaround_s - cfg_.pulse_span * tc;
        const double round_trip = 2.0 * truth_.tau_HU;
        burst1_ = synthesize(pilot_, pulse_, cfg_.turnaround_s + round_trip, t0, window);
        burst2_ = synthesize(pilot_, pulse_, cfg_.turnaround_s + n_tc + round_trip, t0 + n_tc, window);
    }

    const Scenario& scenario() const { return scenario_; }
    const ProtocolConfig& config() const { return cfg_; }
    const PolarParams& truth() const { return truth_; }
    const PulseConfig& pulse() const { return pulse_; }
    const ArrayConfig& bs_array() const { return bs_; }
    const ArrayConfig& hris_array() const { return hris_; }
    const std::vector<cplx>& pilot() const { return pilot_; }
    const Waveform& replica() const { return replica_; }
    // Unit-gain noiseless pulse trains on the two UE receive windows.
    const Waveform& unit_burst1() const { return burst1_; }
    const Waveform& unit_burst2() const { return burst2_; }

    double noise_variance() const { return snr_to_noise_variance(cfg_.snr_db, scenario_, cfg_); }

    double phase1_noise_variance(double eps) const {
        if (!cfg_.phase1_snr_db) return noise_variance();
        const double g = channel_coeff(truth_.r_HU, cfg_.wavelength(), eps).gain();
        if (std::isinf(*cfg_.phase1_snr_db) && *cfg_.phase1_snr_db > 0.0) return 0.0;
        return g / std::pow(10.0, *cfg_.phase1_snr_db / 10.0);
    }

    /// Cascade gains of the two acknowledgment bursts for a given HRIS estimate.
    std::pair<cplx, cplx> burst_gains(double phi_hat, double eps) const {
        const double lambda = cfg_.wavelength();
        const ChannelCoeff xi_bh = channel_coeff(truth_.r_BH, lambda, eps);
        const ChannelCoeff xi_uh = channel_coeff(truth_.r_HU, lambda, eps);
        const CMatrix h_bh = bs_hris_channel(bs_, hris_, xi_bh, truth_.theta_BH, truth_.phi_BH);
        const CVector b_bs = bs_beamformer(bs_, truth_.phi_BH);
        const cplx g1 = cascade_gain(h_bh, b_bs, hris_profile_tx1(hris_, phi_hat, truth_.theta_BH), hris_, xi_uh,
                                     truth_.phi_HU);
        const cplx g2 = cascade_gain(h_bh, b_bs, hris_profile_tx2(hris_, phi_hat, truth_.theta_BH), hris_, xi_uh,
                                     truth_.phi_HU);
        return {g1, g2};
    }

private:
    Scenario scenario_;
    ProtocolConfig cfg_;
    PolarParams truth_{};
    PulseConfig pulse_{};
    ArrayConfig bs_{};
    ArrayConfig hris_{};
    std::vector<cplx> pilot_;
    Waveform replica_;
    Waveform burst1_;
    Waveform burst2_;
};

// ---------------------------------------------------------------------------
// Phases

/// HRIS snapshots y_H(n) = h_UH x_n + w_H(n), HRIS in full absorption.
inline SnapshotSet phase1_snapshots(const TrialContext& ctx, double noise_variance, Rng& rng, double eps = 0.0) {
    const ChannelCoeff xi_uh = channel_coeff(ctx.truth().r_HU, ctx.config().wavelength(), eps);
    const CVector h = uplink_channel(ctx.hris_array(), xi_uh, ctx.truth().phi_HU);
    const auto& x = ctx.pilot();
    SnapshotSet set;
    set.known_symbols = x;
    set.snapshots.resize(h.size(), static_cast<Eigen::Index>(x.size()));
    for (std::size_t n = 0; n < x.size(); ++n) set.snapshots.col(static_cast<Eigen::Index>(n)) = h * x[n];
    if (noise_variance > 0.0) {
        std::normal_distribution<double> g(0.0, std::sqrt(noise_variance / 2.0));
        for (Eigen::Index n = 0; n < set.snapshots.cols(); ++n)
            for (Eigen::Index i = 0; i < set.snapshots.rows(); ++i) {
                const double re = g(rng);
                const double im = g(rng);
                set.snapshots(i, n) += cplx(re, im);
            }
    }
    return set;
}

inline SnapshotSet phase1_snapshots(const Scenario& s, const ProtocolConfig& cfg, double noise_variance, Rng& rng,
                                    double eps = 0.0) {
    return phase1_snapshots(TrialContext(s, cfg), noise_variance, rng, eps);
}

/// The two oversampled, matched-filtered bursts at the UE (first carries exp(j phi_hat)).
/// `noise_variance_u` is the per-sample variance after oversampling (u_f sigma^2).
inline std::pair<Waveform, Waveform> phase2_waveforms(const TrialContext& ctx, double phi_hat, double noise_variance_u,
                                                      Rng& rng, double eps = 0.0) {
    const auto [g1, g2] = ctx.burst_gains(phi_hat, eps);
    Waveform r = ctx.unit_burst1();
    Waveform r2 = ctx.unit_burst2();
    r.samples *= g1;
    r2.samples *= g2;
    r = add_awgn(std::move(r), noise_variance_u, rng);
    r2 = add_awgn(std::move(r2), noise_variance_u, rng);
    return {std::move(r), std::move(r2)};
}

inline std::pair<Waveform, Waveform> phase2_waveforms(const Scenario& s, const ProtocolConfig& cfg, double phi_hat,
                                                      double noise_variance_u, Rng& rng, double eps = 0.0) {
    return phase2_waveforms(TrialContext(s, cfg), phi_hat, noise_variance_u, rng, eps);
}

/// Cuts the N u_f samples starting at the first symbol peak, given an integer replica lag.
inline Waveform aligned_burst(const Waveform& w, Eigen::Index lag, const TrialContext& ctx) {
    const Eigen::Index start = lag + static_cast<Eigen::Index>(ctx.config().pulse_span) * ctx.config().oversampling;
    const Eigen::Index len = static_cast<Eigen::Index>(ctx.config().pilot_length) * ctx.config().oversampling;
    if (start < 0 || start + len > w.size()) throw DetectionFailure("aligned_burst: alignment outside window");
    Waveform out;
    out.samples = w.samples.segment(start, len);
    out.sample_period = w.sample_period;
    out.t0 = w.time_at(start);
    return out;
}

/// Phase 3 on already-received bursts.
inline void estimate_position(const TrialContext& ctx, const Waveform& r, const Waveform& r2, TrialResult& out) {
    const ProtocolConfig& cfg = ctx.config();
    const ToaOptions opt = cfg.toa_options();
    out.toa_first = toa_correlate(r, ctx.replica(), opt);
    out.toa_second = toa_correlate(r2, ctx.replica(), opt);
    out.r_hat = range_estimate(out.toa_first, out.toa_second, cfg.turnaround_s, cfg.pilot_length,
                               ctx.pulse().symbol_period);

    const auto lag = static_cast<Eigen::Index>(
        std::llround(0.5 * static_cast<double>(out.toa_first.lag + out.toa_second.lag)));
    out.z = differential_combine(aligned_burst(r, lag, ctx), aligned_burst(r2, lag, ctx));
    out.phi_demod = demod_aoa(out.z);
    out.p_hat = position_from_polar(ctx.scenario().hris(), out.phi_demod, out.r_hat);
}

/// One full protocol run. Deterministic in (context, seed); detection failures are
/// reported through TrialResult::failed.
inline TrialResult run_trial(const TrialContext& ctx, std::uint64_t seed) {
    const ProtocolConfig& cfg = ctx.config();
    Rng rng(seed);
    TrialResult out;
    out.truth = ctx.truth();
    if (cfg.clock_offset_rad) {
        out.clock_offset = *cfg.clock_offset_rad;
    } else {
        std::uniform_real_distribution<double> u(0.0, kTwoPi);
        out.clock_offset = u(rng);
    }

    const double sigma2 = ctx.noise_variance();
    try {
        if (cfg.hris_aoa_mode == HrisAoaMode::music) {
            const SnapshotSet snaps = phase1_snapshots(ctx, ctx.phase1_noise_variance(out.clock_offset), rng,
                                                       out.clock_offset);
            out.phi_hat_hris = music_aoa(snaps, ctx.hris_array(), cfg.music_grid_step_rad).phi;
        } else {
            out.phi_hat_hris = out.truth.phi_HU;
        }
        const auto [r, r2] = phase2_waveforms(ctx, out.phi_hat_hris, cfg.oversampling * sigma2, rng, out.clock_offset);
        estimate_position(ctx, r, r2, out);
    } catch (const DetectionFailure& e) {
        out.failed = true;
        out.failure_reason = e.what();
    }
    return out;
}

inline TrialResult run_trial(const Scenario& s, const ProtocolConfig& cfg, std::uint64_t seed) {
    return run_trial(TrialContext(s, cfg), seed);
}

} // namespace lhbs
