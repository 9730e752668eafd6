#pragma once

// Waveform primitives: CAZAC pilots, SRRC pulse shaping, raised-cosine
// cascade (and its derivative), oversampled synthesis, AWGN, RMS bandwidth.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lhbs/constants.hpp"
#include "lhbs/errors.hpp"

namespace lhbs {

using Rng = std::mt19937_64;
using CVector = Eigen::VectorXcd;

/// Sampled complex baseband signal. Sample i sits at time t0 + i * sample_period.
struct Waveform {
    CVector samples;
    double sample_period = 1.0;
    double t0 = 0.0;

    Eigen::Index size() const { return samples.size(); }
    double time_at(Eigen::Index i) const { return t0 + static_cast<double>(i) * sample_period; }
    double energy() const { return samples.squaredNorm(); }
};

enum class SynthesisMode {
    analytic,    // closed-form raised cosine
    convolution, // discrete SRRC * SRRC cascade, integer-sample delays only
};

struct PulseConfig {
    double symbol_period = 50e-9; // T_c, s
    double rolloff = 0.8;         // beta in (0, 1]
    int oversampling = 10;        // u_f
    int span = 16;                // truncation half-length in symbols
    SynthesisMode synthesis = SynthesisMode::analytic;

    double sample_period() const { return symbol_period / oversampling; }

    void validate() const {
        if (!(symbol_period > 0.0) || !std::isfinite(symbol_period))
            throw FieldError("symbol_period", "must be positive");
        if (!(rolloff > 0.0 && rolloff <= 1.0))
            throw FieldError("rolloff", "must lie in (0, 1]");
        if (oversampling < 1)
            throw FieldError("oversampling", "must be >= 1");
        if (span < 8)
            throw FieldError("span", "must be >= 8 symbols");
    }
};

// ---------------------------------------------------------------------------
// Pilot sequence

/// x_n = exp(j pi n (n + 1) / N), n = 0..N-1. N must be even and positive.
inline std::vector<cplx> cazac(int n_symbols) {
    if (n_symbols <= 0 || n_symbols % 2 != 0)
        throw FieldError("pilot_length", "CAZAC length N must be even and positive");
    std::vector<cplx> x(static_cast<std::size_t>(n_symbols));
    const auto n_len = static_cast<std::int64_t>(n_symbols);
    for (std::int64_t n = 0; n < n_len; ++n) {
        // reduce n(n+1) mod 2N before scaling to keep the phase argument small
        const std::int64_t k = (n * (n + 1)) % (2 * n_len);
        x[static_cast<std::size_t>(n)] = std::polar(1.0, kPi * static_cast<double>(k) / static_cast<double>(n_len));
    }
    return x;
}

// ---------------------------------------------------------------------------
// Raised cosine cascade

namespace detail {

inline double sinc(double z) {
    if (std::abs(z) < 1e-4) {
        const double a = kPi * z;
        const double a2 = a * a;
        return 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
    }
    return std::sin(kPi * z) / (kPi * z);
}

inline double sinc_derivative(double z) {
    if (std::abs(z) < 1e-3) {
        // odd series: -pi^2 z/3 + pi^4 z^3/30 - pi^6 z^5/840
        const double p2 = kPi * kPi;
        const double z2 = z * z;
        return z * (-p2 / 3.0 + z2 * (p2 * p2 / 30.0 - z2 * p2 * p2 * p2 / 840.0));
    }
    return (std::cos(kPi * z) - sinc(z)) / z;
}

// cos(pi y) / (1 - 4 y^2) written as a sum of shifted sincs; no singularities.
inline double rc_taper(double y) {
    return 0.25 * kPi * (sinc(y + 0.5) + sinc(y - 0.5));
}

inline double rc_taper_derivative(double y) {
    return 0.25 * kPi * (sinc_derivative(y + 0.5) + sinc_derivative(y - 0.5));
}

} // namespace detail

/// Matched-filter cascade q~(t) = sinc(t/T) cos(pi beta t/T) / (1 - (2 beta t/T)^2), peak 1.
inline double raised_cosine(double t, const PulseConfig& cfg) {
    const double x = t / cfg.symbol_period;
    return detail::sinc(x) * detail::rc_taper(cfg.rolloff * x);
}

/// d q~ / dt, in 1/s.
inline double raised_cosine_derivative(double t, const PulseConfig& cfg) {
    const double x = t / cfg.symbol_period;
    const double b = cfg.rolloff;
    const double dfdx = detail::sinc_derivative(x) * detail::rc_taper(b * x)
                      + detail::sinc(x) * b * detail::rc_taper_derivative(b * x);
    return dfdx / cfg.symbol_period;
}

/// SRRC impulse response sampled at T_s over +-span symbols, scaled to unit
/// discrete energy so the matched-filter cascade peaks at exactly 1.
inline Waveform srrc_pulse(const PulseConfig& cfg) {
    cfg.validate();
    const int half = cfg.span * cfg.oversampling;
    const double beta = cfg.rolloff;
    Waveform w;
    w.sample_period = cfg.sample_period();
    w.t0 = -static_cast<double>(half) * w.sample_period;
    w.samples.resize(2 * half + 1);
    for (int k = -half; k <= half; ++k) {
        const double x = static_cast<double>(k) / cfg.oversampling; // t / T_c
        double h;
        if (k == 0) {
            h = 1.0 - beta + 4.0 * beta / kPi;
        } else if (std::abs(std::abs(4.0 * beta * x) - 1.0) < 1e-12) {
            h = beta / std::sqrt(2.0)
              * ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta))
                 + (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
        } else {
            h = (std::sin(kPi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(kPi * x * (1.0 + beta)))
              / (kPi * x * (1.0 - 16.0 * beta * beta * x * x));
        }
        w.samples[k + half] = h;
    }
    w.samples /= w.samples.norm();
    return w;
}

/// Discrete cascade srrc * srrc(-t), centred, truncated to +-span symbols.
inline std::vector<double> cascade_taps(const PulseConfig& cfg) {
    const Waveform h = srrc_pulse(cfg);
    const Eigen::Index n = h.size();
    const Eigen::Index half = n / 2;
    std::vector<double> c(static_cast<std::size_t>(n));
    for (Eigen::Index lag = -half; lag <= half; ++lag) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index k = j - lag;
            if (k >= 0 && k < n) acc += h.samples[j].real() * h.samples[k].real();
        }
        c[static_cast<std::size_t>(lag + half)] = acc;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Synthesis

namespace detail {

inline std::int64_t to_sample_index(double t, double ts, const char* what) {
    const double k = t / ts;
    const double r = std::nearbyint(k);
    if (std::abs(k - r) > 1e-6)
        throw ConfigError(std::string(what) + " is not a multiple of the sample period (convolution synthesis)");
    return static_cast<std::int64_t>(r);
}

// Sum_n x_n q~(t - n T_c - delay) at t = t0 + i T_s for i in [first, last).
inline void synthesize_into(std::span<const cplx> symbols, const PulseConfig& cfg, double delay,
                            double t0, std::int64_t first, std::int64_t last, std::vector<cplx>& out) {
    const double tc = cfg.symbol_period;
    const double ts = cfg.sample_period();
    const auto n_sym = static_cast<std::int64_t>(symbols.size());
    out.assign(static_cast<std::size_t>(last - first), cplx{});

    if (cfg.synthesis == SynthesisMode::convolution) {
        static thread_local PulseConfig cached_cfg{};
        static thread_local std::vector<double> taps;
        if (taps.empty() || cached_cfg.symbol_period != cfg.symbol_period || cached_cfg.rolloff != cfg.rolloff
            || cached_cfg.oversampling != cfg.oversampling || cached_cfg.span != cfg.span) {
            taps = cascade_taps(cfg);
            cached_cfg = cfg;
        }
        const std::int64_t half = cfg.span * cfg.oversampling;
        const std::int64_t d = to_sample_index(delay, ts, "delay");
        const std::int64_t o = to_sample_index(t0, ts, "window start");
        for (std::int64_t i = first; i < last; ++i) {
            cplx acc{};
            for (std::int64_t n = 0; n < n_sym; ++n) {
                const std::int64_t k = o + i - n * cfg.oversampling - d;
                if (k >= -half && k <= half)
                    acc += symbols[static_cast<std::size_t>(n)] * taps[static_cast<std::size_t>(k + half)];
            }
            out[static_cast<std::size_t>(i - first)] = acc;
        }
        return;
    }

    const double support = cfg.span * tc;
    for (std::int64_t i = first; i < last; ++i) {
        const double t = t0 + static_cast<double>(i) * ts - delay;
        // symbols with |t - n T_c| <= span T_c
        const auto n_lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((t - support) / tc)));
        const auto n_hi = std::min<std::int64_t>(n_sym - 1, static_cast<std::int64_t>(std::floor((t + support) / tc)));
        cplx acc{};
        for (std::int64_t n = n_lo; n <= n_hi; ++n)
            acc += symbols[static_cast<std::size_t>(n)] * raised_cosine(t - static_cast<double>(n) * tc, cfg);
        out[static_cast<std::size_t>(i - first)] = acc;
    }
}

} // namespace detail

/// Pulse train Sum_n x_n q~(t - n T_c - delay) sampled on [t0, t0 + length T_s).
/// Throws WindowError when more than `max_leakage` of its energy falls outside.
inline Waveform synthesize(std::span<const cplx> symbols, const PulseConfig& cfg, double delay, double t0,
                           Eigen::Index length, double max_leakage = 1e-3) {
    cfg.validate();
    if (symbols.empty()) throw ConfigError("synthesize: no symbols");
    if (length <= 0) throw ConfigError("synthesize: window length must be positive");

    const double tc = cfg.symbol_period;
    const double ts = cfg.sample_period();
    std::vector<cplx> inside;
    detail::synthesize_into(symbols, cfg, delay, t0, 0, length, inside);

    // full support of the pulse train, on the same sample grid
    const double t_first = delay - cfg.span * tc;
    const double t_last = delay + (static_cast<double>(symbols.size()) - 1.0 + cfg.span) * tc;
    const auto i_first = static_cast<std::int64_t>(std::floor((t_first - t0) / ts)) - 1;
    const auto i_last = static_cast<std::int64_t>(std::ceil((t_last - t0) / ts)) + 2;

    double outside = 0.0;
    std::vector<cplx> tail;
    if (i_first < 0) {
        detail::synthesize_into(symbols, cfg, delay, t0, i_first, 0, tail);
        for (const cplx& v : tail) outside += std::norm(v);
    }
    if (i_last > length) {
        detail::synthesize_into(symbols, cfg, delay, t0, std::max<std::int64_t>(length, i_first), i_last, tail);
        for (const cplx& v : tail) outside += std::norm(v);
    }

    Waveform w;
    w.sample_period = ts;
    w.t0 = t0;
    w.samples = Eigen::Map<const CVector>(inside.data(), length);
    const double total = w.energy() + outside;
    if (total > 0.0 && outside > max_leakage * total)
        throw WindowError("synthesis window too short: " + std::to_string(outside / total)
                          + " of the energy falls outside");
    return w;
}

/// Window length (in samples) used for an N-symbol burst: N symbols plus a
/// span-symbol guard on each side.
inline Eigen::Index burst_window_length(std::size_t n_symbols, const PulseConfig& cfg) {
    return static_cast<Eigen::Index>((static_cast<int>(n_symbols) + 2 * cfg.span) * cfg.oversampling);
}

/// Oversampled burst on the reference window t0 = -span T_c, so that with
/// delay = 0 the first symbol's peak lands on sample span * u_f.
inline Waveform modulate(std::span<const cplx> symbols, const PulseConfig& cfg, double delay) {
    if (delay < 0.0) throw ConfigError("modulate: delay must be >= 0");
    const double t0 = -cfg.span * cfg.symbol_period;
    return synthesize(symbols, cfg, delay, t0, burst_window_length(symbols.size(), cfg));
}

// ---------------------------------------------------------------------------
// Noise

/// Adds i.i.d. CN(0, variance) samples.
inline Waveform add_awgn(Waveform w, double variance, Rng& rng) {
    if (variance < 0.0) throw ConfigError("add_awgn: variance must be >= 0");
    if (variance == 0.0) return w;
    std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double re = g(rng);
        const double im = g(rng);
        w.samples[i] += cplx(re, im);
    }
    return w;
}

inline Waveform add_awgn(Waveform w, double variance, std::uint64_t seed) {
    Rng rng(seed);
    return add_awgn(std::move(w), variance, rng);
}

// ---------------------------------------------------------------------------
// Spectrum

/// RMS bandwidth B2 (Hz) of the SRRC pulse: B2^2 = int f^2 |Q|^2 df / int |Q|^2 df,
/// with |Q(f)|^2 the raised-cosine spectrum. Evaluated by adaptive quadrature.
inline double rms_bandwidth(const PulseConfig& cfg) {
    cfg.validate();
    const double b = cfg.rolloff;
    // normalized frequency nu = f T_c
    const double nu1 = 0.5 * (1.0 - b);
    const double nu2 = 0.5 * (1.0 + b);
    auto spectrum = [b, nu1](double nu) {
        const double a = std::abs(nu);
        if (a <= nu1) return 1.0;
        return 0.5 * (1.0 + std::cos(kPi / b * (a - nu1)));
    };
    using boost::math::quadrature::gauss_kronrod;
    double m0 = nu1;
    double m2 = nu1 * nu1 * nu1 / 3.0;
    m0 += gauss_kronrod<double, 61>::integrate(spectrum, nu1, nu2, 15, 1e-14);
    m2 += gauss_kronrod<double, 61>::integrate([&](double nu) { return nu * nu * spectrum(nu); }, nu1, nu2, 15, 1e-14);
    return std::sqrt(m2 / m0) / cfg.symbol_period;
}

} // namespace lhbs
