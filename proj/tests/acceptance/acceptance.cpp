// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lhbs/lhbs.hpp"

using namespace lhbs;

namespace {

// ---- pinned tolerances -----------------------------------------------------
constexpr double kNoiselessPosTol = 0.01;        // m
constexpr double kNoiselessAoaTol = 1e-6;        // rad
constexpr double kNoiselessRuntime = 1.0;        // s
constexpr int kTrials = 500;                     // per SNR point
constexpr double kZ95 = 1.96;                    // two-sided 95 % normal quantile
constexpr double kCloseToBound = 2.0;            // RMSE / sqrt(CRLB) near the floor
constexpr double kFloorOnset = 0.5;              // floor reached once sqrt(CRLB_r) < kFloorOnset * floor
constexpr double kSweepRuntime = 600.0;          // s
constexpr double kAnchorSnr = 20.0;              // dB, "high SNR" for the magnitude anchors
constexpr double kRangeBand[2] = {0.1, 1.0};     // m, tens of centimetres
constexpr double kPosBand[2] = {1.0, 10.0};      // m, single-digit metres
constexpr double kSaturation = 0.8;              // RMSE(30 dB) / RMSE(25 dB) above this = saturated
constexpr double kTimestampRounding = 1e-9;     // m, absolute-time rounding at a 1 ms turnaround is ~1e-10 m
constexpr double kAlphaRel = 1e-3;
constexpr double kSlopeRel = 1e-4;
constexpr double kSlopeFloor = 1e-7;             // absolute floor, units of 1 / T_c
constexpr double kIdentityRel = 1e-9;
constexpr double kB2Rel = 1e-6;
constexpr std::uint64_t kSeed = 20240601;

const Point2 kHris(0.0, 100.0);
const Point2 kUe(86.60254037844386, 50.0);

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SweepSpec paper_sweep(int pilot_length, int oversampling, std::vector<double> grid) {
    SweepSpec s;
    s.snr_grid_db = std::move(grid);
    s.trials_per_point = kTrials;
    s.cfg.pilot_length = pilot_length;
    s.cfg.oversampling = oversampling;
    s.cfg.interpolation = false;
    s.scenario = Scenario(kHris, kUe);
    s.master_seed = kSeed;
    return s;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream os;
    write_sweep_csv(os, r);
    return os.str();
}

// Shared sweeps (computed once).
struct Sweeps {
    SweepResult n100;
    double n100_seconds = 0.0;
    SweepResult n150;
    // informational: the same pair with sub-sample interpolation
    SweepResult n100_interp;
    SweepResult n150_interp;
};

Sweeps& sweeps() {
    static Sweeps s = [] {
        Sweeps out;
        const auto t0 = std::chrono::steady_clock::now();
        out.n100 = run_sweep(paper_sweep(100, 10, default_snr_grid()));
        out.n100_seconds = seconds_since(t0);
        out.n150 = run_sweep(paper_sweep(150, 10, default_snr_grid()));
        SweepSpec a = paper_sweep(100, 10, default_snr_grid());
        SweepSpec b = paper_sweep(150, 10, default_snr_grid());
        a.cfg.interpolation = b.cfg.interpolation = true;
        out.n100_interp = run_sweep(a);
        out.n150_interp = run_sweep(b);
        return out;
    }();
    return s;
}

const SweepPoint& point_at(const SweepResult& r, double snr) {
    for (const SweepPoint& p : r.points)
        if (p.snr_db == snr) return p;
    throw std::runtime_error("SNR point not on grid");
}

// ---- 1 ---------------------------------------------------------------------
Outcome noiseless_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    ProtocolConfig cfg;
    cfg.snr_db = INFINITY;
    cfg.interpolation = true;
    const TrialResult t = run_trial(Scenario(kHris, kUe), cfg, kSeed);
    const double secs = seconds_since(t0);
    Outcome o;
    const double pos = (t.p_hat - kUe).norm();
    o.pass = !t.failed && pos < kNoiselessPosTol && std::abs(t.aoa_error()) < kNoiselessAoaTol
          && secs < kNoiselessRuntime;
    o.detail = "position error " + fmt("%.3g m", pos) + ", AoA error " + fmt("%.3g rad", std::abs(t.aoa_error()))
             + ", " + fmt("%.3f s", secs);
    return o;
}

// ---- 2 ---------------------------------------------------------------------
Outcome crlb_ordering() {
    const Sweeps& s = sweeps();
    const auto& pts = s.n100.points;
    Outcome o;
    int failures = 0;
    for (const SweepPoint& p : pts) {
        failures += p.failures;
        const double cr = p.sqrt_crlb_range * p.sqrt_crlb_range;
        const double ca = p.sqrt_crlb_aoa * p.sqrt_crlb_aoa;
        const bool ok_r = p.rmse_range * p.rmse_range + kZ95 * p.se_mse_range >= cr;
        const bool ok_a = p.rmse_aoa * p.rmse_aoa + kZ95 * p.se_mse_aoa >= ca;
        if (!ok_r || !ok_a) {
            o.pass = false;
            o.detail += fmt("below bound at %g dB; ", p.snr_db);
        }
    }
    // last three points before the quantization floor sets in
    const double floor = pts.back().rmse_range;
    std::size_t onset = pts.size();
    for (std::size_t k = 0; k < pts.size(); ++k)
        if (pts[k].sqrt_crlb_range < kFloorOnset * floor) {
            onset = k;
            break;
        }
    if (onset < 3) {
        o.pass = false;
        o.detail += "floor reached before three grid points; ";
    } else {
        o.detail += "near-bound points";
        for (std::size_t k = onset - 3; k < onset; ++k) {
            const double ratio = pts[k].rmse_range / pts[k].sqrt_crlb_range;
            o.detail += fmt(" %g dB", pts[k].snr_db) + fmt(" x%.2f", ratio);
            if (ratio > kCloseToBound) o.pass = false;
        }
    }
    o.pass = o.pass && s.n100_seconds < kSweepRuntime;
    o.detail += fmt(", failures %g", failures) + fmt(", sweep %.1f s", s.n100_seconds);
    return o;
}

// ---- 3 ---------------------------------------------------------------------
Outcome magnitude_anchors() {
    const SweepPoint& p = point_at(sweeps().n100, kAnchorSnr);
    Outcome o;
    o.pass = p.rmse_range >= kRangeBand[0] && p.rmse_range < kRangeBand[1] && p.rmse_pos >= kPosBand[0]
          && p.rmse_pos < kPosBand[1];
    o.detail = fmt("at %g dB", kAnchorSnr) + fmt(": range RMSE %.3f m", p.rmse_range)
             + fmt(", position RMSE %.3f m", p.rmse_pos);
    return o;
}

// ---- 4 ---------------------------------------------------------------------
int count_at_or_below(const SweepResult& shorter, const SweepResult& longer, std::string* above) {
    int ok = 0;
    for (std::size_t k = 0; k < shorter.points.size(); ++k) {
        const SweepPoint& a = shorter.points[k];
        const SweepPoint& b = longer.points[k];
        const double mse_a = a.rmse_range * a.rmse_range;
        const double mse_b = b.rmse_range * b.rmse_range;
        const double ci = kZ95 * std::sqrt(a.se_mse_range * a.se_mse_range + b.se_mse_range * b.se_mse_range);
        if (mse_b <= mse_a + ci || b.rmse_range <= a.rmse_range + kTimestampRounding)
            ++ok;
        else if (above)
            *above += fmt(" %g", a.snr_db);
    }
    return ok;
}

Outcome sequence_length() {
    const Sweeps& s = sweeps();
    Outcome o;
    const auto n = static_cast<int>(s.n100.points.size());
    std::string above;
    const int ok = count_at_or_below(s.n100, s.n150, &above);
    o.pass = ok == n;
    o.detail = fmt("N=150 at or below N=100 within CI at %g", ok) + fmt(" of %g points", n);
    if (!above.empty()) o.detail += ", above at" + above + " dB";
    o.detail += fmt("; with interpolation %g", count_at_or_below(s.n100_interp, s.n150_interp, nullptr))
              + fmt(" of %g (informational)", n);
    return o;
}

// ---- 5 ---------------------------------------------------------------------
Outcome quantization_floor() {
    const SweepResult uf10 = run_sweep(paper_sweep(100, 10, {25.0, 30.0}));
    const SweepResult uf20 = run_sweep(paper_sweep(100, 20, {25.0, 30.0}));
    const SweepPoint& f10 = uf10.points[1];
    const SweepPoint& f20 = uf20.points[1];
    const double saturation = f10.rmse_range / uf10.points[0].rmse_range;
    const double bound_drop = f10.sqrt_crlb_range / uf10.points[0].sqrt_crlb_range;
    const double ci = kZ95 * std::sqrt(f10.se_mse_range * f10.se_mse_range + f20.se_mse_range * f20.se_mse_range);
    Outcome o;
    o.pass = f20.rmse_range * f20.rmse_range + ci < f10.rmse_range * f10.rmse_range && saturation > kSaturation;
    o.detail = fmt("floor u_f=10 %.3f m", f10.rmse_range) + fmt(", u_f=20 %.3f m", f20.rmse_range)
             + fmt("; 25->30 dB RMSE ratio %.2f", saturation) + fmt(" (bound ratio %.2f)", bound_drop);
    return o;
}

// ---- 6 ---------------------------------------------------------------------
long double rc_reference(long double x, long double beta) {
    const long double pi = std::numbers::pi_v<long double>;
    const long double s = x == 0.0L ? 1.0L : std::sin(pi * x) / (pi * x);
    const long double den = 1.0L - 4.0L * beta * beta * x * x;
    if (std::abs(den) < 1e-15L) return pi / 4.0L * std::sin(pi / (2.0L * beta)) / (pi / (2.0L * beta));
    return s * std::cos(pi * beta * x) / den;
}

Outcome appendix_checks() {
    Outcome o;
    // fim_alpha against a finite-difference derivative of the mean signal
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ProtocolConfig cfg;
    double worst_alpha = 0.0;
    for (int k = 0; k < 20; ++k) {
        const Point2 p = position_from_polar(kHris, -1.3 + 2.6 * u(rng), 20.0 + 250.0 * u(rng));
        const TrialContext ctx(Scenario(kHris, p), cfg);
        const cplx gain = ctx.burst_gains(ctx.truth().phi_HU, kTwoPi * u(rng)).first;
        const double delay = u(rng) * cfg.sample_period();
        const auto& x = ctx.pilot();
        const PulseConfig& pc = ctx.pulse();
        const double var = cfg.oversampling * snr_to_noise_variance(10.0, ctx.scenario(), cfg);
        const CVector s = mean_signal(x, pc, gain, delay);
        const double alpha = fim_alpha(s, mean_signal_range_derivative(x, pc, gain, delay), var);
        const double dr = 0.01 * cfg.sample_period() * kSpeedOfLight / 2.0;
        auto at = [&](double m) { return mean_signal(x, pc, gain, delay + m * 2.0 * dr / kSpeedOfLight); };
        const CVector fd = (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * dr);
        const double oracle = -(2.0 / var) * s.dot(fd).imag();
        worst_alpha = std::max(worst_alpha, std::abs(alpha - oracle) / std::abs(oracle));
    }
    // raised-cosine slope against a 5-point difference of the textbook formula
    double worst_slope = 0.0;
    for (double beta : {0.25, 0.8, 1.0}) {
        PulseConfig pc;
        pc.rolloff = beta;
        std::vector<double> xs;
        for (double x = -16.0; x <= 16.0; x += 0.00731) xs.push_back(x);
        for (double c : {0.0, 1.0 / (2.0 * beta), -1.0 / (2.0 * beta)})
            for (double d : {0.0, 1e-12, -1e-12, 1e-9, -1e-9, 1e-6, -1e-6, 1e-3, -1e-3}) xs.push_back(c + d);
        for (double x : xs) {
            const long double h = 1e-3L;
            const double fd = static_cast<double>((-rc_reference(x + 2 * h, beta) + 8 * rc_reference(x + h, beta)
                                                   - 8 * rc_reference(x - h, beta) + rc_reference(x - 2 * h, beta))
                                                  / (12 * h));
            const double got = raised_cosine_derivative(x * pc.symbol_period, pc) * pc.symbol_period;
            worst_slope = std::max(worst_slope, std::abs(got - fd) / (std::abs(fd) + kSlopeFloor / kSlopeRel));
        }
    }
    o.pass = worst_alpha < kAlphaRel && worst_slope < kSlopeRel;
    o.detail = fmt("alpha worst rel. error %.2e", worst_alpha) + fmt(", slope worst rel. error %.2e", worst_slope);
    return o;
}

// ---- 7 ---------------------------------------------------------------------
Outcome analytic_identities() {
    Outcome o;
    double worst_cazac = 0.0;
    for (int n : {100, 150}) {
        const auto x = cazac(n);
        for (int k = 1; k < n; ++k) {
            cplx acc{};
            for (int i = 0; i < n; ++i)
                acc += x[static_cast<std::size_t>(i)] * std::conj(x[static_cast<std::size_t>((i + k) % n)]);
            worst_cazac = std::max(worst_cazac, std::abs(acc) / n);
        }
    }
    const double lambda = kSpeedOfLight / 25e9;
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    double worst_norm = 0.0;
    double worst_cascade = 0.0;
    const ArrayConfig bs = ArrayConfig::half_wavelength(16, lambda);
    const ArrayConfig hris = ArrayConfig::half_wavelength(64, lambda);
    for (int k = 0; k < 100; ++k) {
        const double theta = u(rng);
        const double phi = u(rng);
        const double phi_bh = u(rng);
        worst_norm = std::max(worst_norm, std::abs(steering_vector(hris, theta).squaredNorm() - 64.0) / 64.0);
        const ChannelCoeff xi = channel_coeff(100.0, lambda, u(rng));
        const CMatrix h = bs_hris_channel(bs, hris, xi, theta, phi_bh);
        const CVector b = bs_beamformer(bs, phi_bh);
        const ChannelCoeff unit{cplx(1.0, 0.0)};
        const cplx g2 = cascade_gain(h, b, hris_profile_tx2(hris, phi, theta), hris, unit, phi);
        const cplx g1 = cascade_gain(h, b, hris_profile_tx1(hris, phi, theta), hris, unit, phi);
        const cplx want = 64.0 * xi.xi;
        worst_cascade = std::max({worst_cascade, std::abs(g2 - want) / std::abs(want),
                                  std::abs(g1 - want * std::polar(1.0, phi)) / std::abs(want)});
    }
    double worst_b2 = 0.0;
    for (double beta : {0.1, 0.5, 0.8, 1.0}) {
        PulseConfig pc;
        pc.rolloff = beta;
        const double t = pc.symbol_period;
        const double closed = (1.0 / 12.0 + beta * beta * (0.25 - 2.0 / (kPi * kPi))) / (t * t);
        const double b2 = rms_bandwidth(pc);
        worst_b2 = std::max(worst_b2, std::abs(b2 * b2 - closed) / closed);
    }
    o.pass = worst_cazac < kIdentityRel && worst_norm < kIdentityRel && worst_cascade < kIdentityRel
          && worst_b2 < kB2Rel;
    o.detail = fmt("CAZAC sidelobe %.1e", worst_cazac) + fmt(", steering norm %.1e", worst_norm)
             + fmt(", cascade gain %.1e", worst_cascade) + fmt(", B2^2 %.1e", worst_b2);
    return o;
}

// ---- 8 ---------------------------------------------------------------------
Outcome clock_offset_immunity() {
    Outcome o;
    double max_dr = 0.0;
    double max_dp = 0.0;
    for (bool interp : {false, true}) {
        ProtocolConfig cfg;
        cfg.snr_db = INFINITY;
        cfg.interpolation = interp;
        const TrialContext base(Scenario(kHris, kUe), cfg);
        std::vector<TrialResult> runs;
        for (double eps : {0.0, kPi / 3.0, 1.7 * kPi}) {
            cfg.clock_offset_rad = eps;
            runs.push_back(run_trial(Scenario(kHris, kUe), cfg, kSeed));
        }
        for (const TrialResult& t : runs) {
            if (t.failed || t.r_hat != runs.front().r_hat || t.p_hat != runs.front().p_hat) o.pass = false;
            max_dr = std::max(max_dr, std::abs(t.r_hat - runs.front().r_hat));
            max_dp = std::max(max_dp, (t.p_hat - runs.front().p_hat).norm());
        }
    }
    o.detail = fmt("max range deviation %.3g m", max_dr) + fmt(", max position deviation %.3g m", max_dp)
             + " (bitwise required)";
    return o;
}

// ---- 9 ---------------------------------------------------------------------
Outcome determinism() {
    SweepSpec s = paper_sweep(100, 10, default_snr_grid());
    s.trials_per_point = 40;
    s.workers = 1;
    const std::string a = csv_of(run_sweep(s));
    s.workers = 4;
    const std::string b = csv_of(run_sweep(s));
    const std::string c = csv_of(run_sweep(s));
    Outcome o;
    o.pass = a == b && b == c;
    o.detail = o.pass ? "three sweeps (1 and 4 workers) byte-identical" : "sweep CSVs differ";
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "noiseless end-to-end oracle", noiseless_oracle},
        {2, "RMSE vs CRLB ordering", crlb_ordering},
        {3, "magnitude anchors", magnitude_anchors},
        {4, "sequence-length ordering", sequence_length},
        {5, "quantization floor", quantization_floor},
        {6, "alpha and pulse-slope oracles", appendix_checks},
        {7, "analytic identities", analytic_identities},
        {8, "clock-offset immunity", clock_offset_immunity},
        {9, "determinism", determinism},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
