#pragma once

// Monte Carlo SNR sweeps: per-point RMSE of range, demodulated AoA and
// position, with the matching CRLBs.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "lhbs/crlb.hpp"
#include "lhbs/errors.hpp"
#include "lhbs/protocol.hpp"

namespace lhbs {

struct SweepSpec {
    std::vector<double> snr_grid_db;
    int trials_per_point = 500;
    ProtocolConfig cfg;
    Scenario scenario{Point2(0.0, 100.0), Point2(86.60254037844386, 50.0)};
    std::uint64_t master_seed = 1;
    int workers = 0; // 0: LHBS_WORKERS or hardware concurrency

    void validate() const {
        if (trials_per_point < 1) throw FieldError("trials_per_point", "must be >= 1");
        if (snr_grid_db.empty()) throw FieldError("snr_grid_db", "grid is empty");
        for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
            if (!(snr_grid_db[i] > snr_grid_db[i - 1]))
                throw FieldError("snr_grid_db", "grid must be strictly increasing");
        cfg.validate(scenario);
    }
};

struct SweepPoint {
    double snr_db = 0.0;
    double rmse_range = 0.0; // m
    double rmse_aoa = 0.0;   // rad
    double rmse_pos = 0.0;   // m
    double sqrt_crlb_range = 0.0;
    double sqrt_crlb_aoa = 0.0;
    double sqrt_crlb_pos = 0.0;
    int failures = 0;
    int trials = 0;
    // standard errors of the mean squared errors (for confidence intervals)
    double se_mse_range = 0.0;
    double se_mse_aoa = 0.0;
    double se_mse_pos = 0.0;

    int successes() const { return trials - failures; }
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

/// Default grid: -10 .. 30 dB in 2.5 dB steps.
inline std::vector<double> default_snr_grid() {
    std::vector<double> g;
    for (int k = 0; k <= 16; ++k) g.push_back(-10.0 + 2.5 * k);
    return g;
}

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Per-trial seed, a pure function of (master seed, point index, trial index).
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial) {
    return mix64(mix64(mix64(master) ^ point) ^ trial);
}

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LHBS_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `count` jobs across workers; job(i) must only touch slot i.
template <class Job>
void parallel_for(int count, int workers, Job&& job) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
        });
}

namespace detail {

struct MseStat {
    double mse = 0.0;
    double se = 0.0;
};

inline MseStat mse_of(const std::vector<double>& sq) {
    MseStat st;
    if (sq.empty()) return st;
    const double n = static_cast<double>(sq.size());
    double sum = 0.0;
    for (double v : sq) sum += v;
    st.mse = sum / n;
    if (sq.size() > 1) {
        double var = 0.0;
        for (double v : sq) var += (v - st.mse) * (v - st.mse);
        st.se = std::sqrt(var / (n - 1.0) / n);
    }
    return st;
}

} // namespace detail

/// Runs one SNR point. Trials are independent; aggregation is in trial order.
inline SweepPoint run_point(const SweepSpec& spec, std::size_t point_index, int workers) {
    ProtocolConfig cfg = spec.cfg;
    cfg.snr_db = spec.snr_grid_db[point_index];
    const TrialContext ctx(spec.scenario, cfg);

    std::vector<TrialResult> results(static_cast<std::size_t>(spec.trials_per_point));
    parallel_for(spec.trials_per_point, workers, [&](int t) {
        results[static_cast<std::size_t>(t)] = run_trial(ctx, trial_seed(spec.master_seed, point_index,
                                                                           static_cast<std::uint64_t>(t)));
    });

    SweepPoint pt;
    pt.snr_db = cfg.snr_db;
    pt.trials = spec.trials_per_point;
    std::vector<double> e_r, e_phi, e_pos;
    const Point2& p = spec.scenario.ue();
    for (const TrialResult& tr : results) {
        if (tr.failed) {
            ++pt.failures;
            continue;
        }
        e_r.push_back(tr.range_error() * tr.range_error());
        e_phi.push_back(tr.aoa_error() * tr.aoa_error());
        e_pos.push_back((tr.p_hat - p).squaredNorm());
    }
    const auto sr = detail::mse_of(e_r);
    const auto sphi = detail::mse_of(e_phi);
    const auto spos = detail::mse_of(e_pos);
    pt.rmse_range = std::sqrt(sr.mse);
    pt.rmse_aoa = std::sqrt(sphi.mse);
    pt.rmse_pos = std::sqrt(spos.mse);
    pt.se_mse_range = sr.se;
    pt.se_mse_aoa = sphi.se;
    pt.se_mse_pos = spos.se;

    const CrlbReport rep = crlb_report(ctx, cfg.snr_db);
    pt.sqrt_crlb_range = std::sqrt(rep.crlb_r);
    pt.sqrt_crlb_aoa = std::sqrt(rep.crlb_phi);
    pt.sqrt_crlb_pos = std::sqrt(rep.crlb_pos);
    return pt;
}

inline SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    const int workers = resolve_workers(spec.workers);
    SweepResult res;
    res.points.reserve(spec.snr_grid_db.size());
    for (std::size_t k = 0; k < spec.snr_grid_db.size(); ++k) res.points.push_back(run_point(spec, k, workers));
    return res;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr const char* kSweepCsvHeader =
    "snr_db,rmse_r,rmse_phi,rmse_pos,sqrt_crlb_r,sqrt_crlb_phi,sqrt_crlb_pos,failures,trials";

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// One row per SNR point, ascending SNR, fixed column order (kSweepCsvHeader).
inline void write_sweep_csv(std::ostream& os, const SweepResult& res) {
    os << kSweepCsvHeader << '\n';
    for (const SweepPoint& p : res.points) {
        os << format_number(p.snr_db) << ',' << format_number(p.rmse_range) << ',' << format_number(p.rmse_aoa)
           << ',' << format_number(p.rmse_pos) << ',' << format_number(p.sqrt_crlb_range) << ','
           << format_number(p.sqrt_crlb_aoa) << ',' << format_number(p.sqrt_crlb_pos) << ',' << p.failures << ','
           << p.trials << '\n';
    }
}

/// gnuplot script plotting a sweep CSV (RMSE and sqrt(CRLB) per quantity).
inline std::string plot_script(const std::vector<std::string>& csv_files) {
    std::string s = "set datafile separator ','\nset logscale y\nset grid\nset xlabel 'SNR [dB]'\nset key outside\n";
    const char* panels[3][3] = {{"range", "2", "5"}, {"aoa", "3", "6"}, {"position", "4", "7"}};
    for (const auto& panel : panels) {
        s += "set output '" + std::string(panel[0]) + ".png'\nset terminal pngcairo size 800,600\n";
        s += "set ylabel '" + std::string(panel[0]) + " error'\nplot ";
        for (std::size_t i = 0; i < csv_files.size(); ++i) {
            if (i) s += ", ";
            s += "'" + csv_files[i] + "' every ::1 using 1:" + panel[1] + " with linespoints title '" + csv_files[i]
               + " RMSE', '" + csv_files[i] + "' every ::1 using 1:" + panel[2] + " with lines dt 2 title '"
               + csv_files[i] + " sqrt(CRLB)'";
        }
        s += "\n";
    }
    return s;
}

} // namespace lhbs
