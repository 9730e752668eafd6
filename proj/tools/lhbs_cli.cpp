// lhbs: run single localization trials, Monte Carlo sweeps and CRLB tables.
//
// Exit status: 0 ok, 1 trial detection failure, 2 invalid configuration or
// arguments, 3 file I/O error, 4 any other runtime error.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lhbs/lhbs.hpp"

namespace {

constexpr int kExitTrialFailed = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;
constexpr int kExitOther = 4;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

lhbs::RunConfig resolve(const CommonArgs& args) {
    lhbs::RunConfig rc = args.config_path.empty() ? lhbs::parse_config("") : lhbs::load_config(args.config_path);
    if (args.seed) rc.master_seed = *args.seed;
    return rc;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// The manifest is itself a config file: comments carry the provenance and
// the body replays the run.
std::string manifest_text(const lhbs::RunConfig& rc) {
    std::string s = "# lhbs " + std::string(lhbs::kVersion) + "\n";
    s += "# created " + utc_timestamp() + "\n";
    s += lhbs::to_config_text(rc);
    return s;
}

void write_file(const std::string& path, const std::string& text, bool append = false) {
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw lhbs::IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw lhbs::IoError("failed writing '" + path + "'");
}

void write_with_manifest(const std::string& path, const std::string& text, const lhbs::RunConfig& rc) {
    write_file(path, text);
    write_file(path + ".manifest", manifest_text(rc));
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// ---------------------------------------------------------------------------

int cmd_trial(const CommonArgs& args) {
    const lhbs::RunConfig rc = resolve(args);
    const lhbs::TrialContext ctx(rc.scenario(), rc.protocol);
    const lhbs::TrialResult t = lhbs::run_trial(ctx, rc.master_seed);

    const auto& truth = t.truth;
    std::cout << "seed           " << rc.master_seed << '\n'
              << "snr            " << fmt(rc.protocol.snr_db) << " dB (noise variance "
              << fmt(ctx.noise_variance()) << ")\n"
              << "clock offset   " << fmt(t.clock_offset) << " rad\n";
    if (t.failed) {
        std::cout << "FAILED         " << t.failure_reason << '\n';
    } else {
        std::cout << "phase 1  HRIS AoA       " << fmt(t.phi_hat_hris, "%.9f") << " rad  (true "
                  << fmt(truth.phi_HU, "%.9f") << ")\n"
                  << "phase 3  ToA burst 1    " << fmt(t.toa_first.t_rx, "%.12e") << " s  lag "
                  << t.toa_first.lag << " frac " << fmt(t.toa_first.fraction) << '\n'
                  << "         ToA burst 2    " << fmt(t.toa_second.t_rx, "%.12e") << " s  lag "
                  << t.toa_second.lag << " frac " << fmt(t.toa_second.fraction) << '\n'
                  << "         combiner z     " << fmt(std::abs(t.z)) << " at " << fmt(std::arg(t.z)) << " rad\n"
                  << "phi  estimate " << fmt(t.phi_demod, "%.9f") << " rad  true " << fmt(truth.phi_HU, "%.9f")
                  << "  error " << fmt(t.aoa_error()) << '\n'
                  << "r    estimate " << fmt(t.r_hat, "%.6f") << " m  true " << fmt(truth.r_HU, "%.6f")
                  << "  error " << fmt(t.range_error()) << '\n'
                  << "p    estimate (" << fmt(t.p_hat.x(), "%.6f") << ", " << fmt(t.p_hat.y(), "%.6f")
                  << ") m  true (" << fmt(rc.ue.x(), "%.6f") << ", " << fmt(rc.ue.y(), "%.6f") << ")  error "
                  << fmt((t.p_hat - rc.ue).norm()) << " m\n";
    }

    nlohmann::json rec;
    rec["seed"] = rc.master_seed;
    rec["failed"] = t.failed;
    if (t.failed) rec["failure_reason"] = t.failure_reason;
    rec["clock_offset_rad"] = t.clock_offset;
    rec["truth"] = {{"phi_rad", truth.phi_HU}, {"r_m", truth.r_HU}, {"p_m", {rc.ue.x(), rc.ue.y()}}};
    if (!t.failed) {
        rec["estimate"] = {{"phi_hris_rad", t.phi_hat_hris},
                           {"phi_rad", t.phi_demod},
                           {"r_m", t.r_hat},
                           {"p_m", {t.p_hat.x(), t.p_hat.y()}}};
        rec["error"] = {{"phi_rad", t.aoa_error()}, {"r_m", t.range_error()}, {"p_m", (t.p_hat - rc.ue).norm()}};
        rec["toa"] = {{"t_rx_s", {t.toa_first.t_rx, t.toa_second.t_rx}},
                      {"lag", {t.toa_first.lag, t.toa_second.lag}}};
    }
    rec["manifest"] = {{"version", lhbs::kVersion}, {"created", utc_timestamp()}, {"config", lhbs::to_config_text(rc)}};
    const std::string line = rec.dump() + "\n";
    if (args.out.empty())
        std::cout << line;
    else
        write_file(args.out, line, true);
    return t.failed ? kExitTrialFailed : 0;
}

// ---------------------------------------------------------------------------

std::string sweep_csv(const lhbs::RunConfig& rc) {
    const lhbs::SweepResult res = lhbs::run_sweep(rc.sweep_spec());
    std::ostringstream os;
    lhbs::write_sweep_csv(os, res);
    return os.str();
}

std::string strip_csv(std::string s) {
    if (s.size() > 4 && s.compare(s.size() - 4, 4, ".csv") == 0) s.resize(s.size() - 4);
    return s;
}

int cmd_sweep(const CommonArgs& args, std::optional<int> trials, const std::string& preset, const std::string& plot) {
    lhbs::RunConfig rc = resolve(args);
    if (trials) rc.trials_per_point = *trials;

    if (!preset.empty()) {
        // pilot lengths 100 and 150 over the shared grid; one CSV per series
        const std::string stem = strip_csv(args.out.empty() ? preset : args.out);
        std::vector<std::string> files;
        for (int n : {100, 150}) {
            lhbs::RunConfig series = rc;
            series.protocol.pilot_length = n;
            series.validate();
            const std::string path = stem + "_N" + std::to_string(n) + ".csv";
            const std::string csv = sweep_csv(series);
            write_with_manifest(path, csv, series);
            std::cout << "# N=" << n << " -> " << path << '\n' << csv;
            files.push_back(path);
        }
        write_file(plot.empty() ? stem + ".gp" : plot, lhbs::plot_script(files));
        return 0;
    }

    rc.validate();
    const std::string csv = sweep_csv(rc);
    if (args.out.empty()) {
        std::cout << csv;
    } else {
        write_with_manifest(args.out, csv, rc);
        std::cout << csv;
    }
    if (!plot.empty()) write_file(plot, lhbs::plot_script({args.out.empty() ? "sweep.csv" : args.out}));
    return 0;
}

// ---------------------------------------------------------------------------

inline constexpr const char* kCrlbCsvHeader = "snr_db,sqrt_crlb_r,sqrt_crlb_phi,sqrt_crlb_pos,alpha,status";

int cmd_crlb(const CommonArgs& args, bool zero_alpha) {
    const lhbs::RunConfig rc = resolve(args);
    std::ostringstream os;
    os << kCrlbCsvHeader << '\n';
    for (double snr : rc.snr_grid_db) {
        lhbs::ProtocolConfig cfg = rc.protocol;
        cfg.snr_db = snr;
        const lhbs::TrialContext ctx(rc.scenario(), cfg);
        const lhbs::CrlbReport rep = lhbs::crlb_report(ctx, snr, lhbs::CrlbOptions{zero_alpha});
        os << fmt(snr, "%.17g") << ',' << fmt(std::sqrt(rep.crlb_r), "%.17g") << ','
           << fmt(std::sqrt(rep.crlb_phi), "%.17g") << ',' << fmt(std::sqrt(rep.crlb_pos), "%.17g") << ','
           << fmt(rep.alpha, "%.17g") << ',' << (rep.singular ? "singular_fim" : "ok") << '\n';
    }
    std::cout << os.str();
    if (!args.out.empty()) write_with_manifest(args.out, os.str(), rc);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LHBS localization simulator: single trials, Monte Carlo sweeps, CRLB tables"};
    app.set_version_flag("--version", std::string(lhbs::kVersion));
    app.require_subcommand(1);

    CommonArgs trial_args;
    CommonArgs sweep_args;
    CommonArgs crlb_args;
    auto add_common = [](CLI::App* sub, CommonArgs& a) {
        sub->add_option("-c,--config", a.config_path, "key = value config file (defaults when omitted)");
        sub->add_option("--seed", a.seed, "master seed (overrides master_seed)");
    };

    CLI::App* trial = app.add_subcommand("trial", "one protocol run with per-phase diagnostics");
    add_common(trial, trial_args);
    trial->add_option("-o,--out", trial_args.out, "append the JSON record to this file (default: stdout)");

    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo RMSE and CRLB over the SNR grid");
    add_common(sweep, sweep_args);
    sweep->add_option("-o,--out", sweep_args.out, "CSV path (a .manifest file is written next to it)");
    std::optional<int> trials;
    sweep->add_option("--trials", trials, "override trials_per_point");
    std::string plot;
    sweep->add_option("--plot", plot, "also write a gnuplot script to this path");
    std::string preset;
    auto* f3 = sweep->add_flag_callback("--paper-fig3", [&] { preset = "fig3"; }, "range RMSE series, N = 100 and 150");
    auto* f4 = sweep->add_flag_callback("--paper-fig4", [&] { preset = "fig4"; }, "AoA RMSE series, N = 100 and 150");
    auto* f5 = sweep->add_flag_callback("--paper-fig5", [&] { preset = "fig5"; },
                                        "position RMSE series, N = 100 and 150");
    f3->excludes(f4)->excludes(f5);
    f4->excludes(f5);

    CLI::App* crlb = app.add_subcommand("crlb", "square-root CRLBs over the SNR grid (no Monte Carlo)");
    add_common(crlb, crlb_args);
    crlb->add_option("-o,--out", crlb_args.out, "CSV path (a .manifest file is written next to it)");
    bool zero_alpha = false;
    crlb->add_flag("--zero-alpha", zero_alpha, "drop the AoA/range cross term of the Fisher matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*trial) return cmd_trial(trial_args);
        if (*sweep) return cmd_sweep(sweep_args, trials, preset, plot);
        if (*crlb) return cmd_crlb(crlb_args, zero_alpha);
    } catch (const lhbs::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
    return 0;
}
