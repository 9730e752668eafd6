#pragma once

// Flat key = value run configuration. '#' starts a comment; blank lines are
// ignored; keys carry their unit. Every key has a default, and
// to_config_text() materializes all of them so a written file replays the run.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lhbs/errors.hpp"
#include "lhbs/harness.hpp"
#include "lhbs/protocol.hpp"

namespace lhbs {

struct RunConfig {
    ProtocolConfig protocol;
    Point2 hris{0.0, 100.0};
    Point2 ue{86.60254037844386, 50.0}; // 100 m from the HRIS at phi_HU = 30 deg
    std::vector<double> snr_grid_db = default_snr_grid();
    int trials_per_point = 500;
    std::uint64_t master_seed = 1;

    Scenario scenario() const { return Scenario(hris, ue); }

    SweepSpec sweep_spec() const {
        SweepSpec s{snr_grid_db, trials_per_point, protocol, scenario(), master_seed, 0};
        return s;
    }

    void validate() const {
        const Scenario s = scenario();
        protocol.validate(s);
        sweep_spec().validate();
    }
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, std::string_view v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw FieldError(key, "expected a number, got '" + std::string(v) + "'");
    return out;
}

inline long long parse_int(const std::string& key, std::string_view v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw FieldError(key, "expected an integer, got '" + std::string(v) + "'");
    return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw FieldError(key, "expected true/false, got '" + std::string(v) + "'");
}

/// "a,b,c" or "start:step:stop" (inclusive).
inline std::vector<double> parse_grid(const std::string& key, std::string_view v) {
    std::vector<double> out;
    if (v.find(':') != std::string_view::npos) {
        const auto c1 = v.find(':');
        const auto c2 = v.find(':', c1 + 1);
        if (c2 == std::string_view::npos) throw FieldError(key, "range must be start:step:stop");
        const double start = parse_double(key, trim(v.substr(0, c1)));
        const double step = parse_double(key, trim(v.substr(c1 + 1, c2 - c1 - 1)));
        const double stop = parse_double(key, trim(v.substr(c2 + 1)));
        if (!(step > 0.0) || stop < start) throw FieldError(key, "range needs step > 0 and stop >= start");
        const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (long long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
        return out;
    }
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const auto comma = v.find(',', pos);
        const auto item = trim(v.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (item.empty()) throw FieldError(key, "empty list entry");
        out.push_back(parse_double(key, item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Applies one key/value pair; throws FieldError naming the key.
inline void apply_config_value(RunConfig& rc, const std::string& key, std::string_view v) {
    using namespace detail;
    ProtocolConfig& p = rc.protocol;
    if (key == "carrier_hz") p.carrier_hz = parse_double(key, v);
    else if (key == "bandwidth_hz") p.bandwidth_hz = parse_double(key, v);
    else if (key == "rolloff") p.rolloff = parse_double(key, v);
    else if (key == "oversampling") p.oversampling = static_cast<int>(parse_int(key, v));
    else if (key == "pulse_span_symbols") p.pulse_span = static_cast<int>(parse_int(key, v));
    else if (key == "pilot_length") p.pilot_length = static_cast<int>(parse_int(key, v));
    else if (key == "turnaround_s") p.turnaround_s = parse_double(key, v);
    else if (key == "clock_offset_rad") {
        if (v == "random") p.clock_offset_rad.reset();
        else p.clock_offset_rad = parse_double(key, v);
    } else if (key == "snr_db") p.snr_db = parse_double(key, v);
    else if (key == "phase1_snr_db") {
        if (v == "none") p.phase1_snr_db.reset();
        else p.phase1_snr_db = parse_double(key, v);
    } else if (key == "hris_aoa_mode") {
        if (v == "perfect") p.hris_aoa_mode = HrisAoaMode::perfect;
        else if (v == "music") p.hris_aoa_mode = HrisAoaMode::music;
        else throw FieldError(key, "expected perfect or music");
    } else if (key == "interpolation") p.interpolation = parse_bool(key, v);
    else if (key == "bs_elements") p.bs_elements = static_cast<int>(parse_int(key, v));
    else if (key == "hris_elements") p.hris_elements = static_cast<int>(parse_int(key, v));
    else if (key == "element_spacing_wavelengths") p.element_spacing_wavelengths = parse_double(key, v);
    else if (key == "max_range_m") p.max_range_m = parse_double(key, v);
    else if (key == "music_grid_step_rad") p.music_grid_step_rad = parse_double(key, v);
    else if (key == "synthesis") {
        if (v == "analytic") p.synthesis = SynthesisMode::analytic;
        else if (v == "convolution") p.synthesis = SynthesisMode::convolution;
        else throw FieldError(key, "expected analytic or convolution");
    } else if (key == "detection_threshold_db") p.detection_threshold_db = parse_double(key, v);
    else if (key == "hris_x_m") rc.hris.x() = parse_double(key, v);
    else if (key == "hris_y_m") rc.hris.y() = parse_double(key, v);
    else if (key == "ue_x_m") rc.ue.x() = parse_double(key, v);
    else if (key == "ue_y_m") rc.ue.y() = parse_double(key, v);
    else if (key == "snr_grid_db") rc.snr_grid_db = parse_grid(key, v);
    else if (key == "trials_per_point") rc.trials_per_point = static_cast<int>(parse_int(key, v));
    else if (key == "master_seed") rc.master_seed = static_cast<std::uint64_t>(parse_int(key, v));
    else throw FieldError(key, "unknown key");
}

/// Parses config text on top of the defaults and validates the result.
inline RunConfig parse_config(std::string_view text) {
    RunConfig rc;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        apply_config_value(rc, key, value);
    }
    rc.validate();
    return rc;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Serializes every key; parse_config(to_config_text(rc)) reproduces rc.
inline std::string to_config_text(const RunConfig& rc) {
    using detail::num;
    const ProtocolConfig& p = rc.protocol;
    std::ostringstream os;
    os << "carrier_hz = " << num(p.carrier_hz) << '\n'
       << "bandwidth_hz = " << num(p.bandwidth_hz) << '\n'
       << "rolloff = " << num(p.rolloff) << '\n'
       << "oversampling = " << p.oversampling << '\n'
       << "pulse_span_symbols = " << p.pulse_span << '\n'
       << "pilot_length = " << p.pilot_length << '\n'
       << "turnaround_s = " << num(p.turnaround_s) << '\n'
       << "clock_offset_rad = " << (p.clock_offset_rad ? num(*p.clock_offset_rad) : "random") << '\n'
       << "snr_db = " << num(p.snr_db) << '\n'
       << "phase1_snr_db = " << (p.phase1_snr_db ? num(*p.phase1_snr_db) : "none") << '\n'
       << "hris_aoa_mode = " << (p.hris_aoa_mode == HrisAoaMode::music ? "music" : "perfect") << '\n'
       << "interpolation = " << (p.interpolation ? "true" : "false") << '\n'
       << "bs_elements = " << p.bs_elements << '\n'
       << "hris_elements = " << p.hris_elements << '\n'
       << "element_spacing_wavelengths = " << num(p.element_spacing_wavelengths) << '\n'
       << "max_range_m = " << num(p.max_range_m) << '\n'
       << "music_grid_step_rad = " << num(p.music_grid_step_rad) << '\n'
       << "synthesis = " << (p.synthesis == SynthesisMode::convolution ? "convolution" : "analytic") << '\n'
       << "detection_threshold_db = " << num(p.detection_threshold_db) << '\n'
       << "hris_x_m = " << num(rc.hris.x()) << '\n'
       << "hris_y_m = " << num(rc.hris.y()) << '\n'
       << "ue_x_m = " << num(rc.ue.x()) << '\n'
       << "ue_y_m = " << num(rc.ue.y()) << '\n';
    os << "snr_grid_db = ";
    for (std::size_t i = 0; i < rc.snr_grid_db.size(); ++i) os << (i ? "," : "") << num(rc.snr_grid_db[i]);
    os << '\n'
       << "trials_per_point = " << rc.trials_per_point << '\n'
       << "master_seed = " << rc.master_seed << '\n';
    return os.str();
}

} // namespace lhbs
