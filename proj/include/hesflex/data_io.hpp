#pragma once

// Time-series ingestion, synthetic data generation and trace export.
//
//   signal CSV      header `timestamp,r`        UTC epoch seconds, |r| <= 1
//   irradiance CSV  header `timestamp,ghi_wm2`  UTC epoch seconds, >= 0 W/m2
//   trace CSV       header `k,t,r,p_hes,p0,dp_req,p_pv,p_cl,p_batt,p_curtailed,soc`

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dispatch.hpp"
#include "errors.hpp"
#include "kvdoc.hpp"

namespace hes {

struct SignalGap {
    std::size_t line;         // CSV line of the sample after the gap
    std::int64_t from;        // timestamp before the gap
    std::int64_t to;          // timestamp after the gap
};

struct SignalSeries {
    std::vector<std::int64_t> timestamps;
    std::vector<double> values;
    std::int64_t cadence = 2;
    std::vector<SignalGap> gaps;  // filled by holding the previous value
};

struct IrradianceSeries {
    std::vector<std::int64_t> timestamps;
    std::vector<double> values;  // W/m2
    std::int64_t cadence = 60;
};

inline constexpr std::string_view kTraceHeader = "k,t,r,p_hes,p0,dp_req,p_pv,p_cl,p_batt,p_curtailed,soc";

namespace io_detail {

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(',', pos);
        out.push_back(trim(line.substr(pos, c == std::string_view::npos ? line.npos : c - pos)));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

struct Row {
    std::size_t line;
    std::int64_t timestamp;
    double value;
};

// Parses a two-column CSV with the given header; blank lines are skipped.
inline std::vector<Row> read_two_column(const std::string& path, std::string_view header) {
    const auto lines = read_lines(path);
    if (lines.empty() || trim(lines.front()) != header)
        throw ParseError(path, 1, "expected header '" + std::string(header) + "'");
    std::vector<Row> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (trim(lines[i]).empty()) continue;
        const auto fields = split(lines[i]);
        if (fields.size() != 2) throw ParseError(path, line_no, "expected 2 fields");
        const auto ts = parse_int(fields[0]);
        if (!ts) throw ParseError(path, line_no, "malformed timestamp '" + std::string(fields[0]) + "'");
        const auto v = parse_double(fields[1]);
        if (!v || !std::isfinite(*v))
            throw ParseError(path, line_no, "malformed value '" + std::string(fields[1]) + "'");
        if (!rows.empty() && *ts <= rows.back().timestamp)
            throw ParseError(path, line_no, "timestamps must be strictly increasing");
        rows.push_back({line_no, *ts, *v});
    }
    return rows;
}

// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double standard_normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - unit(rng);
    const double u2 = unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace io_detail

inline SignalSeries read_signal_csv(const std::string& path, std::int64_t cadence = 2) {
    if (cadence <= 0) throw InputError("signal cadence must be positive");
    const auto rows = io_detail::read_two_column(path, "timestamp,r");
    SignalSeries out;
    out.cadence = cadence;
    for (const auto& row : rows) {
        if (!(std::abs(row.value) <= 1.0))
            throw ParseError(path, row.line, "regulation value " + format_double(row.value) + " outside [-1, 1]");
        if (!out.timestamps.empty()) {
            const std::int64_t prev = out.timestamps.back();
            const std::int64_t step = row.timestamp - prev;
            if (step % cadence != 0)
                throw ParseError(path, row.line, "timestamp off the " + std::to_string(cadence) + " s cadence");
            if (step > cadence) {
                out.gaps.push_back({row.line, prev, row.timestamp});
                const double held = out.values.back();
                for (std::int64_t t = prev + cadence; t < row.timestamp; t += cadence) {
                    out.timestamps.push_back(t);
                    out.values.push_back(held);
                }
            }
        }
        out.timestamps.push_back(row.timestamp);
        out.values.push_back(row.value);
    }
    return out;
}

inline IrradianceSeries read_irradiance_csv(const std::string& path) {
    const auto rows = io_detail::read_two_column(path, "timestamp,ghi_wm2");
    IrradianceSeries out;
    std::int64_t min_step = 0;
    for (const auto& row : rows) {
        if (row.value < 0)
            throw ParseError(path, row.line, "negative irradiance " + format_double(row.value));
        if (!out.timestamps.empty()) {
            const std::int64_t step = row.timestamp - out.timestamps.back();
            min_step = min_step == 0 ? step : std::min(min_step, step);
        }
        out.timestamps.push_back(row.timestamp);
        out.values.push_back(row.value);
    }
    if (min_step > 0) out.cadence = min_step;
    return out;
}

// Zero-order hold onto a finer (or equal) cadence. The last source sample is
// held for one source cadence, so n samples at c seconds become n*c/target.
inline std::vector<double> resample_hold(std::span<const std::int64_t> timestamps,
                                         std::span<const double> values, std::int64_t source_cadence,
                                         std::int64_t target_cadence) {
    if (timestamps.size() != values.size()) throw InputError("timestamp and value counts differ");
    if (target_cadence <= 0 || source_cadence <= 0) throw InputError("cadence must be positive");
    std::vector<double> out;
    if (values.empty()) return out;
    const std::int64_t end = timestamps.back() + source_cadence;
    std::size_t j = 0;
    for (std::int64_t t = timestamps.front(); t < end; t += target_cadence) {
        while (j + 1 < timestamps.size() && timestamps[j + 1] <= t) ++j;
        out.push_back(values[j]);
    }
    return out;
}

inline std::vector<double> resample_hold(const IrradianceSeries& s, std::int64_t target_cadence) {
    return resample_hold(s.timestamps, s.values, s.cadence, target_cadence);
}

// Bounded mean-reverting random walk, reflected at +-1, then made energy
// neutral window by window (mean removed, rescaled into [-1, 1] if needed).
// Bit-identical for a fixed seed.
inline SignalSeries synth_signal(std::uint64_t seed, std::size_t n_steps, std::size_t window_steps = 450,
                                 std::int64_t cadence = 2, std::int64_t start = 0) {
    if (window_steps == 0) throw InputError("neutrality window must be >= 1 step");
    constexpr double kReversion = 0.01;
    constexpr double kVolatility = 0.06;
    constexpr double kMaxMove = 3.0 * kVolatility;

    std::mt19937_64 rng(seed);
    SignalSeries out;
    out.cadence = cadence;
    out.values.resize(n_steps);
    out.timestamps.resize(n_steps);
    double x = 2.0 * io_detail::unit(rng) - 1.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        out.timestamps[k] = start + static_cast<std::int64_t>(k) * cadence;
        out.values[k] = x;
        const double move = std::clamp(kVolatility * io_detail::standard_normal(rng), -kMaxMove, kMaxMove);
        x += -kReversion * x + move;
        if (x > 1.0) x = 2.0 - x;
        if (x < -1.0) x = -2.0 - x;
        x = std::clamp(x, -1.0, 1.0);
    }
    for (std::size_t w0 = 0; w0 < n_steps; w0 += window_steps) {
        const std::size_t w1 = std::min(n_steps, w0 + window_steps);
        double mean = 0;
        for (std::size_t k = w0; k < w1; ++k) mean += out.values[k];
        mean /= static_cast<double>(w1 - w0);
        double peak = 1.0;
        for (std::size_t k = w0; k < w1; ++k) {
            out.values[k] -= mean;
            peak = std::max(peak, std::abs(out.values[k]));
        }
        for (std::size_t k = w0; k < w1; ++k) out.values[k] = std::clamp(out.values[k] / peak, -1.0, 1.0);
    }
    return out;
}

// Clear-sky irradiance (Haurwitz) at a site on the prime meridian, attenuated by
// a random cloud regime that switches every 10 minutes.
inline IrradianceSeries synth_irradiance(std::uint64_t seed, std::int64_t start, std::size_t days,
                                         std::int64_t cadence = 60, double latitude_deg = 40.0) {
    if (cadence <= 0) throw InputError("irradiance cadence must be positive");
    std::mt19937_64 rng(seed);
    const double lat = latitude_deg * std::numbers::pi / 180.0;
    const std::int64_t n = static_cast<std::int64_t>(days) * 86400 / cadence;
    const std::int64_t block = std::max<std::int64_t>(1, 600 / cadence);

    IrradianceSeries out;
    out.cadence = cadence;
    out.timestamps.reserve(static_cast<std::size_t>(n));
    out.values.reserve(static_cast<std::size_t>(n));
    bool cloudy = false;
    double attenuation = 1.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t t = start + i * cadence;
        if (i % block == 0) {
            const double flip = cloudy ? 0.35 : 0.2;
            if (io_detail::unit(rng) < flip) cloudy = !cloudy;
            attenuation = cloudy ? 0.15 + 0.55 * io_detail::unit(rng) : 0.9 + 0.1 * io_detail::unit(rng);
        }
        const double day_of_year = std::floor(static_cast<double>(t) / 86400.0) + 1.0;
        const double hour = static_cast<double>(((t % 86400) + 86400) % 86400) / 3600.0;
        const double decl =
            23.45 * std::numbers::pi / 180.0 * std::sin(2.0 * std::numbers::pi * (284.0 + std::fmod(day_of_year, 365.0)) / 365.0);
        const double omega = (hour - 12.0) * 15.0 * std::numbers::pi / 180.0;
        const double sin_elev = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(omega);
        double ghi = 0.0;
        if (sin_elev > 0.0) ghi = 1098.0 * sin_elev * std::exp(-0.057 / sin_elev) * attenuation;
        out.timestamps.push_back(t);
        out.values.push_back(std::max(0.0, ghi));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Traces and reports

inline void export_trace(std::span<const DispatchRecord> records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << kTraceHeader << '\n';
    for (const auto& r : records) {
        out << r.step << ',' << format_double(r.t) << ',' << format_double(r.r) << ','
            << format_double(r.p_hes) << ',' << format_double(r.p0) << ',' << format_double(r.dp_req) << ','
            << format_double(r.p_pv) << ',' << format_double(r.p_cl) << ',' << format_double(r.p_batt)
            << ',' << format_double(r.p_curtailed) << ',' << format_double(r.soc_after) << '\n';
    }
    if (!out) throw IoError(path, "write failed");
}

inline std::vector<DispatchRecord> read_trace(const std::string& path) {
    const auto lines = io_detail::read_lines(path);
    if (lines.empty() || trim(lines.front()) != kTraceHeader)
        throw ParseError(path, 1, "expected trace header");
    std::vector<DispatchRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = io_detail::split(lines[i]);
        if (f.size() != 11) throw ParseError(path, i + 1, "expected 11 fields");
        const auto k = parse_int(f[0]);
        if (!k || *k < 0) throw ParseError(path, i + 1, "malformed step index");
        double v[10];
        for (int c = 0; c < 10; ++c) {
            const auto d = parse_double(f[static_cast<std::size_t>(c) + 1]);
            if (!d) throw ParseError(path, i + 1, "malformed number in column " + std::to_string(c + 2));
            v[c] = *d;
        }
        DispatchRecord r;
        r.step = static_cast<std::size_t>(*k);
        r.t = v[0];
        r.r = v[1];
        r.p_hes = v[2];
        r.p0 = v[3];
        r.dp_req = v[4];
        r.p_pv = v[5];
        r.p_cl = v[6];
        r.p_batt = v[7];
        r.p_curtailed = v[8];
        r.soc_after = v[9];
        records.push_back(r);
    }
    return records;
}

inline void export_signal_csv(const SignalSeries& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << "timestamp,r\n";
    for (std::size_t k = 0; k < s.values.size(); ++k)
        out << s.timestamps[k] << ',' << format_double(s.values[k]) << '\n';
    if (!out) throw IoError(path, "write failed");
}

inline void export_irradiance_csv(const IrradianceSeries& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << "timestamp,ghi_wm2\n";
    for (std::size_t k = 0; k < s.values.size(); ++k)
        out << s.timestamps[k] << ',' << format_double(s.values[k]) << '\n';
    if (!out) throw IoError(path, "write failed");
}

inline void export_report(const KeyValueDocument& report, const std::string& path) { report.write(path); }

}  // namespace hes
