#pragma once

// End-to-end experiment drivers behind the command-line tool: envelope tubes,
// signal tracking (optionally guarded, optionally against the oracle), and the
// PV-statistic bid sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "data_io.hpp"
#include "dispatch.hpp"
#include "flexibility.hpp"
#include "kvdoc.hpp"
#include "market.hpp"
#include "oracle.hpp"
#include "soc_guard.hpp"

namespace hes {

// PV power at irradiance-sample resolution.
struct PvSeries {
    std::vector<std::int64_t> timestamps;
    std::vector<double> power;  // MW
    std::int64_t cadence = 60;
};

struct RunInputs {
    std::int64_t start = 0;
    std::vector<double> signal;
    std::vector<double> pv;  // MW at dt_s resolution
};

namespace experiment_detail {

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(dir, "cannot create output directory");
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline std::int64_t dt_seconds(const RunConfig& cfg) {
    const auto dt = static_cast<std::int64_t>(std::llround(cfg.dt_s));
    if (dt <= 0 || std::abs(cfg.dt_s - static_cast<double>(dt)) > 1e-9)
        throw DataError("sim.dt_s must be a whole number of seconds for time-series input");
    return dt;
}

}  // namespace experiment_detail

inline IrradianceSeries load_irradiance(const RunConfig& cfg) {
    switch (cfg.irradiance_source) {
        case IrradianceSource::Csv: {
            auto s = read_irradiance_csv(cfg.irradiance_path);
            if (s.values.empty()) throw DataError("irradiance file has no samples: " + cfg.irradiance_path);
            return s;
        }
        case IrradianceSource::Constant: {
            IrradianceSeries s;
            s.cadence = cfg.irradiance_cadence_s;
            const auto n = static_cast<std::int64_t>(cfg.irradiance_days) * 86400 / s.cadence;
            for (std::int64_t i = 0; i < n; ++i) {
                s.timestamps.push_back(cfg.irradiance_start + i * s.cadence);
                s.values.push_back(cfg.irradiance_constant);
            }
            return s;
        }
        case IrradianceSource::Synthetic:
            return synth_irradiance(cfg.irradiance_seed, cfg.irradiance_start, cfg.irradiance_days,
                                    cfg.irradiance_cadence_s, cfg.latitude_deg);
    }
    throw DataError("unknown irradiance source");
}

// Converts irradiance to PV power once per distinct irradiance value.
inline PvSeries pv_from_irradiance(const PvParams& params, const IrradianceSeries& irr) {
    PvSeries out;
    out.timestamps = irr.timestamps;
    out.cadence = irr.cadence;
    out.power.reserve(irr.values.size());
    std::map<double, double> cache;
    for (double g : irr.values) {
        auto it = cache.find(g);
        if (it == cache.end()) it = cache.emplace(g, pv_power(params, g)).first;
        out.power.push_back(it->second);
    }
    return out;
}

// PV power held onto the simulation cadence for [start, start + n*dt).
inline std::vector<double> pv_window(const PvSeries& pv, std::int64_t start, std::size_t n, std::int64_t dt) {
    if (pv.timestamps.empty()) throw DataError("no PV samples");
    const std::int64_t end = start + static_cast<std::int64_t>(n) * dt;
    if (start < pv.timestamps.front() || end > pv.timestamps.back() + pv.cadence)
        throw DataError("irradiance data does not cover the simulation window");
    std::vector<double> out(n);
    auto it = std::upper_bound(pv.timestamps.begin(), pv.timestamps.end(), start);
    std::size_t j = static_cast<std::size_t>(it - pv.timestamps.begin()) - 1;
    for (std::size_t k = 0; k < n; ++k) {
        const std::int64_t t = start + static_cast<std::int64_t>(k) * dt;
        while (j + 1 < pv.timestamps.size() && pv.timestamps[j + 1] <= t) ++j;
        out[k] = pv.power[j];
    }
    return out;
}

inline std::vector<double> load_signal(const RunConfig& cfg, std::size_t n, std::uint64_t seed,
                                       std::size_t offset = 0) {
    const auto dt = experiment_detail::dt_seconds(cfg);
    std::vector<double> r;
    if (cfg.signal_source == SignalSource::Csv) {
        const auto s = read_signal_csv(cfg.signal_path, dt);
        if (s.values.size() < offset + n)
            throw DataError("signal file " + cfg.signal_path + " holds " + std::to_string(s.values.size()) +
                            " samples, need " + std::to_string(offset + n));
        r.assign(s.values.begin() + static_cast<std::ptrdiff_t>(offset),
                 s.values.begin() + static_cast<std::ptrdiff_t>(offset + n));
    } else {
        const auto window = static_cast<std::size_t>(std::max(1.0, std::round(cfg.signal_window_s / cfg.dt_s)));
        r = synth_signal(seed, n, window, dt).values;
    }
    if (cfg.signal_bias != 0.0)
        for (double& v : r) v = std::clamp(v + cfg.signal_bias, -1.0, 1.0);
    return r;
}

inline RunInputs build_inputs(const RunConfig& cfg) {
    const auto dt = experiment_detail::dt_seconds(cfg);
    const std::size_t n = cfg.steps();
    const auto irr = load_irradiance(cfg);
    RunInputs in;
    in.start = cfg.start_epoch.value_or(cfg.irradiance_source == IrradianceSource::Csv
                                            ? irr.timestamps.front()
                                            : cfg.irradiance_start + 12 * 3600);
    in.pv = pv_window(pv_from_irradiance(cfg.fleet.pv, irr), in.start, n, dt);
    in.signal = load_signal(cfg, n, cfg.signal_seed);
    return in;
}

// ---------------------------------------------------------------------------
// envelope

struct EnvelopeSummary {
    std::map<Scenario, std::string> files;
    std::map<Scenario, FlexEnvelope> first_step;
};

inline EnvelopeSummary cmd_envelope(const RunConfig& cfg) {
    const auto dt = experiment_detail::dt_seconds(cfg);
    const std::size_t n = cfg.steps();
    const auto irr = load_irradiance(cfg);
    const std::int64_t start = cfg.start_epoch.value_or(
        cfg.irradiance_source == IrradianceSource::Csv ? irr.timestamps.front() : cfg.irradiance_start + 12 * 3600);
    const auto pv = pv_window(pv_from_irradiance(cfg.fleet.pv, irr), start, n, dt);

    experiment_detail::ensure_dir(cfg.out_dir);
    EnvelopeSummary summary;
    for (Scenario s : cfg.envelope_scenarios) {
        const auto path = experiment_detail::join_path(cfg.out_dir, "envelope_" + std::string(to_string(s)) + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError(path, "cannot open for writing");
        out << "k,t,p_pv,p0,dp_lo,dp_hi\n";
        for (std::size_t k = 0; k < n; ++k) {
            const auto env = envelope(s, cfg.fleet, pv[k]);
            if (k == 0) summary.first_step[s] = env;
            out << k << ',' << start + static_cast<std::int64_t>(k) * dt << ',' << format_double(pv[k]) << ','
                << format_double(env.p0) << ',' << format_double(env.dp_lo) << ',' << format_double(env.dp_hi)
                << '\n';
        }
        if (!out) throw IoError(path, "write failed");
        summary.files[s] = path;
    }
    return summary;
}

// ---------------------------------------------------------------------------
// track

struct TrackSummary {
    MarketOutcome outcome;
    RunResult run;
    std::vector<std::string> warnings;
    std::optional<OracleComparison> oracle;
    KeyValueDocument report;
    std::string trace_path;
    std::string report_path;
};

inline double season_hour_statistic(const RunConfig& cfg, std::int64_t at, PvStatistic stat) {
    const auto irr = load_irradiance(cfg);
    const auto pv = pv_from_irradiance(cfg.fleet.pv, irr);
    const auto groups = group_by_season_hour(pv.timestamps, pv.power);
    const SeasonHour key{season_of(at), utc_hour_of(at)};
    const auto it = groups.find(key);
    if (it == groups.end() || it->second.empty())
        throw DataError("insufficient data: season-hour group " + std::string(to_string(key.first)) + "/" +
                        std::to_string(key.second) + " is empty");
    return pv_statistic(it->second, stat);
}

inline TrackSummary cmd_track(const RunConfig& cfg) {
    const auto in = build_inputs(cfg);
    TrackSummary out;

    double capacity = cfg.capacity;
    std::vector<double> half_width(in.pv.size());
    for (std::size_t k = 0; k < in.pv.size(); ++k) {
        const auto env = realizable_envelope(cfg.scenario, cfg.fleet, in.pv[k]);
        half_width[k] = std::min(-env.dp_lo, env.dp_hi);
    }
    if (cfg.capacity_mode == CapacityMode::MaxFlex) {
        capacity = max_flex_bid(half_width, in.signal);
    } else if (cfg.capacity_mode == CapacityMode::Decomposed) {
        capacity = decomposed_bid(cfg.fleet.battery, season_hour_statistic(cfg, in.start, cfg.statistic),
                                  cfg.fleet.load.p_max);
    }
    const double min_half = *std::min_element(half_width.begin(), half_width.end());
    if (capacity > min_half)
        out.warnings.push_back("capacity " + format_double(capacity) + " MW exceeds the envelope half-width " +
                               format_double(min_half) + " MW on some steps; requests are saturated");

    std::vector<double> dp(in.signal.size());
    for (std::size_t k = 0; k < dp.size(); ++k) dp[k] = capacity * in.signal[k];
    out.run = run_dispatch(cfg.fleet, cfg.scenario, dp, in.pv, cfg.soc0,
                           cfg.guard_enabled ? std::optional<GuardConfig>(cfg.guard) : std::nullopt, in.signal);
    if (out.run.saturated_steps > 0 && capacity <= min_half)
        out.warnings.push_back("envelope saturation on " + std::to_string(out.run.saturated_steps) + " steps");

    std::vector<double> delivered(out.run.records.size());
    for (std::size_t k = 0; k < delivered.size(); ++k) delivered[k] = out.run.records[k].delivered_dp();
    const double score = performance_score(capacity, in.signal, delivered);
    const double miles = in.signal.size() >= 2 ? mileage(in.signal) : 0.0;
    out.outcome = settle(capacity, score, miles, cfg.prices);

    double soc_lo = cfg.soc0, soc_hi = cfg.soc0;
    for (const auto& r : out.run.records) {
        soc_lo = std::min(soc_lo, r.soc_after);
        soc_hi = std::max(soc_hi, r.soc_after);
    }

    auto& rep = out.report;
    rep.set("scenario", to_string(cfg.scenario));
    rep.set("steps", out.run.records.size());
    rep.set("dt_s", cfg.dt_s);
    rep.set("start_epoch", std::to_string(in.start));
    rep.set("capacity_mode", cfg.capacity_mode == CapacityMode::Fixed     ? "fixed"
                             : cfg.capacity_mode == CapacityMode::MaxFlex ? "max-flex"
                                                                          : "decomposed");
    rep.set("capacity_mw", capacity);
    rep.set("x_p", out.outcome.reported_score());
    rep.set("x_p_raw", out.outcome.score);
    rep.set("qualified", out.outcome.qualified);
    rep.set("mileage", out.outcome.mileage);
    rep.set("lambda_c", cfg.prices.lambda_c);
    rep.set("lambda_m", cfg.prices.lambda_m);
    rep.set("payment", out.outcome.payment);
    rep.set("tracking_error_mw_steps", out.run.shortfall);
    rep.set("saturated_steps", out.run.saturated_steps);
    rep.set("battery_limited_steps", out.run.limited_steps);
    rep.set("soc_min", soc_lo);
    rep.set("soc_max", soc_hi);
    rep.set("guard.enabled", cfg.guard_enabled);
    if (cfg.guard_enabled) {
        rep.set("guard.e_upper", cfg.guard.e_upper);
        rep.set("guard.e_lower", cfg.guard.e_lower);
        rep.set("guard.buffer", cfg.guard.buffer);
        rep.set("guard.containment_ratio", containment_ratio(cfg.guard, cfg.fleet.battery, cfg.fleet.dt));
    }

    experiment_detail::ensure_dir(cfg.out_dir);
    out.trace_path = experiment_detail::join_path(cfg.out_dir, "trace.csv");
    export_trace(out.run.records, out.trace_path);

    if (cfg.oracle_enabled) {
        OracleProblem problem;
        problem.signal = in.signal;
        problem.pv = in.pv;
        problem.capacity = capacity;
        problem.fleet = cfg.fleet;
        problem.soc0 = cfg.soc0;
        problem.soc_grid = cfg.oracle_soc_grid;
        problem.backend = cfg.oracle_backend;
        out.oracle = compare_with_rule(problem);
        rep.set("oracle.label", kOracleLabel);
        rep.set("oracle.backend", to_string(cfg.oracle_backend));
        rep.set("oracle.objective_rule", out.oracle->objective_rule);
        rep.set("oracle.objective_oracle", out.oracle->objective_oracle);
        rep.set("oracle.discretization_bound", out.oracle->discretization_bound);
        if (out.oracle->score_rule) rep.set("oracle.score_rule", *out.oracle->score_rule);
        if (out.oracle->score_oracle) rep.set("oracle.score_oracle", *out.oracle->score_oracle);
        export_trace(out.oracle->oracle.records, experiment_detail::join_path(cfg.out_dir, "oracle_trace.csv"));
    }
    for (std::size_t i = 0; i < out.warnings.size(); ++i) rep.set("warning." + std::to_string(i), out.warnings[i]);

    out.report_path = experiment_detail::join_path(cfg.out_dir, "report.txt");
    export_report(rep, out.report_path);
    return out;
}

// ---------------------------------------------------------------------------
// bid-sweep

struct BidSweepRow {
    PvStatistic statistic;
    double mean_capacity = 0;
    double mean_score = 0;
    double qualified_fraction = 0;
    std::size_t hours = 0;

    bool qualified() const { return qualifies(mean_score); }
};

struct BidSweepSummary {
    std::vector<BidSweepRow> rows;
    std::string path;
};

// Sizes an hourly bid from each PV statistic of the hour's season-hour group,
// then dispatches every evaluation hour with that bid and scores it.
inline BidSweepSummary cmd_bid_sweep(const RunConfig& cfg) {
    const auto dt = experiment_detail::dt_seconds(cfg);
    const auto irr = load_irradiance(cfg);
    const auto pv = pv_from_irradiance(cfg.fleet.pv, irr);
    const auto groups = group_by_season_hour(pv.timestamps, pv.power);

    const std::int64_t data_start = pv.timestamps.front();
    const std::int64_t data_end = pv.timestamps.back() + pv.cadence;
    const std::int64_t first_hour = ((cfg.bid_eval_start.value_or(data_start) + 3599) / 3600) * 3600;
    std::int64_t last = cfg.bid_eval_hours ? first_hour + static_cast<std::int64_t>(*cfg.bid_eval_hours * 3600.0)
                                           : data_end;
    std::vector<std::int64_t> hours;
    for (std::int64_t h = first_hour; h + 3600 <= last; h += 3600) hours.push_back(h);
    if (hours.empty()) throw DataError("insufficient data: no complete evaluation hour");

    const std::size_t steps_per_hour = static_cast<std::size_t>(3600 / dt);
    std::vector<std::vector<double>> hour_pv(hours.size());
    std::vector<std::vector<double>> hour_signal(hours.size());
    std::vector<SeasonHour> hour_key(hours.size());
    for (std::size_t i = 0; i < hours.size(); ++i) {
        hour_key[i] = {season_of(hours[i]), utc_hour_of(hours[i])};
        const auto it = groups.find(hour_key[i]);
        if (it == groups.end() || it->second.empty())
            throw DataError("insufficient data: season-hour group " + std::string(to_string(hour_key[i].first)) +
                            "/" + std::to_string(hour_key[i].second) + " is empty");
        hour_pv[i] = pv_window(pv, hours[i], steps_per_hour, dt);
        hour_signal[i] = load_signal(cfg, steps_per_hour, cfg.signal_seed + i, i * steps_per_hour);
    }

    BidSweepSummary out;
    for (PvStatistic stat : kAllStatistics) {
        BidSweepRow row;
        row.statistic = stat;
        std::size_t qualified = 0;
        for (std::size_t i = 0; i < hours.size(); ++i) {
            const double c = decomposed_bid(cfg.fleet.battery, pv_statistic(groups.at(hour_key[i]), stat),
                                            cfg.fleet.load.p_max);
            std::vector<double> dp(steps_per_hour);
            for (std::size_t k = 0; k < dp.size(); ++k) dp[k] = c * hour_signal[i][k];
            const auto run = run_unguarded(cfg.fleet, cfg.scenario, dp, hour_pv[i], cfg.soc0, hour_signal[i]);
            double score = 1.0;
            try {
                std::vector<double> delivered(run.records.size());
                for (std::size_t k = 0; k < delivered.size(); ++k) delivered[k] = run.records[k].delivered_dp();
                score = performance_score(c, hour_signal[i], delivered);
            } catch (const UndefinedScore&) {
            }
            row.mean_capacity += c;
            row.mean_score += score;
            if (qualifies(score)) ++qualified;
        }
        row.hours = hours.size();
        row.mean_capacity /= static_cast<double>(hours.size());
        row.mean_score /= static_cast<double>(hours.size());
        row.qualified_fraction = static_cast<double>(qualified) / static_cast<double>(hours.size());
        out.rows.push_back(row);
    }

    experiment_detail::ensure_dir(cfg.out_dir);
    out.path = experiment_detail::join_path(cfg.out_dir, "bid_sweep.csv");
    std::ofstream f(out.path, std::ios::binary);
    if (!f) throw IoError(out.path, "cannot open for writing");
    f << "statistic,capacity_mw,x_p,qualified,qualified_hours_fraction,hours\n";
    for (const auto& r : out.rows)
        f << to_string(r.statistic) << ',' << format_double(r.mean_capacity) << ',' << format_double(r.mean_score)
          << ',' << (r.qualified() ? "true" : "false") << ',' << format_double(r.qualified_fraction) << ','
          << r.hours << '\n';
    if (!f) throw IoError(out.path, "write failed");
    return out;
}

}  // namespace hes
