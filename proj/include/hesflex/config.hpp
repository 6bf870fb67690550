#pragma once

// Run configuration read from a flat key-value document. Defaults reproduce
// the reference plant: PV 3 MW, load 3 MW, battery 5 MW / 5 MWh, eta 0.95,
// SoC start 0.5 within [0.1, 0.9], 2 s steps.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "assets.hpp"
#include "flexibility.hpp"
#include "kvdoc.hpp"
#include "market.hpp"
#include "oracle.hpp"
#include "soc_guard.hpp"

namespace hes {

enum class CapacityMode { Fixed, MaxFlex, Decomposed };
enum class SignalSource { Synthetic, Csv };
enum class IrradianceSource { Synthetic, Csv, Constant };

inline constexpr std::int64_t kDefaultStartEpoch = 1687348800;  // 2023-06-21T12:00:00Z

struct RunConfig {
    AssetFleet fleet;
    double soc0 = 0.5;
    double dt_s = 2.0;

    Scenario scenario = Scenario::S1;
    std::vector<Scenario> envelope_scenarios{kAllScenarios.begin(), kAllScenarios.end()};
    double hours = 1.0;
    std::optional<std::int64_t> start_epoch;

    CapacityMode capacity_mode = CapacityMode::Fixed;
    double capacity = 6.5;
    PvStatistic statistic = PvStatistic::Mean;

    bool guard_enabled = false;
    GuardConfig guard{0.6, 0.4, 0.02, std::nullopt, std::nullopt};

    SignalSource signal_source = SignalSource::Synthetic;
    std::string signal_path;
    std::uint64_t signal_seed = 1;
    double signal_window_s = 900.0;
    double signal_bias = 0.0;

    IrradianceSource irradiance_source = IrradianceSource::Synthetic;
    std::string irradiance_path;
    std::uint64_t irradiance_seed = 7;
    double irradiance_constant = 800.0;
    std::int64_t irradiance_start = kDefaultStartEpoch - 12 * 3600;
    std::size_t irradiance_days = 1;
    std::int64_t irradiance_cadence_s = 60;
    double latitude_deg = 40.0;

    bool oracle_enabled = false;
    OracleBackend oracle_backend = OracleBackend::SocGrid;
    std::size_t oracle_soc_grid = 2001;

    std::optional<std::int64_t> bid_eval_start;
    std::optional<double> bid_eval_hours;

    MarketPrices prices{30.0, 2.0};
    std::string out_dir = "out";

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(hours * 3600.0 / dt_s)); }
};

namespace config_detail {

// One handler per known key; each returns an error message or empty.
using Handler = std::function<std::string(RunConfig&, const std::string&)>;

inline Handler number(double RunConfig::*field) {
    return [field](RunConfig& c, const std::string& v) -> std::string {
        const auto d = parse_double(v);
        if (!d) return "expected a number, got '" + v + "'";
        c.*field = *d;
        return {};
    };
}

template <class Fn>
Handler number_with(Fn fn) {
    return [fn](RunConfig& c, const std::string& v) -> std::string {
        const auto d = parse_double(v);
        if (!d) return "expected a number, got '" + v + "'";
        fn(c, *d);
        return {};
    };
}

template <class Fn>
Handler integer_with(Fn fn) {
    return [fn](RunConfig& c, const std::string& v) -> std::string {
        const auto d = parse_int(v);
        if (!d) return "expected an integer, got '" + v + "'";
        fn(c, *d);
        return {};
    };
}

template <class Fn>
Handler boolean_with(Fn fn) {
    return [fn](RunConfig& c, const std::string& v) -> std::string {
        const auto d = parse_bool(v);
        if (!d) return "expected true/false, got '" + v + "'";
        fn(c, *d);
        return {};
    };
}

inline const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"pv.p_rated_mw", number_with([](RunConfig& c, double v) { c.fleet.pv.p_pv_rated = v; })},
        {"pv.eta", number_with([](RunConfig& c, double v) { c.fleet.pv.eta_pv = v; })},
        {"pv.i_sc_stc_a", number_with([](RunConfig& c, double v) { c.fleet.pv.i_sc_stc = v; })},
        {"pv.i0_a", number_with([](RunConfig& c, double v) { c.fleet.pv.i_0 = v; })},
        {"pv.r_p_ohm", number_with([](RunConfig& c, double v) { c.fleet.pv.r_p = v; })},
        {"pv.r_s_ohm", number_with([](RunConfig& c, double v) { c.fleet.pv.r_s = v; })},
        {"pv.n_cell", number_with([](RunConfig& c, double v) { c.fleet.pv.n_cell = v; })},
        {"load.p_max_mw", number_with([](RunConfig& c, double v) { c.fleet.load.p_max = v; })},
        {"battery.p_max_mw", number_with([](RunConfig& c, double v) { c.fleet.battery.p_max = v; })},
        {"battery.e_cap_mwh", number_with([](RunConfig& c, double v) { c.fleet.battery.e_cap = v; })},
        {"battery.eta", number_with([](RunConfig& c, double v) { c.fleet.battery.eta_inv = v; })},
        {"battery.soc_min", number_with([](RunConfig& c, double v) { c.fleet.battery.e_min = v; })},
        {"battery.soc_max", number_with([](RunConfig& c, double v) { c.fleet.battery.e_max = v; })},
        {"battery.soc0", number(&RunConfig::soc0)},
        {"sim.dt_s", number(&RunConfig::dt_s)},
        {"sim.hours", number(&RunConfig::hours)},
        {"sim.start_epoch", integer_with([](RunConfig& c, std::int64_t v) { c.start_epoch = v; })},
        {"sim.scenario",
         [](RunConfig& c, const std::string& v) -> std::string {
             const auto s = parse_scenario(v);
             if (!s) return "unknown scenario '" + v + "' (expected S1..S5)";
             c.scenario = *s;
             return {};
         }},
        {"sim.envelope_scenarios",
         [](RunConfig& c, const std::string& v) -> std::string {
             c.envelope_scenarios.clear();
             std::string_view rest = v;
             while (!rest.empty()) {
                 const auto comma = rest.find(',');
                 const auto item = trim(rest.substr(0, comma));
                 const auto s = parse_scenario(item);
                 if (!s) return "unknown scenario '" + std::string(item) + "'";
                 c.envelope_scenarios.push_back(*s);
                 rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
             }
             if (c.envelope_scenarios.empty()) return "no scenarios listed";
             return {};
         }},
        {"capacity.mode",
         [](RunConfig& c, const std::string& v) -> std::string {
             if (v == "fixed") c.capacity_mode = CapacityMode::Fixed;
             else if (v == "max-flex") c.capacity_mode = CapacityMode::MaxFlex;
             else if (v == "decomposed") c.capacity_mode = CapacityMode::Decomposed;
             else return "unknown capacity mode '" + v + "' (fixed, max-flex, decomposed)";
             return {};
         }},
        {"capacity.mw", number(&RunConfig::capacity)},
        {"capacity.statistic",
         [](RunConfig& c, const std::string& v) -> std::string {
             const auto s = parse_statistic(v);
             if (!s) return "unknown statistic '" + v + "' (mean, p50, p75, p95)";
             c.statistic = *s;
             return {};
         }},
        {"guard.enabled", boolean_with([](RunConfig& c, bool v) { c.guard_enabled = v; })},
        {"guard.e_upper", number_with([](RunConfig& c, double v) { c.guard.e_upper = v; })},
        {"guard.e_lower", number_with([](RunConfig& c, double v) { c.guard.e_lower = v; })},
        {"guard.buffer", number_with([](RunConfig& c, double v) { c.guard.buffer = v; })},
        {"guard.eta_charge", number_with([](RunConfig& c, double v) { c.guard.eta_charge = v; })},
        {"guard.eta_discharge", number_with([](RunConfig& c, double v) { c.guard.eta_discharge = v; })},
        {"signal.source",
         [](RunConfig& c, const std::string& v) -> std::string {
             if (v == "synthetic") c.signal_source = SignalSource::Synthetic;
             else if (v == "csv") c.signal_source = SignalSource::Csv;
             else return "unknown signal source '" + v + "' (synthetic, csv)";
             return {};
         }},
        {"signal.path", [](RunConfig& c, const std::string& v) -> std::string { c.signal_path = v; return {}; }},
        {"signal.seed", integer_with([](RunConfig& c, std::int64_t v) { c.signal_seed = static_cast<std::uint64_t>(v); })},
        {"signal.window_s", number(&RunConfig::signal_window_s)},
        {"signal.bias", number(&RunConfig::signal_bias)},
        {"irradiance.source",
         [](RunConfig& c, const std::string& v) -> std::string {
             if (v == "synthetic") c.irradiance_source = IrradianceSource::Synthetic;
             else if (v == "csv") c.irradiance_source = IrradianceSource::Csv;
             else if (v == "constant") c.irradiance_source = IrradianceSource::Constant;
             else return "unknown irradiance source '" + v + "' (synthetic, csv, constant)";
             return {};
         }},
        {"irradiance.path", [](RunConfig& c, const std::string& v) -> std::string { c.irradiance_path = v; return {}; }},
        {"irradiance.seed", integer_with([](RunConfig& c, std::int64_t v) { c.irradiance_seed = static_cast<std::uint64_t>(v); })},
        {"irradiance.constant_wm2", number(&RunConfig::irradiance_constant)},
        {"irradiance.start_epoch", integer_with([](RunConfig& c, std::int64_t v) { c.irradiance_start = v; })},
        {"irradiance.days", integer_with([](RunConfig& c, std::int64_t v) { c.irradiance_days = v < 0 ? 0 : static_cast<std::size_t>(v); })},
        {"irradiance.cadence_s", integer_with([](RunConfig& c, std::int64_t v) { c.irradiance_cadence_s = v; })},
        {"irradiance.latitude_deg", number(&RunConfig::latitude_deg)},
        {"oracle.enabled", boolean_with([](RunConfig& c, bool v) { c.oracle_enabled = v; })},
        {"oracle.backend",
         [](RunConfig& c, const std::string& v) -> std::string {
             const auto b = parse_backend(v);
             if (!b) return "unknown oracle backend '" + v + "' (soc-dp, exact)";
             c.oracle_backend = *b;
             return {};
         }},
        {"oracle.soc_grid", integer_with([](RunConfig& c, std::int64_t v) { c.oracle_soc_grid = v < 0 ? 0 : static_cast<std::size_t>(v); })},
        {"bid.eval_start_epoch", integer_with([](RunConfig& c, std::int64_t v) { c.bid_eval_start = v; })},
        {"bid.eval_hours", number_with([](RunConfig& c, double v) { c.bid_eval_hours = v; })},
        {"market.lambda_c", number_with([](RunConfig& c, double v) { c.prices.lambda_c = v; })},
        {"market.lambda_m", number_with([](RunConfig& c, double v) { c.prices.lambda_m = v; })},
        {"output.dir", [](RunConfig& c, const std::string& v) -> std::string { c.out_dir = v; return {}; }},
    };
    return table;
}

inline void check(std::vector<std::string>& problems, bool ok, const std::string& message) {
    if (!ok) problems.push_back(message);
}

}  // namespace config_detail

// Every problem found is reported; nothing stops at the first error.
inline std::vector<std::string> validation_problems(const RunConfig& c) {
    using config_detail::check;
    std::vector<std::string> p;
    const auto& pv = c.fleet.pv;
    const auto& b = c.fleet.battery;
    check(p, pv.p_pv_rated > 0, "pv.p_rated_mw must be > 0");
    check(p, pv.eta_pv > 0 && pv.eta_pv <= 1, "pv.eta must be in (0, 1]");
    check(p, pv.i_sc_stc > 0, "pv.i_sc_stc_a must be > 0");
    check(p, pv.i_0 > 0, "pv.i0_a must be > 0");
    check(p, pv.r_p > 0, "pv.r_p_ohm must be > 0");
    check(p, pv.r_s >= 0, "pv.r_s_ohm must be >= 0");
    check(p, pv.n_cell >= 1, "pv.n_cell must be >= 1");
    check(p, c.fleet.load.p_max >= 0, "load.p_max_mw must be >= 0");
    check(p, b.p_max > 0, "battery.p_max_mw must be > 0");
    check(p, b.e_cap > 0, "battery.e_cap_mwh must be > 0");
    check(p, b.eta_inv > 0 && b.eta_inv <= 1, "battery.eta must be in (0, 1]");
    check(p, b.e_min >= 0 && b.e_min < b.e_max && b.e_max <= 1,
          "battery SoC bounds must satisfy 0 <= soc_min < soc_max <= 1");
    check(p, c.soc0 >= b.e_min && c.soc0 <= b.e_max, "battery.soc0 must lie within [soc_min, soc_max]");
    check(p, c.dt_s > 0, "sim.dt_s must be > 0");
    check(p, c.hours > 0, "sim.hours must be > 0");
    check(p, c.capacity > 0, "capacity.mw must be > 0");
    check(p, c.signal_window_s >= c.dt_s, "signal.window_s must be at least one step");
    check(p, c.signal_bias >= -1 && c.signal_bias <= 1, "signal.bias must lie in [-1, 1]");
    check(p, c.signal_source != SignalSource::Csv || !c.signal_path.empty(),
          "signal.path is required when signal.source = csv");
    check(p, c.irradiance_source != IrradianceSource::Csv || !c.irradiance_path.empty(),
          "irradiance.path is required when irradiance.source = csv");
    check(p, c.irradiance_constant >= 0, "irradiance.constant_wm2 must be >= 0");
    check(p, c.irradiance_days >= 1, "irradiance.days must be >= 1");
    check(p, c.irradiance_cadence_s > 0, "irradiance.cadence_s must be > 0");
    check(p, c.oracle_soc_grid >= 3, "oracle.soc_grid must be >= 3");
    check(p, !c.oracle_enabled || c.scenario == Scenario::S1,
          "oracle comparison is defined for scenario S1 only");
    check(p, c.prices.lambda_c >= 0 && c.prices.lambda_m >= 0, "market prices must be >= 0");
    check(p, !c.bid_eval_hours || *c.bid_eval_hours > 0, "bid.eval_hours must be > 0");
    if (c.guard_enabled) {
        const auto& g = c.guard;
        check(p, g.e_lower < g.e_upper, "guard.e_lower must be < guard.e_upper");
        check(p, g.buffer > 0 && g.buffer <= 0.5 * (g.e_upper - g.e_lower),
              "guard.buffer must lie in (0, (e_upper - e_lower)/2]");
        check(p, g.e_lower >= b.e_min && g.e_upper <= b.e_max, "guard band must lie within the battery SoC bounds");
        check(p, c.soc0 >= g.e_lower && c.soc0 <= g.e_upper, "battery.soc0 must lie within the guard band");
    }
    return p;
}

inline RunConfig load_config(const KeyValueDocument& doc) {
    RunConfig cfg;
    std::vector<std::string> problems;
    const auto& table = config_detail::handlers();
    for (const auto& key : doc.keys()) {
        const auto it = table.find(key);
        if (it == table.end()) {
            problems.push_back("unknown key '" + key + "'");
            continue;
        }
        const auto err = it->second(cfg, *doc.get(key));
        if (!err.empty()) problems.push_back(key + ": " + err);
    }
    if (doc.contains("guard.e_upper") != doc.contains("guard.e_lower"))
        problems.push_back("guard.e_upper and guard.e_lower must be given together");
    if (!doc.contains("guard.buffer") && doc.contains("guard.e_upper") && doc.contains("guard.e_lower"))
        cfg.guard.buffer = 0.1 * (cfg.guard.e_upper - cfg.guard.e_lower);
    if (doc.contains("capacity.mw") && !doc.contains("capacity.mode")) cfg.capacity_mode = CapacityMode::Fixed;

    auto more = validation_problems(cfg);
    problems.insert(problems.end(), more.begin(), more.end());
    if (!problems.empty()) throw ConfigError(std::move(problems));

    cfg.fleet.dt = cfg.dt_s / 3600.0;
    if (!doc.contains("pv.n_cell")) cfg.fleet.pv = scale_cells_to_rating(cfg.fleet.pv);
    return cfg;
}

inline std::vector<std::string> known_config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : config_detail::handlers()) keys.push_back(k);
    return keys;
}

}  // namespace hes
