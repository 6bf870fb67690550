#pragma once

// SoC drift correction: tapers battery power linearly inside a buffer zone at
// the edges of a target SoC band so that multi-hour regulation never drives
// the battery out of the band.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "assets.hpp"
#include "dispatch.hpp"
#include "flexibility.hpp"

namespace hes {

struct GuardConfig {
    double e_upper = 0.6;
    double e_lower = 0.4;
    double buffer = 0.02;
    std::optional<double> eta_charge;     // defaults to the battery inverter efficiency
    std::optional<double> eta_discharge;

    static GuardConfig with_default_buffer(double e_upper, double e_lower) {
        return GuardConfig{e_upper, e_lower, 0.1 * (e_upper - e_lower), std::nullopt, std::nullopt};
    }

    double charge_efficiency(const BatteryParams& b) const { return eta_charge.value_or(b.eta_inv); }
    double discharge_efficiency(const BatteryParams& b) const {
        return eta_discharge.value_or(b.eta_inv);
    }
};

inline void validate(const GuardConfig& cfg, const BatteryParams& b) {
    if (!(cfg.e_lower < cfg.e_upper)) throw InputError("guard band requires e_lower < e_upper");
    if (!(cfg.buffer > 0 && cfg.buffer <= 0.5 * (cfg.e_upper - cfg.e_lower)))
        throw InputError("guard buffer must lie in (0, (e_upper - e_lower)/2]");
    if (cfg.e_lower < b.e_min || cfg.e_upper > b.e_max)
        throw InputError("guard band must lie within the battery SoC bounds");
    for (auto eta : {cfg.eta_charge, cfg.eta_discharge})
        if (eta && !(*eta > 0 && *eta <= 1)) throw InputError("guard efficiencies must be in (0, 1]");
}

// Largest per-step SoC move relative to the buffer width. The band is provably
// held whenever this is <= 1.
inline double containment_ratio(const GuardConfig& cfg, const BatteryParams& b, double dt) {
    const double worst = std::max(cfg.charge_efficiency(b), 1.0 / cfg.discharge_efficiency(b));
    return b.p_max * worst * dt / (b.e_cap * cfg.buffer);
}

struct GuardStep {
    double p_batt = 0;
    double soc_next = 0;
    bool limited = false;  // output differs from the request
};

namespace detail {

inline double guard_soc_update(const GuardConfig& cfg, const BatteryParams& b, double soc,
                               double p_batt, double dt) {
    const double drawn = p_batt >= 0 ? p_batt / cfg.discharge_efficiency(b) * dt / b.e_cap
                                     : p_batt * cfg.charge_efficiency(b) * dt / b.e_cap;
    return soc - drawn;
}

}  // namespace detail

inline GuardStep guard_step(const GuardConfig& cfg, const BatteryParams& b, double soc,
                            double p_batt_req, double dt) {
    double p_max = b.p_max;
    if (soc > cfg.e_upper - cfg.buffer) {
        const double k_u = std::max(0.0, (cfg.e_upper - soc) / cfg.buffer);
        if (p_batt_req < 0) p_max = k_u * b.p_max;
    } else if (soc < cfg.e_lower + cfg.buffer) {
        const double k_l = std::max(0.0, (soc - cfg.e_lower) / cfg.buffer);
        if (p_batt_req > 0) p_max = k_l * b.p_max;
    }

    GuardStep out;
    out.p_batt = p_batt_req >= 0 ? std::min(p_batt_req, p_max) : std::max(p_batt_req, -p_max);
    out.soc_next = detail::guard_soc_update(cfg, b, soc, out.p_batt, dt);
    out.limited = out.p_batt != p_batt_req;
    return out;
}

struct RunResult {
    std::vector<DispatchRecord> records;
    std::size_t saturated_steps = 0;  // request clipped to the envelope
    std::size_t limited_steps = 0;    // battery power cut by the guard or by SoC bounds
    double shortfall = 0;             // sum |dp_req - delivered|, MW-steps
};

// Rule-based dispatch over a horizon. With a guard config the battery request
// passes through guard_step; without one the battery is only held inside its
// physical SoC bounds. `signal` (optional) fills DispatchRecord::r.
inline RunResult run_dispatch(const AssetFleet& fleet, Scenario scenario,
                              std::span<const double> dp_series, std::span<const double> pv,
                              double soc0, const std::optional<GuardConfig>& guard,
                              std::span<const double> signal = {}) {
    if (dp_series.size() != pv.size())
        throw InputError("deviation and PV series lengths differ");
    if (!signal.empty() && signal.size() != dp_series.size())
        throw InputError("signal and deviation series lengths differ");
    const auto& b = fleet.battery;
    if (soc0 < b.e_min || soc0 > b.e_max) throw InputError("initial SoC outside battery bounds");
    if (guard) {
        validate(*guard, b);
        if (soc0 < guard->e_lower || soc0 > guard->e_upper)
            throw InputError("initial SoC outside the guard band");
    }

    RunResult out;
    out.records.reserve(dp_series.size());
    double soc = soc0;
    for (std::size_t k = 0; k < dp_series.size(); ++k) {
        const double p_pv = pv[k];
        const FlexEnvelope env = realizable_envelope(scenario, fleet, p_pv);
        const double dp_cmd = std::clamp(dp_series[k], env.dp_lo, env.dp_hi);
        if (dp_cmd != dp_series[k]) ++out.saturated_steps;
        const Setpoints sp = allocate(scenario, fleet, p_pv, dp_cmd);

        const PowerRange limits = battery_power_limits(b, soc, fleet.dt);
        double p_batt = sp.p_batt;
        double soc_next;
        if (guard) {
            const GuardStep g = guard_step(*guard, b, soc, sp.p_batt, fleet.dt);
            p_batt = std::clamp(g.p_batt, limits.lo, limits.hi);
            soc_next = p_batt == g.p_batt ? g.soc_next
                                          : detail::guard_soc_update(*guard, b, soc, p_batt, fleet.dt);
            soc_next = std::clamp(soc_next, b.e_min, b.e_max);
        } else {
            p_batt = std::clamp(p_batt, limits.lo, limits.hi);
            soc_next = battery_step_net(b, BatteryState{soc}, p_batt, fleet.dt).soc;
        }
        if (p_batt != sp.p_batt) ++out.limited_steps;

        DispatchRecord rec;
        rec.step = k;
        rec.t = static_cast<double>(k) * fleet.dt * 3600.0;
        rec.r = signal.empty() ? 0.0 : signal[k];
        rec.p0 = env.p0;
        rec.dp_req = dp_series[k];
        rec.p_pv = p_pv;
        rec.p_cl = sp.p_cl;
        rec.p_batt = p_batt;
        rec.p_curtailed = sp.p_curtailed;
        rec.p_hes = (p_pv - sp.p_curtailed) - sp.p_cl + p_batt;
        rec.soc_after = soc_next;
        out.shortfall += std::abs(rec.dp_req - rec.delivered_dp());
        out.records.push_back(rec);
        soc = soc_next;
    }
    return out;
}

inline RunResult run_guarded(const GuardConfig& cfg, const AssetFleet& fleet, Scenario scenario,
                             std::span<const double> dp_series, std::span<const double> pv,
                             double soc0, std::span<const double> signal = {}) {
    return run_dispatch(fleet, scenario, dp_series, pv, soc0, cfg, signal);
}

inline RunResult run_unguarded(const AssetFleet& fleet, Scenario scenario,
                               std::span<const double> dp_series, std::span<const double> pv,
                               double soc0, std::span<const double> signal = {}) {
    return run_dispatch(fleet, scenario, dp_series, pv, soc0, std::nullopt, signal);
}

}  // namespace hes
