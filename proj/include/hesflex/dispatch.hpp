#pragma once

// Real-time disaggregation of a requested net-power deviation into
// controllable-load and battery setpoints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assets.hpp"
#include "flexibility.hpp"

namespace hes {

inline constexpr double kBalanceTolerance = 1e-9;  // MW

struct DispatchRecord {
    std::size_t step = 0;
    double t = 0;        // seconds from run start
    double r = 0;        // regulation signal value behind dp_req
    double p_hes = 0;
    double p0 = 0;
    double dp_req = 0;
    double p_pv = 0;
    double p_cl = 0;
    double p_batt = 0;   // + discharge, - charge
    double p_curtailed = 0;
    double soc_after = 0;

    double delivered_dp() const { return p_hes - p0; }
    double balance_residual() const { return p_hes - ((p_pv - p_curtailed) - p_cl + p_batt); }
};

struct LoadBattery {
    double p_cl = 0;
    double p_batt = 0;
};

struct Setpoints {
    double p_cl = 0;
    double p_batt = 0;
    double p_curtailed = 0;

    double net(double p_pv) const { return (p_pv - p_curtailed) - p_cl + p_batt; }
};

// Load first: the load absorbs the deviation up to its rating, the battery covers the rest.
inline LoadBattery allocate_priority_load(const AssetFleet& fleet, double p_pv, double p0, double dp) {
    const double load_target = p_pv - p0 - dp;
    const double p_cl = std::clamp(load_target, 0.0, fleet.load.p_max);
    const double p_batt = std::clamp(p_cl - load_target, -fleet.battery.p_max, fleet.battery.p_max);
    return {p_cl, p_batt};
}

// Linear split for a load that may only consume PV power; nominal point is
// half the available PV. Requires load rating >= p_pv.
inline LoadBattery allocate_green_load(const AssetFleet& fleet, double p_pv, double dp) {
    const double batt = fleet.battery.p_max;
    const double denom = 2.0 * batt + p_pv;
    if (denom == 0.0) return {0.0, 0.0};
    const double p_cl =
        std::clamp(p_pv * (batt + 0.5 * p_pv - dp) / denom, 0.0, fleet.load.p_max);
    const double p_batt = std::clamp(batt * (2.0 * dp) / denom, -batt, batt);
    return {std::min(p_cl, p_pv), p_batt};
}

// Routes a deviation to the scenario's allocation rule. Throws InfeasibleDispatch
// when dp lies outside the envelope or when the rule cannot balance exactly.
inline Setpoints allocate(Scenario scenario, const AssetFleet& fleet, double p_pv, double dp) {
    const FlexEnvelope env = envelope(scenario, fleet, p_pv);
    if (!contains(env, dp))
        throw InfeasibleDispatch("deviation " + std::to_string(dp) + " MW outside " +
                                 std::string(to_string(scenario)) + " envelope [" +
                                 std::to_string(env.dp_lo) + ", " + std::to_string(env.dp_hi) + "]");

    Setpoints sp;
    switch (scenario) {
        case Scenario::S1: {
            const auto lb = allocate_priority_load(fleet, p_pv, env.p0, dp);
            sp = {lb.p_cl, lb.p_batt, 0.0};
            break;
        }
        case Scenario::S2: {
            // Above the load rating the green split is undefined; the load-first
            // rule around the capped nominal point keeps p_cl below PV.
            const auto lb = p_pv <= fleet.load.p_max
                                ? allocate_green_load(fleet, p_pv, dp)
                                : allocate_priority_load(fleet, p_pv, env.p0, dp);
            sp = {lb.p_cl, lb.p_batt, 0.0};
            break;
        }
        case Scenario::S3: {
            const double p_cl = std::min(p_pv, fleet.load.p_max);
            const double p_batt =
                std::clamp(dp - p_pv + p_cl, -fleet.battery.p_max, fleet.battery.p_max);
            sp = {p_cl, p_batt, 0.0};
            break;
        }
        case Scenario::S4:
        case Scenario::S5: {
            const auto lb = allocate_priority_load(fleet, p_pv, env.p0, dp);
            const double surplus = p_pv - lb.p_cl + lb.p_batt - (env.p0 + dp);
            sp = {lb.p_cl, lb.p_batt, std::clamp(surplus, 0.0, p_pv)};
            break;
        }
    }

    const double residual = sp.net(p_pv) - (env.p0 + dp);
    if (std::abs(residual) > kBalanceTolerance)
        throw InfeasibleDispatch("scenario " + std::string(to_string(scenario)) +
                                 " cannot realize deviation " + std::to_string(dp) +
                                 " MW (residual " + std::to_string(residual) + " MW)");
    return sp;
}

// Part of the envelope that allocate() can realize. Differs from envelope()
// only for S2 and S3 when PV exceeds the load rating: surplus PV cannot be
// absorbed without curtailment, so the lower bound rises.
inline FlexEnvelope realizable_envelope(Scenario scenario, const AssetFleet& fleet, double p_pv) {
    FlexEnvelope env = envelope(scenario, fleet, p_pv);
    const double excess = p_pv - fleet.load.p_max;
    if (excess > 0 && (scenario == Scenario::S2 || scenario == Scenario::S3))
        env.dp_lo = std::min(env.dp_hi, std::max(env.dp_lo, excess - fleet.battery.p_max - env.p0));
    return env;
}

// ---------------------------------------------------------------------------
// Validators shared by rule-based and oracle trajectories.

inline std::vector<std::string> audit_record(const DispatchRecord& rec, const AssetFleet& fleet,
                                             std::optional<Scenario> scenario = std::nullopt) {
    std::vector<std::string> problems;
    const auto at = [&](const std::string& what) {
        problems.push_back("step " + std::to_string(rec.step) + ": " + what);
    };
    if (std::abs(rec.balance_residual()) > kBalanceTolerance)
        at("power balance residual " + std::to_string(rec.balance_residual()) + " MW");
    if (!load_feasible(fleet.load, rec.p_cl)) at("load setpoint out of range");
    if (std::abs(rec.p_batt) > fleet.battery.p_max) at("battery power above rating");
    if (rec.p_curtailed < 0 || rec.p_curtailed > rec.p_pv) at("curtailment out of range");
    if (scenario && !allows_curtailment(*scenario) && rec.p_curtailed != 0)
        at("curtailment in a no-curtailment scenario");
    if (rec.soc_after < fleet.battery.e_min - kSocBoundTolerance ||
        rec.soc_after > fleet.battery.e_max + kSocBoundTolerance)
        at("SoC outside battery bounds");
    return problems;
}

// Per-record checks plus the SoC recursion between consecutive records.
inline std::vector<std::string> audit_trace(std::span<const DispatchRecord> records,
                                            const AssetFleet& fleet, double soc0,
                                            std::optional<Scenario> scenario = std::nullopt,
                                            double soc_tolerance = 1e-9) {
    std::vector<std::string> problems;
    double soc = soc0;
    const auto& b = fleet.battery;
    for (const auto& rec : records) {
        auto found = audit_record(rec, fleet, scenario);
        problems.insert(problems.end(), found.begin(), found.end());
        const double drawn = rec.p_batt < 0 ? b.eta_inv * rec.p_batt : rec.p_batt / b.eta_inv;
        const double expected = soc - fleet.dt / b.e_cap * drawn;
        if (std::abs(expected - rec.soc_after) > soc_tolerance)
            problems.push_back("step " + std::to_string(rec.step) + ": SoC recursion mismatch");
        soc = rec.soc_after;
    }
    return problems;
}

}  // namespace hes
