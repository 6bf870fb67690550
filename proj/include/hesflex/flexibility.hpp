#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "assets.hpp"

namespace hes {

// Operating scenarios for nominal power and deviation bounds.
//   S1  maximum flexibility, no PV curtailment
//   S2  flexible sustainable load (load runs on PV only)
//   S3  load matches PV, battery-only flexibility
//   S4  maximum symmetric flexibility with curtailment
//   S5  maximum asymmetric flexibility with curtailment
enum class Scenario { S1, S2, S3, S4, S5 };

inline constexpr std::array<Scenario, 5> kAllScenarios = {Scenario::S1, Scenario::S2, Scenario::S3,
                                                          Scenario::S4, Scenario::S5};

inline std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::S1: return "S1";
        case Scenario::S2: return "S2";
        case Scenario::S3: return "S3";
        case Scenario::S4: return "S4";
        case Scenario::S5: return "S5";
    }
    return "?";
}

// Accepts "S1".."S5" and "s1".."s5".
inline std::optional<Scenario> parse_scenario(std::string_view text) {
    if (text.size() != 2 || (text[0] != 'S' && text[0] != 's')) return std::nullopt;
    for (auto s : kAllScenarios)
        if (text[1] == to_string(s)[1]) return s;
    return std::nullopt;
}

inline bool allows_curtailment(Scenario s) { return s == Scenario::S4 || s == Scenario::S5; }

struct FlexEnvelope {
    double p0 = 0;     // nominal net power, MW
    double dp_lo = 0;  // <= 0
    double dp_hi = 0;  // >= 0

    double width() const { return dp_hi - dp_lo; }
};

inline FlexEnvelope envelope(Scenario scenario, const AssetFleet& fleet, double p_pv) {
    if (p_pv < 0) throw DomainError("PV power must be >= 0");
    const double batt = fleet.battery.p_max;
    const double load = fleet.load.p_max;
    switch (scenario) {
        case Scenario::S1: {
            const double half = batt + 0.5 * load;
            return {p_pv - 0.5 * load, -half, half};
        }
        case Scenario::S2: {
            const double green = 0.5 * std::min(p_pv, load);
            return {green, -(batt + green), batt + green};
        }
        case Scenario::S3:
            return {0.0, -batt, batt};
        case Scenario::S4: {
            const double half = batt + 0.5 * (p_pv + load);
            return {0.5 * (p_pv - load), -half, half};
        }
        case Scenario::S5:
            return {0.0, -batt - load, batt + p_pv};
    }
    throw DomainError("unknown scenario");
}

inline bool contains(const FlexEnvelope& env, double dp) { return env.dp_lo <= dp && dp <= env.dp_hi; }

}  // namespace hes
