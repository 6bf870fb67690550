#pragma once

// Physical models of the three assets behind the grid connection point:
// PV plant (single-diode cell scaled to plant size), battery (energy
// reservoir), and a controllable load bounded by its rating.

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace hes {

struct PvParams {
    double i_sc_stc = 3.8;        // A at 1000 W/m2
    double i_0 = 6e-10;           // A
    double r_p = 6.6;             // ohm
    double r_s = 0.005;           // ohm
    double thermal_coeff = 38.9;  // 1/V, q/kT at 300 K
    double n_cell = 1.0;
    double eta_pv = 0.96;
    double p_pv_rated = 3.0;  // MW
};

struct BatteryParams {
    double p_max = 5.0;    // MW
    double e_cap = 5.0;    // MWh
    double eta_inv = 0.95;
    double e_min = 0.1;    // p.u.
    double e_max = 0.9;    // p.u.
};

struct BatteryState {
    double soc = 0.5;  // p.u.
};

struct LoadParams {
    double p_max = 3.0;  // MW
};

struct AssetFleet {
    PvParams pv;
    BatteryParams battery;
    LoadParams load;
    double dt = 2.0 / 3600.0;  // hours
};

// Thrown when a battery step would leave [e_min, e_max]. The clipped state is
// what the reservoir would hold if the excess were simply discarded.
class BoundViolation : public Error {
public:
    BoundViolation(const std::string& what, BatteryState clipped)
        : Error(what), clipped_(clipped) {}

    BatteryState clipped_state() const noexcept { return clipped_; }

private:
    BatteryState clipped_;
};

// SoC landing within this distance outside a bound is snapped onto the bound.
inline constexpr double kSocBoundTolerance = 1e-12;

inline void validate(const PvParams& p) {
    if (!(p.r_p > 0)) throw InputError("pv.r_p must be > 0");
    if (!(p.r_s >= 0)) throw InputError("pv.r_s must be >= 0");
    if (!(p.i_0 > 0)) throw InputError("pv.i_0 must be > 0");
    if (!(p.i_sc_stc >= 0)) throw InputError("pv.i_sc_stc must be >= 0");
    if (!(p.eta_pv > 0 && p.eta_pv <= 1)) throw InputError("pv.eta must be in (0, 1]");
    if (!(p.n_cell >= 1)) throw InputError("pv.n_cell must be >= 1");
    if (!(p.p_pv_rated > 0)) throw InputError("pv.p_rated must be > 0");
}

inline void validate(const BatteryParams& b) {
    if (!(b.p_max > 0)) throw InputError("battery.p_max must be > 0");
    if (!(b.e_cap > 0)) throw InputError("battery.e_cap must be > 0");
    if (!(b.eta_inv > 0 && b.eta_inv <= 1)) throw InputError("battery.eta must be in (0, 1]");
    if (!(b.e_min >= 0 && b.e_min < b.e_max && b.e_max <= 1))
        throw InputError("battery SoC bounds must satisfy 0 <= e_min < e_max <= 1");
}

inline void validate(const LoadParams& l) {
    if (!(l.p_max >= 0)) throw InputError("load.p_max must be >= 0");
}

inline void validate(const AssetFleet& f) {
    validate(f.pv);
    validate(f.battery);
    validate(f.load);
    if (!(f.dt > 0)) throw InputError("dt must be > 0");
}

// ---------------------------------------------------------------------------
// PV

namespace detail {

inline double cell_current(const PvParams& p, double i_sc, double v) {
    return i_sc - p.i_0 * std::expm1(p.thermal_coeff * v) - v / p.r_p;
}

inline double cell_power(const PvParams& p, double i_sc, double v) {
    const double i = cell_current(p, i_sc, v);
    return i * (v - i * p.r_s);
}

// Junction voltage where the cell current crosses zero.
inline double open_circuit_voltage(const PvParams& p, double i_sc) {
    if (cell_current(p, i_sc, 0.0) <= 0.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (cell_current(p, i_sc, hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double i = cell_current(p, i_sc, mid);
        if (std::abs(i) <= 1e-9) return mid;
        (i > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Maximum power of one cell (W) at the given irradiance, found by golden-section
// search over the junction voltage between short circuit and open circuit.
inline double pv_cell_mpp(const PvParams& p, double irradiance) {
    if (irradiance < 0) throw DomainError("irradiance must be >= 0");
    const double i_sc = p.i_sc_stc * irradiance / 1000.0;
    double a = 0.0;
    double b = detail::open_circuit_voltage(p, i_sc);
    if (b <= 0.0) return 0.0;

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = detail::cell_power(p, i_sc, c);
    double fd = detail::cell_power(p, i_sc, d);
    while (b - a > 1e-12) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = detail::cell_power(p, i_sc, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = detail::cell_power(p, i_sc, d);
        }
    }
    return std::max(0.0, detail::cell_power(p, i_sc, 0.5 * (a + b)));
}

// Plant output in MW, clamped to [0, p_pv_rated].
inline double pv_power(const PvParams& p, double irradiance) {
    if (irradiance < 0) throw DomainError("irradiance must be >= 0");
    const double watts = p.eta_pv * p.n_cell * pv_cell_mpp(p, irradiance);
    return std::clamp(watts * 1e-6, 0.0, p.p_pv_rated);
}

// Sets n_cell so that 1000 W/m2 produces exactly the rated plant power.
inline PvParams scale_cells_to_rating(PvParams p) {
    const double cell_w = pv_cell_mpp(p, 1000.0);
    if (cell_w <= 0) throw InputError("pv cell produces no power at 1000 W/m2");
    p.n_cell = std::max(1.0, p.p_pv_rated * 1e6 / (p.eta_pv * cell_w));
    return p;
}

// ---------------------------------------------------------------------------
// Battery

// Energy reservoir update. p_charge <= 0 consumes power, p_discharge >= 0 injects it.
inline BatteryState battery_step(const BatteryParams& b, BatteryState state, double p_charge,
                                 double p_discharge, double dt) {
    if (p_charge > 0 || p_charge < -b.p_max)
        throw ContractViolation("charging power must lie in [-p_max, 0]");
    if (p_discharge < 0 || p_discharge > b.p_max)
        throw ContractViolation("discharging power must lie in [0, p_max]");
    if (p_charge != 0 && p_discharge != 0)
        throw ContractViolation("battery cannot charge and discharge in the same step");

    double soc = state.soc - (dt / b.e_cap) * (b.eta_inv * p_charge + p_discharge / b.eta_inv);
    if (soc < b.e_min) {
        if (soc < b.e_min - kSocBoundTolerance)
            throw BoundViolation("SoC would fall below e_min", BatteryState{b.e_min});
        soc = b.e_min;
    } else if (soc > b.e_max) {
        if (soc > b.e_max + kSocBoundTolerance)
            throw BoundViolation("SoC would rise above e_max", BatteryState{b.e_max});
        soc = b.e_max;
    }
    return BatteryState{soc};
}

// Same update driven by a signed net power (+ discharge, - charge).
inline BatteryState battery_step_net(const BatteryParams& b, BatteryState state, double p_batt,
                                     double dt) {
    return p_batt < 0 ? battery_step(b, state, p_batt, 0.0, dt)
                      : battery_step(b, state, 0.0, p_batt, dt);
}

struct PowerRange {
    double lo;  // most negative (charging) power
    double hi;  // most positive (discharging) power
};

// Net battery power admissible for one step from `soc` without leaving the SoC bounds.
inline PowerRange battery_power_limits(const BatteryParams& b, double soc, double dt) {
    const double discharge = std::max(0.0, (soc - b.e_min) * b.e_cap * b.eta_inv / dt);
    const double charge = std::max(0.0, (b.e_max - soc) * b.e_cap / (b.eta_inv * dt));
    return {-std::min(b.p_max, charge), std::min(b.p_max, discharge)};
}

// ---------------------------------------------------------------------------
// Controllable load

inline bool load_feasible(const LoadParams& l, double p_cl) { return p_cl >= 0 && p_cl <= l.p_max; }

}  // namespace hes
