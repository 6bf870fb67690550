#pragma once

// Offline optimal dispatch for the no-curtailment maximum-flexibility scenario:
// minimize the L1 error between C*r and the delivered deviation over a horizon,
// subject to power balance, asset limits, SoC dynamics and exclusive
// charge/discharge. Assumes the whole signal and PV profile are known in
// advance, so results are an offline benchmark, not a controller.
//
// The state is the SoC. Each step withdraws energy s = a*u/eta (discharge) or
// a*u*eta (charge), a = dt/E_C, with stage cost dist(C*r, [u - h, u + h]),
// h = P_CL/2, because the load can shift the delivered deviation by +-h around
// the battery power u. Exclusive charge/discharge is structural: u has one sign.
//
// Two backends build the cost-to-go V_k(e):
//   SocGrid  V_k sampled on a uniform SoC grid, linear in between. Each grid
//            point is minimized exactly over the piecewise-linear interpolant.
//   Exact    V_k kept as a continuous piecewise-linear function, obtained as the
//            min-plus convolution of the stage cost with V_{k+1}.
// Both share the forward pass, which rolls the true (continuous) SoC forward.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <string>
#include <vector>

#include "assets.hpp"
#include "dispatch.hpp"
#include "flexibility.hpp"
#include "market.hpp"
#include "soc_guard.hpp"

namespace hes {

enum class OracleBackend { SocGrid, Exact };

inline std::string_view to_string(OracleBackend b) {
    return b == OracleBackend::SocGrid ? "soc-dp" : "exact";
}

inline std::optional<OracleBackend> parse_backend(std::string_view text) {
    if (text == "soc-dp" || text == "grid") return OracleBackend::SocGrid;
    if (text == "exact") return OracleBackend::Exact;
    return std::nullopt;
}

inline constexpr std::string_view kOracleLabel = "offline-benchmark";

struct OracleProblem {
    std::vector<double> signal;  // r[k]
    std::vector<double> pv;      // MW
    double capacity = 6.5;       // MW
    AssetFleet fleet;
    double soc0 = 0.5;
    std::size_t soc_grid = 2001;
    OracleBackend backend = OracleBackend::SocGrid;

    std::size_t horizon() const { return signal.size(); }
};

struct OracleSolution {
    std::vector<DispatchRecord> records;
    double objective = 0;             // recomputed sum |C r - delivered|, MW-steps
    double model_objective = 0;       // cost-to-go at soc0 as seen by the backend
    double discretization_bound = 0;  // 0 for the exact backend
    OracleBackend backend = OracleBackend::SocGrid;
};

namespace oracle_detail {

// Continuous piecewise-linear function on [xs.front(), xs.back()].
struct Pwl {
    std::vector<double> xs;
    std::vector<double> ys;

    double operator()(double x) const {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const auto i = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + w * (ys[i] - ys[i - 1]);
    }
};

struct StepModel {
    double target;   // C * r[k]
    double half;     // h
    double p_max;
    double a;        // dt / E_C
    double eta;

    double energy(double u) const { return u >= 0 ? a * u / eta : a * u * eta; }
    double power(double s) const { return s >= 0 ? s * eta / a : s / (a * eta); }
    double s_min() const { return energy(-p_max); }
    double s_max() const { return energy(p_max); }

    double cost_of_power(double u) const { return std::max(0.0, std::abs(target - u) - half); }
    double cost(double s) const { return cost_of_power(power(s)); }

    // Breakpoints of the stage cost in s, sorted, spanning [s_min, s_max].
    std::vector<double> breakpoints() const {
        std::vector<double> bp = {s_min(), 0.0, s_max()};
        for (double u : {target - half, target + half})
            if (u > -p_max && u < p_max) bp.push_back(energy(u));
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
        return bp;
    }
};

// Value of s minimizing stage cost plus cost-to-go, over a candidate set that
// contains every breakpoint of the (piecewise-linear) objective. Ties go to the
// smaller |u|.
template <class CostToGo, class ForEachKnot>
double best_withdrawal(const StepModel& m, double e, double e_lo, double e_hi,
                       const std::vector<double>& stage_bps, const CostToGo& v_next,
                       const ForEachKnot& for_each_knot, double* best_value) {
    const double lo = std::max(m.s_min(), e - e_hi);
    const double hi = std::min(m.s_max(), e - e_lo);
    double best_s = std::clamp(0.0, lo, hi);
    double best = m.cost(best_s) + v_next(e - best_s);
    const auto consider = [&](double s) {
        if (s < lo || s > hi) return;
        const double val = m.cost(s) + v_next(e - s);
        const double tol = 1e-12 * (1.0 + std::abs(best));
        if (val < best - tol ||
            (val <= best + tol && std::abs(m.power(s)) < std::abs(m.power(best_s)))) {
            best = std::min(best, val);
            best_s = s;
        }
    };
    consider(lo);
    consider(hi);
    for (double s : stage_bps) consider(s);
    for_each_knot(e - hi, e - lo, [&](double x) { consider(e - x); });
    if (best_value) *best_value = best;
    return best_s;
}

// -- Grid backend -----------------------------------------------------------

struct GridFunction {
    double lo;
    double step;
    std::vector<double> ys;

    double operator()(double x) const {
        const double f = (x - lo) / step;
        if (f <= 0) return ys.front();
        const auto n = ys.size() - 1;
        if (f >= static_cast<double>(n)) return ys.back();
        const auto i = static_cast<std::size_t>(f);
        const double w = f - static_cast<double>(i);
        return i + 1 <= n ? ys[i] + w * (ys[i + 1] - ys[i]) : ys[i];
    }

    template <class Fn>
    void for_each_knot(double from, double to, Fn&& fn) const {
        const auto n = static_cast<long>(ys.size()) - 1;
        long i0 = static_cast<long>(std::ceil((from - lo) / step));
        long i1 = static_cast<long>(std::floor((to - lo) / step));
        i0 = std::max(i0, 0L);
        i1 = std::min(i1, n);
        for (long i = i0; i <= i1; ++i) fn(lo + static_cast<double>(i) * step);
    }
};

// -- Exact backend ----------------------------------------------------------

struct Segment {
    double x0, x1;  // x0 < x1
    double y0;      // value at x0
    double slope;

    double at(double x) const { return y0 + slope * (x - x0); }
};

inline void push_segment(std::vector<Segment>& out, double x0, double x1, double y0, double slope,
                         double lo, double hi) {
    const double a = std::max(x0, lo);
    const double b = std::min(x1, hi);
    if (!(b > a)) return;
    out.push_back({a, b, y0 + slope * (a - x0), slope});
}

// Lower envelope of segments over [lo, hi], assuming the segments jointly cover it.
inline Pwl lower_envelope(std::vector<Segment> segs, double lo, double hi) {
    std::vector<double> events;
    events.reserve(2 * segs.size() + 2);
    events.push_back(lo);
    events.push_back(hi);
    for (const auto& s : segs) {
        events.push_back(s.x0);
        events.push_back(s.x1);
    }
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    std::sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) { return a.x0 < b.x0; });

    Pwl out;
    std::vector<const Segment*> active;
    std::size_t next = 0;
    for (std::size_t e = 0; e + 1 < events.size(); ++e) {
        const double xa = events[e];
        const double xb = events[e + 1];
        while (next < segs.size() && segs[next].x0 <= xa) active.push_back(&segs[next++]);
        std::erase_if(active, [&](const Segment* s) { return s->x1 <= xa; });
        if (active.empty()) continue;

        const Segment* cur = nullptr;
        double cur_val = std::numeric_limits<double>::infinity();
        for (const auto* s : active) {
            const double v = s->at(xa);
            if (v < cur_val || (v == cur_val && s->slope < cur->slope)) {
                cur = s;
                cur_val = v;
            }
        }
        if (out.xs.empty() || out.xs.back() < xa) {
            out.xs.push_back(xa);
            out.ys.push_back(cur_val);
        }
        double x = xa;
        while (true) {
            const Segment* nxt = nullptr;
            double x_cross = xb;
            for (const auto* s : active) {
                if (s->slope >= cur->slope) continue;
                const double gap = s->at(x) - cur->at(x);
                const double xc = x + std::max(0.0, gap) / (cur->slope - s->slope);
                if (xc < x_cross || (xc == x_cross && nxt && s->slope < nxt->slope)) {
                    x_cross = xc;
                    nxt = s;
                }
            }
            if (!nxt || x_cross >= xb) break;
            if (x_cross > out.xs.back()) {
                out.xs.push_back(x_cross);
                out.ys.push_back(cur->at(x_cross));
            }
            cur = nxt;
            x = x_cross;
        }
        out.xs.push_back(xb);
        out.ys.push_back(cur->at(xb));
    }
    return out;
}

// Drops knots that lie on the line through their neighbours.
inline Pwl simplify(const Pwl& f) {
    Pwl out;
    const std::size_t n = f.xs.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!out.xs.empty() && f.xs[i] - out.xs.back() <= 1e-15) {
            out.ys.back() = std::min(out.ys.back(), f.ys[i]);
            continue;
        }
        if (out.xs.size() >= 1 && i + 1 < n) {
            const double x0 = out.xs.back(), y0 = out.ys.back();
            const double x2 = f.xs[i + 1], y2 = f.ys[i + 1];
            const double interp = y0 + (y2 - y0) * (f.xs[i] - x0) / (x2 - x0);
            if (std::abs(interp - f.ys[i]) <= 1e-12 * (1.0 + std::abs(f.ys[i]))) continue;
        }
        out.xs.push_back(f.xs[i]);
        out.ys.push_back(f.ys[i]);
    }
    return out;
}

// V(e) = min_s cost(s) + next(e - s) over e in [lo, hi].
inline Pwl convolve(const StepModel& m, const Pwl& next, double lo, double hi) {
    const auto bps = m.breakpoints();
    std::vector<Segment> segs;
    segs.reserve(8 * bps.size() * next.xs.size());
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
        const double alpha = bps[i], beta = bps[i + 1];
        const double c_alpha = m.cost(alpha), c_beta = m.cost(beta);
        const double g = (c_beta - c_alpha) / (beta - alpha);
        for (std::size_t j = 0; j + 1 < next.xs.size(); ++j) {
            const double gamma = next.xs[j], delta = next.xs[j + 1];
            const double v_gamma = next.ys[j], v_delta = next.ys[j + 1];
            const double hj = (v_delta - v_gamma) / (delta - gamma);
            if (g >= hj) {
                // withdraw as little as possible: s = max(alpha, e - delta)
                push_segment(segs, alpha + gamma, alpha + delta, c_alpha + v_gamma, hj, lo, hi);
                push_segment(segs, alpha + delta, beta + delta, c_alpha + v_delta, g, lo, hi);
            } else {
                // withdraw as much as possible: s = min(beta, e - gamma)
                push_segment(segs, alpha + gamma, beta + gamma, c_alpha + v_gamma, g, lo, hi);
                push_segment(segs, beta + gamma, beta + delta, c_beta + v_gamma, hj, lo, hi);
            }
        }
    }
    return simplify(lower_envelope(std::move(segs), lo, hi));
}

inline StepModel step_model(const OracleProblem& p, std::size_t k) {
    const auto& f = p.fleet;
    return StepModel{p.capacity * p.signal[k], 0.5 * f.load.p_max, f.battery.p_max,
                     f.dt / f.battery.e_cap, f.battery.eta_inv};
}

inline void validate(const OracleProblem& p) {
    validate(p.fleet);
    if (p.signal.empty()) throw InputError("oracle horizon must be >= 1 step");
    if (p.pv.size() != p.signal.size()) throw InputError("oracle signal and PV lengths differ");
    if (p.soc_grid < 3) throw InputError("oracle soc_grid must be >= 3");
    if (p.soc0 < p.fleet.battery.e_min || p.soc0 > p.fleet.battery.e_max)
        throw InputError("oracle initial SoC outside battery bounds");
    if (!(p.capacity >= 0)) throw InputError("oracle capacity must be >= 0");
    for (double v : p.pv)
        if (v < 0) throw DomainError("PV power must be >= 0");
}

}  // namespace oracle_detail

inline OracleSolution solve(const OracleProblem& problem) {
    using namespace oracle_detail;
    validate(problem);
    const auto& f = problem.fleet;
    const auto& b = f.battery;
    const std::size_t n = problem.horizon();
    const double lo = b.e_min, hi = b.e_max;

    OracleSolution sol;
    sol.backend = problem.backend;

    std::vector<Pwl> exact;
    std::vector<GridFunction> grid;
    if (problem.backend == OracleBackend::Exact) {
        exact.resize(n + 1);
        exact[n] = Pwl{{lo, hi}, {0.0, 0.0}};
        for (std::size_t k = n; k-- > 0;) exact[k] = convolve(step_model(problem, k), exact[k + 1], lo, hi);
    } else {
        const std::size_t g = problem.soc_grid;
        const double step = (hi - lo) / static_cast<double>(g - 1);
        grid.assign(n + 1, GridFunction{lo, step, std::vector<double>(g, 0.0)});
        for (std::size_t k = n; k-- > 0;) {
            const StepModel m = step_model(problem, k);
            const auto bps = m.breakpoints();
            const GridFunction& next = grid[k + 1];
            auto& ys = grid[k].ys;
            for (std::size_t i = 0; i < g; ++i) {
                const double e = lo + static_cast<double>(i) * step;
                double val = 0;
                best_withdrawal(
                    m, e, lo, hi, bps, next,
                    [&](double from, double to, auto&& fn) { next.for_each_knot(from, to, fn); }, &val);
                ys[i] = val;
            }
        }
        sol.discretization_bound = step * b.e_cap / (b.eta_inv * f.dt);
    }

    // Forward pass from the true initial SoC.
    sol.records.reserve(n);
    double soc = problem.soc0;
    for (std::size_t k = 0; k < n; ++k) {
        const StepModel m = step_model(problem, k);
        const auto bps = m.breakpoints();
        double val = 0;
        double s;
        if (problem.backend == OracleBackend::Exact) {
            const Pwl& next = exact[k + 1];
            s = best_withdrawal(
                m, soc, lo, hi, bps, next,
                [&](double from, double to, auto&& fn) {
                    auto it = std::lower_bound(next.xs.begin(), next.xs.end(), from);
                    for (; it != next.xs.end() && *it <= to; ++it) fn(*it);
                },
                &val);
        } else {
            const GridFunction& next = grid[k + 1];
            s = best_withdrawal(
                m, soc, lo, hi, bps, next,
                [&](double from, double to, auto&& fn) { next.for_each_knot(from, to, fn); }, &val);
        }
        if (k == 0) sol.model_objective = val;

        const double u = std::clamp(m.power(s), -b.p_max, b.p_max);
        const double p_cl = std::clamp(u + m.half - m.target, 0.0, f.load.p_max);
        const PowerRange limits = battery_power_limits(b, soc, f.dt);
        const double u_ok = std::clamp(u, limits.lo, limits.hi);

        DispatchRecord rec;
        rec.step = k;
        rec.t = static_cast<double>(k) * f.dt * 3600.0;
        rec.r = problem.signal[k];
        rec.p_pv = problem.pv[k];
        rec.p0 = rec.p_pv - m.half;
        rec.dp_req = m.target;
        rec.p_cl = p_cl;
        rec.p_batt = u_ok;
        rec.p_curtailed = 0.0;
        rec.p_hes = rec.p_pv - p_cl + u_ok;
        rec.soc_after = battery_step_net(b, BatteryState{soc}, u_ok, f.dt).soc;
        sol.objective += std::abs(rec.dp_req - rec.delivered_dp());
        soc = rec.soc_after;
        sol.records.push_back(rec);
    }
    return sol;
}

struct OracleComparison {
    double objective_rule = 0;
    double objective_oracle = 0;
    std::optional<double> score_rule;    // undefined for an all-zero signal
    std::optional<double> score_oracle;
    double discretization_bound = 0;
    RunResult rule;
    OracleSolution oracle;
};

// Rule-based S1 dispatch and the oracle on identical inputs.
inline OracleComparison compare_with_rule(const OracleProblem& problem) {
    oracle_detail::validate(problem);
    std::vector<double> dp(problem.signal.size());
    for (std::size_t k = 0; k < dp.size(); ++k) dp[k] = problem.capacity * problem.signal[k];

    OracleComparison out;
    out.rule = run_unguarded(problem.fleet, Scenario::S1, dp, problem.pv, problem.soc0, problem.signal);
    out.oracle = solve(problem);
    out.objective_rule = out.rule.shortfall;
    out.objective_oracle = out.oracle.objective;
    out.discretization_bound = out.oracle.discretization_bound;

    const auto delivered = [](const std::vector<DispatchRecord>& recs) {
        std::vector<double> d(recs.size());
        for (std::size_t k = 0; k < recs.size(); ++k) d[k] = recs[k].delivered_dp();
        return d;
    };
    try {
        out.score_rule = performance_score(problem.capacity, problem.signal, delivered(out.rule.records));
        out.score_oracle =
            performance_score(problem.capacity, problem.signal, delivered(out.oracle.records));
    } catch (const UndefinedScore&) {
        out.score_rule.reset();
        out.score_oracle.reset();
    }
    return out;
}

}  // namespace hes
