#include <gtest/gtest.h>

#include <random>

#include "hesflex/hesflex.hpp"

namespace {

struct MilpCase {
    double e_cap;
    double dt_s;
    double eta;
    double soc0;
    std::vector<double> r;
    std::vector<double> pv;
    double objective;
};

// Optimal objectives from an independent MILP solve (HiGHS), see reference/milp_reference.py.
const std::vector<MilpCase>& milp_cases() {
    static const std::vector<MilpCase> cases = {
#include "reference/milp_cases.inc"
    };
    return cases;
}

hes::OracleProblem to_problem(const MilpCase& c, hes::OracleBackend backend) {
    hes::OracleProblem p;
    p.signal = c.r;
    p.pv = c.pv;
    p.capacity = 6.5;
    p.fleet.battery.e_cap = c.e_cap;
    p.fleet.battery.eta_inv = c.eta;
    p.fleet.dt = c.dt_s / 3600.0;
    p.soc0 = c.soc0;
    p.backend = backend;
    return p;
}

void expect_feasible(const hes::OracleProblem& p, const hes::OracleSolution& sol) {
    const auto problems = hes::audit_trace(sol.records, p.fleet, p.soc0, hes::Scenario::S1);
    EXPECT_TRUE(problems.empty()) << (problems.empty() ? "" : problems.front());
    double recomputed = 0;
    for (const auto& rec : sol.records) recomputed += std::abs(rec.dp_req - rec.delivered_dp());
    EXPECT_NEAR(sol.objective, recomputed, 1e-6);
}

}  // namespace

TEST(Oracle, ExactBackendMatchesMilpReference) {
    for (std::size_t i = 0; i < milp_cases().size(); ++i) {
        SCOPED_TRACE("case " + std::to_string(i));
        const auto& c = milp_cases()[i];
        const auto p = to_problem(c, hes::OracleBackend::Exact);
        const auto sol = hes::solve(p);
        EXPECT_NEAR(sol.objective, c.objective, 1e-6);
        EXPECT_EQ(sol.discretization_bound, 0.0);
        expect_feasible(p, sol);
    }
}

TEST(Oracle, GridBackendWithinDiscretizationBound) {
    for (std::size_t i = 0; i < milp_cases().size(); ++i) {
        SCOPED_TRACE("case " + std::to_string(i));
        const auto& c = milp_cases()[i];
        const auto p = to_problem(c, hes::OracleBackend::SocGrid);
        const auto sol = hes::solve(p);
        EXPECT_GE(sol.objective, c.objective - 1e-6);
        EXPECT_LE(sol.objective, c.objective + static_cast<double>(c.r.size()) * sol.discretization_bound + 1e-6);
        expect_feasible(p, sol);
    }
}

TEST(Oracle, OracleNeverWorseThanRuleOnReferenceCases) {
    for (const auto& c : milp_cases()) {
        const auto cmp = hes::compare_with_rule(to_problem(c, hes::OracleBackend::Exact));
        EXPECT_LE(cmp.objective_oracle, cmp.objective_rule + 1e-9);
    }
}

TEST(Oracle, SingleStepSlackSocIsPerfect) {
    hes::OracleProblem p;
    p.signal = {0.4};
    p.pv = {2.0};
    for (auto backend : {hes::OracleBackend::SocGrid, hes::OracleBackend::Exact}) {
        p.backend = backend;
        const auto sol = hes::solve(p);
        EXPECT_NEAR(sol.objective, 0.0, 1e-12);
        EXPECT_NEAR(sol.records[0].delivered_dp(), 6.5 * 0.4, 1e-12);
    }
}

TEST(Oracle, SaturatedDemandCostsExcessOverEnvelope) {
    hes::OracleProblem p;
    p.capacity = 9.0;
    p.signal = {1.0, -1.0, 0.9, -0.8};
    p.pv = {1.0, 0.0, 2.5, 3.0};
    p.backend = hes::OracleBackend::Exact;
    double expected = 0;
    for (double r : p.signal) expected += std::max(0.0, std::abs(9.0 * r) - 6.5);
    EXPECT_NEAR(hes::solve(p).objective, expected, 1e-9);
}

TEST(Oracle, EnergyBudgetExhaustedAtLowerBound) {
    // 60 s steps on a 0.1 MWh pack: starting at e_min nothing can be discharged,
    // so each +1 step delivers only the load swing of 1.5 MW.
    hes::OracleProblem p;
    p.fleet.battery.e_cap = 0.1;
    p.fleet.dt = 60.0 / 3600.0;
    p.soc0 = p.fleet.battery.e_min;
    p.signal = {1.0, 1.0, 1.0};
    p.pv = {1.0, 1.0, 1.0};
    p.backend = hes::OracleBackend::Exact;
    const auto sol = hes::solve(p);
    EXPECT_NEAR(sol.objective, 3 * (6.5 - 1.5), 1e-9);
}

TEST(Oracle, ZeroSignalGivesZeroObjectives) {
    hes::OracleProblem p;
    p.signal.assign(20, 0.0);
    p.pv.assign(20, 1.2);
    p.backend = hes::OracleBackend::Exact;
    const auto cmp = hes::compare_with_rule(p);
    EXPECT_EQ(cmp.objective_rule, 0.0);
    EXPECT_NEAR(cmp.objective_oracle, 0.0, 1e-12);
    EXPECT_FALSE(cmp.score_rule.has_value());
}

TEST(Oracle, TiesPreferLessBatteryPower) {
    hes::OracleProblem p;
    p.signal = {0.1};
    p.pv = {1.0};
    p.backend = hes::OracleBackend::Exact;
    const auto sol = hes::solve(p);
    EXPECT_NEAR(sol.records[0].p_batt, 0.0, 1e-12);
    EXPECT_NEAR(sol.objective, 0.0, 1e-12);
}

TEST(Oracle, RejectsInvalidProblems) {
    hes::OracleProblem p;
    EXPECT_THROW(hes::solve(p), hes::InputError);
    p.signal = {0.0};
    p.pv = {0.0};
    p.soc0 = 0.05;
    EXPECT_THROW(hes::solve(p), hes::InputError);
    p.soc0 = 0.5;
    p.soc_grid = 2;
    EXPECT_THROW(hes::solve(p), hes::InputError);
}

TEST(Oracle, BackendNamesRoundTrip) {
    for (auto b : {hes::OracleBackend::SocGrid, hes::OracleBackend::Exact})
        EXPECT_EQ(hes::parse_backend(hes::to_string(b)), b);
    EXPECT_FALSE(hes::parse_backend("bnb").has_value());
}
