#include <gtest/gtest.h>

#include <random>

#include "hesflex/hesflex.hpp"

namespace {
constexpr double kDt = 2.0 / 3600.0;
const hes::GuardConfig kFig{0.6, 0.4, 0.02, std::nullopt, std::nullopt};
}  // namespace

TEST(GuardStep, BandEdgeBlocksCharging) {
    const hes::BatteryParams b;
    const auto g = hes::guard_step(kFig, b, 0.6, -5.0, kDt);
    EXPECT_EQ(g.p_batt, 0.0);
    EXPECT_EQ(g.soc_next, 0.6);
    EXPECT_TRUE(g.limited);
}

TEST(GuardStep, NoTaperAtBufferEntry) {
    const hes::BatteryParams b;
    const auto g = hes::guard_step(kFig, b, 0.6 - 0.02, -5.0, kDt);
    EXPECT_EQ(g.p_batt, -5.0);
    EXPECT_FALSE(g.limited);
}

TEST(GuardStep, HalfwayIntoBufferHalvesCharging) {
    const hes::BatteryParams b;
    const auto g = hes::guard_step(kFig, b, 0.59, -5.0, kDt);
    EXPECT_NEAR(g.p_batt, -2.5, 1e-12);
    EXPECT_NEAR(g.soc_next, 0.59 + 2.5 * 0.95 * kDt / 5.0, 1e-15);
    EXPECT_GT(g.soc_next, 0.59);
}

TEST(GuardStep, DirectionSelective) {
    const hes::BatteryParams b;
    EXPECT_EQ(hes::guard_step(kFig, b, 0.6, 5.0, kDt).p_batt, 5.0);
    EXPECT_EQ(hes::guard_step(kFig, b, 0.4, -5.0, kDt).p_batt, -5.0);
    EXPECT_EQ(hes::guard_step(kFig, b, 0.4, 5.0, kDt).p_batt, 0.0);
}

TEST(GuardStep, PassThroughOutsideBuffers) {
    const hes::BatteryParams b;
    for (double soc = 0.421; soc < 0.579; soc += 0.01)
        for (double p = -5; p <= 5; p += 0.5) {
            const auto g = hes::guard_step(kFig, b, soc, p, kDt);
            EXPECT_EQ(g.p_batt, p);
            EXPECT_FALSE(g.limited);
        }
}

TEST(GuardStep, SeparateEfficiencies) {
    const hes::BatteryParams b;
    hes::GuardConfig cfg = kFig;
    cfg.eta_charge = 0.9;
    cfg.eta_discharge = 0.8;
    EXPECT_NEAR(hes::guard_step(cfg, b, 0.5, -1.0, kDt).soc_next, 0.5 + 0.9 * kDt / 5, 1e-15);
    EXPECT_NEAR(hes::guard_step(cfg, b, 0.5, 1.0, kDt).soc_next, 0.5 - kDt / (0.8 * 5), 1e-15);
}

TEST(GuardConfig, DefaultBufferAndValidation) {
    const auto cfg = hes::GuardConfig::with_default_buffer(0.7, 0.3);
    EXPECT_NEAR(cfg.buffer, 0.04, 1e-15);
    const hes::BatteryParams b;
    EXPECT_NO_THROW(hes::validate(kFig, b));
    EXPECT_THROW(hes::validate(hes::GuardConfig{0.4, 0.6, 0.02, {}, {}}, b), hes::InputError);
    EXPECT_THROW(hes::validate(hes::GuardConfig{0.6, 0.4, 0.2, {}, {}}, b), hes::InputError);
    EXPECT_THROW(hes::validate(hes::GuardConfig{0.95, 0.4, 0.02, {}, {}}, b), hes::InputError);
}

TEST(GuardConfig, ContainmentRatioForReferenceSetup) {
    // Charging side: 5 * 0.95 * dt / (5 * 0.02); discharging side divides by 0.95 instead.
    const double r = hes::containment_ratio(kFig, hes::BatteryParams{}, kDt);
    EXPECT_NEAR(r, 5.0 / 0.95 * kDt / (5.0 * 0.02), 1e-15);
    EXPECT_LT(r, 0.03);
}

TEST(RunGuarded, IdleSignalKeepsSoc) {
    const hes::AssetFleet f;
    const std::vector<double> dp(100, 0.0), pv(100, 1.0);
    const auto run = hes::run_guarded(kFig, f, hes::Scenario::S1, dp, pv, 0.5);
    for (const auto& rec : run.records) {
        EXPECT_EQ(rec.p_batt, 0.0);
        EXPECT_EQ(rec.soc_after, 0.5);
    }
}

TEST(RunGuarded, LengthMismatchAndBadStart) {
    const hes::AssetFleet f;
    const std::vector<double> dp(10, 0.0), pv(9, 1.0), pv10(10, 1.0);
    EXPECT_THROW(hes::run_guarded(kFig, f, hes::Scenario::S1, dp, pv, 0.5), hes::InputError);
    EXPECT_THROW(hes::run_guarded(kFig, f, hes::Scenario::S1, dp, pv10, 0.65), hes::InputError);
}

TEST(RunGuarded, SustainedDischargeStaysInBand) {
    const hes::AssetFleet f;
    const std::size_t n = 4 * 1800;
    const std::vector<double> dp(n, 6.5), pv(n, 0.5);
    const auto run = hes::run_guarded(kFig, f, hes::Scenario::S1, dp, pv, 0.5);
    for (const auto& rec : run.records) {
        EXPECT_GT(rec.soc_after, 0.4);
        EXPECT_LE(rec.soc_after, 0.6);
    }
    EXPECT_GT(run.limited_steps, 0u);
    EXPECT_GT(run.shortfall, 0.0);
    EXPECT_TRUE(hes::audit_trace(run.records, f, 0.5, hes::Scenario::S1).empty());

    const auto free = hes::run_unguarded(f, hes::Scenario::S1, dp, pv, 0.5);
    EXPECT_NEAR(free.records.back().soc_after, f.battery.e_min, 1e-12);
    EXPECT_TRUE(hes::audit_trace(free.records, f, 0.5, hes::Scenario::S1).empty());
}

TEST(RunGuarded, RandomSignalsStayInBand) {
    const hes::AssetFleet f;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double bias = 0.5 * u(rng);
        std::vector<double> dp(3000), pv(3000);
        for (std::size_t k = 0; k < dp.size(); ++k) {
            dp[k] = 6.5 * std::clamp(u(rng) + bias, -1.0, 1.0);
            pv[k] = 1.5 + 1.5 * u(rng);
        }
        const auto run = hes::run_guarded(kFig, f, hes::Scenario::S1, dp, pv, 0.4 + 0.2 * (u(rng) + 1) / 2);
        for (const auto& rec : run.records) {
            EXPECT_GE(rec.soc_after, 0.4);
            EXPECT_LE(rec.soc_after, 0.6);
        }
    }
}
