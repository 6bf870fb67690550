#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hesflex/hesflex.hpp"

namespace {

hes::RunConfig config(const std::string& text) { return hes::load_config(hes::KeyValueDocument::parse(text)); }

std::string out_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "hesflex_cfg_tests" / name;
    std::filesystem::remove_all(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, DefaultsMatchReferencePlant) {
    const auto cfg = config("");
    EXPECT_EQ(cfg.fleet.pv.p_pv_rated, 3.0);
    EXPECT_EQ(cfg.fleet.load.p_max, 3.0);
    EXPECT_EQ(cfg.fleet.battery.p_max, 5.0);
    EXPECT_EQ(cfg.fleet.battery.e_cap, 5.0);
    EXPECT_EQ(cfg.fleet.battery.eta_inv, 0.95);
    EXPECT_EQ(cfg.fleet.battery.e_min, 0.1);
    EXPECT_EQ(cfg.fleet.battery.e_max, 0.9);
    EXPECT_EQ(cfg.soc0, 0.5);
    EXPECT_DOUBLE_EQ(cfg.fleet.dt, 2.0 / 3600.0);
    EXPECT_EQ(cfg.steps(), 1800u);
    EXPECT_NEAR(hes::pv_power(cfg.fleet.pv, 1000.0), 3.0, 1e-9);
}

TEST(Config, ListsEveryProblem) {
    try {
        config("battery.p_max_mw = -1\nbattery.eta = 2\nsim.scenario = S9\nbogus.key = 1\nsim.hours = x\n");
        FAIL();
    } catch (const hes::ConfigError& e) {
        EXPECT_EQ(e.problems().size(), 5u);
    }
}

TEST(Config, GuardBufferDefaultsToTenthOfBand) {
    const auto cfg = config("guard.enabled = true\nguard.e_upper = 0.7\nguard.e_lower = 0.3\n");
    EXPECT_NEAR(cfg.guard.buffer, 0.04, 1e-15);
    EXPECT_THROW(config("guard.enabled = true\nguard.e_upper = 0.7\n"), hes::ConfigError);
    EXPECT_THROW(config("guard.enabled = true\nguard.e_upper = 0.45\nguard.e_lower = 0.3\n"), hes::ConfigError);
}

TEST(Config, OracleOnlyForS1) {
    EXPECT_THROW(config("oracle.enabled = true\nsim.scenario = S2\n"), hes::ConfigError);
    EXPECT_NO_THROW(config("oracle.enabled = true\n"));
}

TEST(Config, KnownKeysCoverSampleFiles) {
    const auto keys = hes::known_config_keys();
    EXPECT_NE(std::find(keys.begin(), keys.end(), "battery.p_max_mw"), keys.end());
    EXPECT_NE(std::find(keys.begin(), keys.end(), "guard.buffer"), keys.end());
}

TEST(Experiments, EnvelopeFiles) {
    auto cfg = config("irradiance.source = constant\nirradiance.constant_wm2 = 0\n");
    cfg.out_dir = out_dir("env");
    const auto s = hes::cmd_envelope(cfg);
    EXPECT_EQ(s.files.size(), 5u);
    const auto& s1 = s.first_step.at(hes::Scenario::S1);
    EXPECT_EQ(s1.dp_hi, 6.5);
    const auto& s2 = s.first_step.at(hes::Scenario::S2);
    EXPECT_EQ(s2.p0, 0.0);
    EXPECT_EQ(s2.dp_hi, 5.0);
    const auto s3 = s.first_step.at(hes::Scenario::S3);
    EXPECT_EQ(s3.dp_lo, -5.0);
    const auto text = slurp(s.files.at(hes::Scenario::S1));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1801);
}

TEST(Experiments, TrackPerfectAtReferenceBid) {
    auto cfg = config("oracle.enabled = true\noracle.backend = exact\n");
    cfg.out_dir = out_dir("track");
    const auto s = hes::cmd_track(cfg);
    EXPECT_NEAR(s.outcome.score, 1.0, 1e-9);
    EXPECT_EQ(s.run.saturated_steps, 0u);
    EXPECT_TRUE(s.warnings.empty());
    ASSERT_TRUE(s.oracle.has_value());
    EXPECT_NEAR(s.oracle->objective_oracle, 0.0, 1e-9);
    const auto report = hes::KeyValueDocument::read(s.report_path);
    EXPECT_EQ(report.get("oracle.label"), "offline-benchmark");
    EXPECT_EQ(report.get("scenario"), "S1");
    for (const char* key : {"capacity_mw", "x_p", "mileage", "payment", "guard.enabled"})
        EXPECT_TRUE(report.contains(key)) << key;

    const auto back = hes::read_trace(s.trace_path);
    ASSERT_EQ(back.size(), 1800u);
    EXPECT_TRUE(hes::audit_trace(back, cfg.fleet, cfg.soc0, hes::Scenario::S1).empty());
}

TEST(Experiments, InflatedBidSaturates) {
    auto cfg = config("capacity.mw = 10\n");
    cfg.out_dir = out_dir("inflated");
    const auto s = hes::cmd_track(cfg);
    EXPECT_LT(s.outcome.score, 1.0);
    EXPECT_GT(s.run.saturated_steps, 0u);
    EXPECT_FALSE(s.warnings.empty());
}

TEST(Experiments, GuardedTraceStaysInBand) {
    auto cfg = config("sim.hours = 4\nguard.enabled = true\nsignal.bias = 0.08\nsignal.seed = 3\n");
    cfg.out_dir = out_dir("guarded");
    const auto s = hes::cmd_track(cfg);
    for (const auto& rec : hes::read_trace(s.trace_path)) {
        EXPECT_GE(rec.soc_after, 0.4);
        EXPECT_LE(rec.soc_after, 0.6);
    }
}

TEST(Experiments, ReportsAreByteIdentical) {
    auto cfg = config("sim.hours = 0.5\n");
    cfg.out_dir = out_dir("det_a");
    const auto a = hes::cmd_track(cfg);
    cfg.out_dir = out_dir("det_b");
    const auto b = hes::cmd_track(cfg);
    EXPECT_EQ(slurp(a.report_path), slurp(b.report_path));
    EXPECT_EQ(slurp(a.trace_path), slurp(b.trace_path));
}

TEST(Experiments, CapacityModes) {
    auto cfg = config("capacity.mode = max-flex\nirradiance.source = constant\n");
    cfg.out_dir = out_dir("maxflex");
    EXPECT_NEAR(hes::cmd_track(cfg).outcome.capacity, 6.5 / [&] {
        double m = 0;
        for (double v : hes::load_signal(cfg, cfg.steps(), cfg.signal_seed)) m = std::max(m, std::abs(v));
        return m;
    }(), 1e-12);

    cfg = config("capacity.mode = decomposed\ncapacity.statistic = p50\nsim.scenario = S2\n"
                 "irradiance.source = constant\nirradiance.constant_wm2 = 1000\n");
    cfg.out_dir = out_dir("decomposed");
    EXPECT_NEAR(hes::cmd_track(cfg).outcome.capacity, 5.0 + 1.5, 1e-9);
}

TEST(Experiments, ConstantIrradianceGivesIdenticalBids) {
    auto cfg = config("sim.scenario = S2\nirradiance.source = constant\nirradiance.constant_wm2 = 600\n"
                      "irradiance.days = 2\nbid.eval_hours = 6\n");
    cfg.out_dir = out_dir("sweep_const");
    const auto s = hes::cmd_bid_sweep(cfg);
    ASSERT_EQ(s.rows.size(), 4u);
    for (const auto& row : s.rows) EXPECT_EQ(row.mean_capacity, s.rows.front().mean_capacity);
}

TEST(Experiments, EmptySeasonHourGroupIsNamed) {
    // Irradiance covers only June, evaluation asks for a December hour.
    auto cfg = config("irradiance.days = 1\nbid.eval_start_epoch = 1701388800\nbid.eval_hours = 1\n");
    cfg.out_dir = out_dir("sweep_empty");
    try {
        hes::cmd_bid_sweep(cfg);
        FAIL();
    } catch (const hes::DataError& e) {
        EXPECT_NE(std::string(e.what()).find("winter/0"), std::string::npos) << e.what();
    }
}

TEST(Experiments, CsvSignalInput) {
    const auto dir = out_dir("csvsig");
    std::filesystem::create_directories(dir);
    const auto path = (std::filesystem::path(dir) / "signal.csv").string();
    hes::export_signal_csv(hes::synth_signal(9, 900, 450, 2, hes::kDefaultStartEpoch), path);
    auto cfg = config("signal.source = csv\nsignal.path = " + path + "\nsim.hours = 0.5\n");
    cfg.out_dir = dir;
    EXPECT_NEAR(hes::cmd_track(cfg).outcome.score, 1.0, 1e-9);
    cfg.hours = 1.0;
    EXPECT_THROW(hes::cmd_track(cfg), hes::DataError);
}
