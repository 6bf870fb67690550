// hesflex: experiment runner. Exit codes: 0 ok, 2 config/usage, 3 data, 4 runtime.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "hesflex/hesflex.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct Overrides {
    std::string config;
    std::optional<std::string> scenario;
    std::optional<double> capacity;
    std::optional<double> hours;
    std::optional<bool> guard;
    std::optional<std::int64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "key = value config file");
    cmd->add_option("--scenario", o.scenario, "S1..S5");
    cmd->add_option("--capacity", o.capacity, "fixed bid capacity in MW");
    cmd->add_option("--hours", o.hours, "horizon in hours");
    cmd->add_flag("--guard,!--no-guard", o.guard, "enable the SoC guard");
    cmd->add_option("--seed", o.seed, "synthetic signal seed");
    cmd->add_option("--out", o.out, "output directory");
}

hes::RunConfig resolve(const Overrides& o, bool scenario_is_envelope_list) {
    auto doc = o.config.empty() ? hes::KeyValueDocument{} : hes::KeyValueDocument::read(o.config);
    if (o.scenario) doc.set(scenario_is_envelope_list ? "sim.envelope_scenarios" : "sim.scenario", *o.scenario);
    if (o.capacity) {
        doc.set("capacity.mode", "fixed");
        doc.set("capacity.mw", *o.capacity);
    }
    if (o.hours) doc.set("sim.hours", *o.hours);
    if (o.guard) doc.set("guard.enabled", *o.guard);
    if (o.seed) doc.set("signal.seed", std::to_string(*o.seed));
    if (o.out) doc.set("output.dir", *o.out);
    return hes::load_config(doc);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid energy system flexibility and regulation tracking"};
    app.require_subcommand(1);

    Overrides env_o, track_o, sweep_o, synth_o;
    auto* env_cmd = app.add_subcommand("envelope", "flexibility envelope per scenario");
    add_common(env_cmd, env_o);
    auto* track_cmd = app.add_subcommand("track", "dispatch against a regulation signal and score it");
    add_common(track_cmd, track_o);
    auto* sweep_cmd = app.add_subcommand("bid-sweep", "bid capacity and score per PV statistic");
    add_common(sweep_cmd, sweep_o);
    auto* synth_cmd = app.add_subcommand("synth-signal", "write a synthetic regulation signal CSV");
    add_common(synth_cmd, synth_o);
    std::optional<std::size_t> synth_steps;
    std::optional<double> synth_window;
    bool synth_irr = false;
    synth_cmd->add_option("--steps", synth_steps, "number of samples (default: hours at dt)");
    synth_cmd->add_option("--window", synth_window, "energy-neutral window in seconds");
    synth_cmd->add_flag("--irradiance", synth_irr, "also write the synthetic irradiance CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*env_cmd) {
            const auto cfg = resolve(env_o, true);
            const auto summary = hes::cmd_envelope(cfg);
            for (const auto& [s, path] : summary.files) std::cout << hes::to_string(s) << ' ' << path << '\n';
        } else if (*track_cmd) {
            const auto cfg = resolve(track_o, false);
            const auto summary = hes::cmd_track(cfg);
            print_warnings(summary.warnings);
            std::cout << summary.report.to_string();
        } else if (*sweep_cmd) {
            const auto cfg = resolve(sweep_o, false);
            const auto summary = hes::cmd_bid_sweep(cfg);
            std::cout << "statistic capacity_mw x_p qualified\n";
            for (const auto& r : summary.rows)
                std::cout << hes::to_string(r.statistic) << ' ' << hes::format_double(r.mean_capacity) << ' '
                          << hes::format_double(r.mean_score) << ' ' << (r.qualified() ? "yes" : "no") << '\n';
        } else if (*synth_cmd) {
            auto cfg = resolve(synth_o, false);
            if (synth_window) cfg.signal_window_s = *synth_window;
            const auto dt = static_cast<std::int64_t>(std::llround(cfg.dt_s));
            const std::size_t n = synth_steps.value_or(cfg.steps());
            const auto window = static_cast<std::size_t>(std::max(1.0, std::round(cfg.signal_window_s / cfg.dt_s)));
            const auto start = cfg.start_epoch.value_or(hes::kDefaultStartEpoch);
            auto sig = hes::synth_signal(cfg.signal_seed, n, window, dt, start);
            if (cfg.signal_bias != 0.0)
                for (double& v : sig.values) v = std::clamp(v + cfg.signal_bias, -1.0, 1.0);
            std::filesystem::create_directories(cfg.out_dir);
            const auto path = (std::filesystem::path(cfg.out_dir) / "signal.csv").string();
            hes::export_signal_csv(sig, path);
            std::cout << path << '\n';
            if (synth_irr) {
                const auto irr = hes::synth_irradiance(cfg.irradiance_seed, cfg.irradiance_start, cfg.irradiance_days,
                                                       cfg.irradiance_cadence_s, cfg.latitude_deg);
                const auto ipath = (std::filesystem::path(cfg.out_dir) / "irradiance.csv").string();
                hes::export_irradiance_csv(irr, ipath);
                std::cout << ipath << '\n';
            }
        }
    } catch (const hes::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const hes::InputError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const hes::IoError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
