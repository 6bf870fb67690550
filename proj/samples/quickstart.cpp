// One hour of S1 regulation at 6.5 MW with the reference fleet, scored.

#include <iostream>

#include "hesflex/hesflex.hpp"

int main() {
    hes::AssetFleet fleet;
    fleet.pv = hes::scale_cells_to_rating(fleet.pv);

    const std::size_t n = 1800;
    const auto signal = hes::synth_signal(42, n).values;
    const auto irr = hes::synth_irradiance(7, hes::kDefaultStartEpoch - 12 * 3600, 1);

    std::vector<double> pv(n), dp(n);
    const auto noon = static_cast<std::size_t>(12 * 60);
    for (std::size_t k = 0; k < n; ++k) {
        pv[k] = hes::pv_power(fleet.pv, irr.values[noon + k / 30]);
        dp[k] = 6.5 * signal[k];
    }

    const auto env = hes::envelope(hes::Scenario::S1, fleet, pv.front());
    std::cout << "S1 envelope at t=0: p0 " << env.p0 << " MW, [" << env.dp_lo << ", " << env.dp_hi << "]\n";

    const auto run = hes::run_unguarded(fleet, hes::Scenario::S1, dp, pv, 0.5, signal);
    std::vector<double> delivered(n);
    for (std::size_t k = 0; k < n; ++k) delivered[k] = run.records[k].delivered_dp();

    const double x_p = hes::performance_score(6.5, signal, delivered);
    const auto outcome = hes::settle(6.5, x_p, hes::mileage(signal), {30.0, 2.0});
    std::cout << "x_p " << outcome.score << ", mileage " << outcome.mileage << ", payment " << outcome.payment
              << ", final SoC " << run.records.back().soc_after << '\n';
}
