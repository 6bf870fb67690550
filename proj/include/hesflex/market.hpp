#pragma once

// Pay-for-performance accounting: mileage, performance score, payment and
// capacity bid sizing.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "assets.hpp"
#include "errors.hpp"

namespace hes {

inline constexpr double kQualificationScore = 0.75;

// Normalized regulation signal, |r| <= 1.
struct RegSignal {
    std::vector<double> values;
    double dt = 2.0;  // seconds per step

    static RegSignal make(std::vector<double> values, double dt = 2.0) {
        if (values.size() < 2) throw InputError("regulation signal needs at least 2 samples");
        for (std::size_t k = 0; k < values.size(); ++k)
            if (!(std::abs(values[k]) <= 1.0))
                throw InputError("regulation signal sample " + std::to_string(k) + " outside [-1, 1]");
        return RegSignal{std::move(values), dt};
    }
};

struct MarketPrices {
    double lambda_c = 0;  // $/MW capacity
    double lambda_m = 0;  // $/MW mileage
};

struct MarketOutcome {
    double capacity = 0;
    double score = 0;  // raw, may be negative
    double mileage = 0;
    double payment = 0;
    bool qualified = false;

    double reported_score() const { return std::max(0.0, score); }
};

inline double mileage(std::span<const double> r) {
    if (r.size() < 2) throw InputError("mileage needs at least 2 samples");
    double total = 0;
    for (std::size_t k = 0; k + 1 < r.size(); ++k) total += std::abs(r[k + 1] - r[k]);
    return total;
}

inline double mileage(const RegSignal& sig) { return mileage(sig.values); }

// L1 tracking error of delivered deviation against the commanded C*r, in MW-steps.
inline double tracking_error(double capacity, std::span<const double> r,
                             std::span<const double> delivered_dp) {
    if (r.size() != delivered_dp.size())
        throw InputError("signal and delivered series lengths differ");
    double err = 0;
    for (std::size_t k = 0; k < r.size(); ++k) err += std::abs(capacity * r[k] - delivered_dp[k]);
    return err;
}

inline double performance_score(double capacity, std::span<const double> r,
                                 std::span<const double> delivered_dp) {
    if (!(capacity > 0)) throw UndefinedScore("performance score needs capacity > 0");
    double mass = 0;
    for (double v : r) mass += std::abs(v);
    if (mass == 0) throw UndefinedScore("performance score needs a nonzero signal");
    return 1.0 - tracking_error(capacity, r, delivered_dp) / (capacity * mass);
}

inline bool qualifies(double score) { return score >= kQualificationScore; }

inline double payment(double score, double capacity, double mileage_value, const MarketPrices& prices) {
    if (!qualifies(score)) return 0.0;
    return score * capacity * (prices.lambda_c + mileage_value * prices.lambda_m);
}

inline MarketOutcome settle(double capacity, double score, double mileage_value,
                            const MarketPrices& prices) {
    return MarketOutcome{capacity, score, mileage_value, payment(score, capacity, mileage_value, prices),
                         qualifies(score)};
}

// Largest capacity whose scaled signal never leaves the deviation range.
inline double max_flex_bid(std::span<const double> dp_series, std::span<const double> r) {
    double r_inf = 0;
    for (double v : r) r_inf = std::max(r_inf, std::abs(v));
    if (r_inf == 0) throw InputError("max-flex bid needs a nonzero signal");
    double dp_inf = 0;
    for (double v : dp_series) dp_inf = std::max(dp_inf, std::abs(v));
    return dp_inf / r_inf;
}

// Fixed battery component plus half the PV statistic, the load-limited share
// of PV in the sustainable-load scenario.
inline double decomposed_bid(const BatteryParams& batt, double pv_stat,
                             double load_rating = std::numeric_limits<double>::infinity()) {
    if (pv_stat < 0) throw DomainError("PV statistic must be >= 0");
    return batt.p_max + 0.5 * std::min(pv_stat, load_rating);
}

// ---------------------------------------------------------------------------
// PV statistics per season and hour

enum class PvStatistic { Mean, P50, P75, P95 };

inline constexpr std::array<PvStatistic, 4> kAllStatistics = {PvStatistic::Mean, PvStatistic::P50,
                                                              PvStatistic::P75, PvStatistic::P95};

inline std::string_view to_string(PvStatistic s) {
    switch (s) {
        case PvStatistic::Mean: return "mean";
        case PvStatistic::P50: return "p50";
        case PvStatistic::P75: return "p75";
        case PvStatistic::P95: return "p95";
    }
    return "?";
}

inline std::optional<PvStatistic> parse_statistic(std::string_view text) {
    for (auto s : kAllStatistics)
        if (text == to_string(s)) return s;
    return std::nullopt;
}

// Linear interpolation between order statistics at rank (n-1)*q.
inline double percentile(std::vector<double> samples, double q) {
    if (samples.empty()) throw InputError("percentile of an empty sample");
    std::sort(samples.begin(), samples.end());
    const double h = (static_cast<double>(samples.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    return samples[lo] + (h - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

inline double pv_statistic(std::span<const double> samples, PvStatistic stat) {
    if (samples.empty()) throw InputError("PV statistic of an empty group");
    std::vector<double> v(samples.begin(), samples.end());
    switch (stat) {
        case PvStatistic::Mean: {
            // Offset by the first sample so a constant group returns that value exactly.
            const double ref = v.front();
            double dev = 0;
            for (double x : v) dev += x - ref;
            return ref + dev / static_cast<double>(v.size());
        }
        case PvStatistic::P50: return percentile(std::move(v), 0.50);
        case PvStatistic::P75: return percentile(std::move(v), 0.75);
        case PvStatistic::P95: return percentile(std::move(v), 0.95);
    }
    throw InputError("unknown PV statistic");
}

enum class Season { Winter, Spring, Summer, Fall };

inline std::string_view to_string(Season s) {
    switch (s) {
        case Season::Winter: return "winter";
        case Season::Spring: return "spring";
        case Season::Summer: return "summer";
        case Season::Fall: return "fall";
    }
    return "?";
}

// Meteorological seasons by UTC calendar month: Dec-Feb winter, Mar-May spring,
// Jun-Aug summer, Sep-Nov fall.
inline Season season_of(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    const sys_seconds tp{seconds{epoch_seconds}};
    const year_month_day ymd{floor<days>(tp)};
    const unsigned m = static_cast<unsigned>(ymd.month());
    if (m == 12 || m <= 2) return Season::Winter;
    if (m <= 5) return Season::Spring;
    if (m <= 8) return Season::Summer;
    return Season::Fall;
}

inline int utc_hour_of(std::int64_t epoch_seconds) {
    const std::int64_t day = 86400;
    const std::int64_t in_day = ((epoch_seconds % day) + day) % day;
    return static_cast<int>(in_day / 3600);
}

using SeasonHour = std::pair<Season, int>;

inline std::map<SeasonHour, std::vector<double>> group_by_season_hour(
    std::span<const std::int64_t> timestamps, std::span<const double> values) {
    if (timestamps.size() != values.size()) throw InputError("timestamp and value counts differ");
    std::map<SeasonHour, std::vector<double>> groups;
    for (std::size_t i = 0; i < values.size(); ++i)
        groups[{season_of(timestamps[i]), utc_hour_of(timestamps[i])}].push_back(values[i]);
    return groups;
}

}  // namespace hes
