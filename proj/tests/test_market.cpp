#include <gtest/gtest.h>

#include "hesflex/hesflex.hpp"

TEST(Mileage, HandSums) {
    EXPECT_EQ(hes::mileage(std::vector<double>{0, 1, -1, 0}), 4.0);
    EXPECT_EQ(hes::mileage(std::vector<double>{0.3, 0.3, 0.3}), 0.0);
    EXPECT_EQ(hes::mileage(std::vector<double>{0, 0.5, 1}), 1.0);
    EXPECT_THROW(hes::mileage(std::vector<double>{0.2}), hes::InputError);
}

TEST(Mileage, ConcatenationAddsJunctionStep) {
    const std::vector<double> a{0.1, -0.4, 0.7}, b{-0.2, 0.9};
    std::vector<double> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    EXPECT_DOUBLE_EQ(hes::mileage(ab), hes::mileage(a) + hes::mileage(b) + std::abs(b.front() - a.back()));
}

TEST(RegSignal, RejectsOutOfRangeAndShort) {
    EXPECT_THROW(hes::RegSignal::make({0.0, 1.5}), hes::InputError);
    EXPECT_THROW(hes::RegSignal::make({0.0}), hes::InputError);
    EXPECT_EQ(hes::mileage(hes::RegSignal::make({-1.0, 1.0})), 2.0);
}

TEST(Score, PerfectZeroAndHalf) {
    const std::vector<double> r{0.5, -1.0, 0.25, 1.0};
    std::vector<double> d(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) d[k] = 6.5 * r[k];
    EXPECT_EQ(hes::performance_score(6.5, r, d), 1.0);
    EXPECT_EQ(hes::performance_score(6.5, r, std::vector<double>(4, 0.0)), 0.0);

    // Half the L1 mass delivered exactly, the other half not at all.
    const std::vector<double> r2{1.0, -0.5, 0.5};
    const std::vector<double> d2{2.0, 0.0, 0.0};
    EXPECT_DOUBLE_EQ(hes::performance_score(2.0, r2, d2), 0.5);
}

TEST(Score, UndefinedCases) {
    const std::vector<double> r{0.5, -0.5}, d{0.0, 0.0};
    EXPECT_THROW(hes::performance_score(0.0, r, d), hes::UndefinedScore);
    EXPECT_THROW(hes::performance_score(1.0, std::vector<double>{0, 0}, d), hes::UndefinedScore);
    EXPECT_THROW(hes::performance_score(1.0, r, std::vector<double>{0.0}), hes::InputError);
}

TEST(Score, ScaleInvariantAndBoundedAbove) {
    const std::vector<double> r{0.3, -0.8, 0.6, 0.1};
    const std::vector<double> d{1.0, -2.0, 4.0, -1.0};
    const double base = hes::performance_score(3.0, r, d);
    std::vector<double> d2(d);
    for (double& v : d2) v *= 2.5;
    EXPECT_NEAR(hes::performance_score(7.5, r, d2), base, 1e-15);
    EXPECT_LT(base, 1.0);
    EXPECT_LT(hes::performance_score(1.0, r, std::vector<double>{5, 5, 5, 5}), 0.0);
}

TEST(Payment, Examples) {
    EXPECT_DOUBLE_EQ(hes::payment(1.0, 6.5, 0.0, {10.0, 0.0}), 65.0);
    EXPECT_EQ(hes::payment(0.74, 6.5, 12.0, {10.0, 1.0}), 0.0);
    EXPECT_DOUBLE_EQ(hes::payment(0.8, 2.0, 3.0, {10.0, 1.0}), 20.8);
    EXPECT_GT(hes::payment(0.75, 2.0, 3.0, {10.0, 1.0}), 0.0);
}

TEST(Payment, MonotoneAboveCliff) {
    double prev = 0;
    for (double x = 0.75; x <= 1.0; x += 0.01) {
        const double p = hes::payment(x, 4.0, 10.0, {30.0, 2.0});
        EXPECT_GE(p, prev);
        prev = p;
    }
}

TEST(Settle, ClipsReportedScoreOnly) {
    const auto o = hes::settle(2.0, -0.3, 1.0, {10.0, 1.0});
    EXPECT_EQ(o.score, -0.3);
    EXPECT_EQ(o.reported_score(), 0.0);
    EXPECT_FALSE(o.qualified);
    EXPECT_EQ(o.payment, 0.0);
}

TEST(Bids, MaxFlex) {
    const std::vector<double> env(10, 6.5);
    std::vector<double> r{0.2, -1.0, 0.4};
    EXPECT_EQ(hes::max_flex_bid(env, r), 6.5);
    r = {0.5, -0.25};
    EXPECT_EQ(hes::max_flex_bid(std::vector<double>{5.0}, r), 10.0);
    EXPECT_THROW(hes::max_flex_bid(env, std::vector<double>{0.0, 0.0}), hes::InputError);
}

TEST(Bids, Decomposed) {
    const hes::BatteryParams b;
    EXPECT_EQ(hes::decomposed_bid(b, 0.0), 5.0);
    EXPECT_EQ(hes::decomposed_bid(b, 2.0), 6.0);
    EXPECT_EQ(hes::decomposed_bid(b, 4.0, 3.0), 6.5);
    EXPECT_THROW(hes::decomposed_bid(b, -1.0), hes::DomainError);
}

TEST(Statistics, Examples) {
    using hes::PvStatistic;
    for (auto s : hes::kAllStatistics) EXPECT_EQ(hes::pv_statistic(std::vector<double>{1, 1, 1}, s), 1.0);
    EXPECT_EQ(hes::pv_statistic(std::vector<double>{0, 2}, PvStatistic::P50), 1.0);
    EXPECT_EQ(hes::pv_statistic(std::vector<double>{4, 0, 2, 1, 3}, PvStatistic::P75), 3.0);
    EXPECT_DOUBLE_EQ(hes::pv_statistic(std::vector<double>{0, 1, 2, 3, 4}, PvStatistic::P95), 3.8);
    EXPECT_THROW(hes::pv_statistic(std::vector<double>{}, PvStatistic::Mean), hes::InputError);
    EXPECT_EQ(hes::parse_statistic("p95"), PvStatistic::P95);
    EXPECT_FALSE(hes::parse_statistic("p90").has_value());
}

TEST(Seasons, MeteorologicalByUtcMonth) {
    EXPECT_EQ(hes::season_of(1672531200), hes::Season::Winter);   // 2023-01-01
    EXPECT_EQ(hes::season_of(1677628800), hes::Season::Spring);   // 2023-03-01
    EXPECT_EQ(hes::season_of(1677628799), hes::Season::Winter);   // 2023-02-28 23:59:59
    EXPECT_EQ(hes::season_of(1687348800), hes::Season::Summer);   // 2023-06-21
    EXPECT_EQ(hes::season_of(1696118400), hes::Season::Fall);     // 2023-10-01
    EXPECT_EQ(hes::season_of(1701388800), hes::Season::Winter);   // 2023-12-01
    EXPECT_EQ(hes::utc_hour_of(1687348800), 12);
    EXPECT_EQ(hes::utc_hour_of(1687348800 + 3599), 12);
}

TEST(Seasons, GroupsBySeasonAndHour) {
    const std::vector<std::int64_t> ts{1687348800, 1687348860, 1687352400, 1672531200};
    const std::vector<double> v{1, 2, 3, 4};
    const auto g = hes::group_by_season_hour(ts, v);
    EXPECT_EQ(g.size(), 3u);
    EXPECT_EQ(g.at({hes::Season::Summer, 12}), (std::vector<double>{1, 2}));
    EXPECT_EQ(g.at({hes::Season::Winter, 0}), (std::vector<double>{4}));
}
