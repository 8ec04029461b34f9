#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace intero;

namespace {

RunRecord rec(int episode, int t, double energy, double thermal = 0.0) {
    RunRecord r;
    r.episode = episode;
    r.t = t;
    r.step = episode * 1000 + t;
    r.v = {energy, thermal};
    r.c_h = homeostatic_cost(r.v, test::two_dim_bounds());
    return r;
}

} // namespace

TEST(Violations, RateAndSeverityFixture) {
    const auto b = test::two_dim_bounds();
    std::vector<RunRecord> rs{rec(0, 0, 1.0), rec(0, 1, 0.2), rec(0, 2, 1.0, 0.6), rec(0, 3, 1.0)};
    const auto s = violation_stats(rs, b);
    EXPECT_DOUBLE_EQ(s.rate, 0.5);
    EXPECT_NEAR(s.mean_severity, (1.0 + 1.0) / 2.0, 1e-12);
    EXPECT_THROW(violation_stats({}, b), UsageError);
}

TEST(Recovery, WindowedFixtureWithCensoring) {
    const auto b = test::two_dim_bounds();
    PerturbationSchedule sched;
    sched.events = {{2, PerturbationKind::EnergyDrainSpike, 0.3, 1}};
    // Episode 0: violation at t=2..4, in bounds from 5 on -> recovery 3 steps after onset.
    // Episode 1: never back in bounds for 3 steps -> censored at len - onset.
    std::vector<RunRecord> rs;
    const std::vector<double> e0{1, 1, 0.2, 0.2, 0.2, 1, 1, 1, 1, 1};
    const std::vector<double> e1{1, 1, 0.2, 1, 1, 0.2, 1, 1, 0.2, 1};
    for (int t = 0; t < 10; ++t) rs.push_back(rec(0, t, e0[static_cast<std::size_t>(t)]));
    for (int t = 0; t < 10; ++t) rs.push_back(rec(1, t, e1[static_cast<std::size_t>(t)]));
    const auto out = recovery_time(rs, sched, b, 3);
    EXPECT_EQ(out, (std::vector<int>{3, 8}));
    // Window 1: the first in-bounds step counts.
    EXPECT_EQ(recovery_time(rs, sched, b, 1), (std::vector<int>{3, 1}));
}

TEST(InternalVariance, MatchesTwoPass) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> n(1.0, 0.3);
    std::vector<RunRecord> rs;
    for (int i = 0; i < 5000; ++i) rs.push_back(rec(0, i, n(gen), n(gen) - 1.0));
    const auto var = internal_variance(rs);
    for (std::size_t d = 0; d < 2; ++d) {
        double mean = 0.0;
        for (const auto& r : rs) mean += r.v[d];
        mean /= rs.size();
        double ss = 0.0;
        for (const auto& r : rs) ss += (r.v[d] - mean) * (r.v[d] - mean);
        EXPECT_NEAR(var[d], ss / rs.size(), 1e-12);
    }
}

TEST(Calibration, HandFixture) {
    // Bin 9: two predictions at 0.95, one hit. Bin 5: 0.55 x2, both hit.
    const std::vector<double> conf{0.95, 0.95, 0.55, 0.55};
    const std::vector<bool> hit{true, false, true, true};
    const auto c = calibration(conf, hit, 10);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->bins[9].count, 2);
    EXPECT_NEAR(c->bins[9].accuracy, 0.5, 1e-12);
    EXPECT_NEAR(c->bins[5].confidence, 0.55, 1e-12);
    EXPECT_NEAR(c->ece, 0.5 * 0.45 + 0.5 * 0.45, 1e-12);
    EXPECT_NEAR(c->mce, 0.45, 1e-12);
    EXPECT_FALSE(calibration(std::vector<double>{}, {}, 10));
    EXPECT_EQ(calibration(std::vector<double>{1.0}, {true}, 10)->bins[9].count, 1); // 1.0 in the top bin
}

TEST(Calibration, PropertyBoundsAndBinRecomposition) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial * 3, bins = 1 + trial % 15;
        std::vector<double> conf;
        std::vector<bool> hit;
        for (int i = 0; i < n; ++i) {
            conf.push_back(u(gen));
            hit.push_back(u(gen) < (trial % 2 ? conf.back() : 0.5));
        }
        const auto c = *calibration(conf, hit, bins);
        ASSERT_GE(c.ece, 0.0);
        ASSERT_LE(c.ece, 1.0);
        ASSERT_GE(c.mce + 1e-15, c.ece);
        // Reliability bins recompose ECE.
        long long total = 0;
        double ece = 0.0;
        for (const auto& bin : c.bins) total += bin.count;
        ASSERT_EQ(total, n);
        for (const auto& bin : c.bins) ece += double(bin.count) / n * std::abs(bin.accuracy - bin.confidence);
        ASSERT_NEAR(ece, c.ece, 1e-12);
    }
}

TEST(Calibration, PerfectlyCalibratedSourceHasSmallEce) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> conf;
    std::vector<bool> hit;
    for (int i = 0; i < 200000; ++i) {
        conf.push_back(u(gen));
        hit.push_back(u(gen) < conf.back());
    }
    EXPECT_LT(calibration(conf, hit, 10)->ece, 0.01);
}

TEST(Abstention, PrecisionRecallLatencyFixture) {
    std::vector<RunRecord> rs(20);
    for (int i = 0; i < 20; ++i) rs[static_cast<std::size_t>(i)].step = i;
    // Windows [3,6) and [12,16); abstain at 4 (inside), 9 (outside), 14 and 15 (inside).
    for (int i : {3, 4, 5, 12, 13, 14, 15}) rs[static_cast<std::size_t>(i)].ev_shift_window = true;
    for (int i : {4, 9, 14, 15}) rs[static_cast<std::size_t>(i)].abstained = true;
    const auto s = abstention_scores(rs);
    EXPECT_EQ(s.windows, 2);
    EXPECT_DOUBLE_EQ(*s.precision, 0.75);
    EXPECT_DOUBLE_EQ(*s.recall, 1.0);
    EXPECT_DOUBLE_EQ(*s.detection_latency, (1.0 + 2.0) / 2.0);
    for (auto& r : rs) r.abstained = false;
    const auto none = abstention_scores(rs);
    EXPECT_FALSE(none.precision);
    EXPECT_DOUBLE_EQ(*none.recall, 0.0);
}

TEST(Exploration, CoverageIgPerCostAndGoal) {
    std::vector<RunRecord> rs(4);
    const std::vector<int> states{0, 1, 1, 3};
    for (std::size_t i = 0; i < 4; ++i) {
        rs[i].step = static_cast<long long>(i);
        rs[i].state = states[i];
        rs[i].ig_ext = 0.1;
        rs[i].ig_int = 0.05;
        rs[i].action_cost = 0.02;
    }
    rs[1].c_h = 0.5;
    rs[2].r_task = 5.0;
    const auto s = exploration_stats(rs, 8, 2.0, 0.01, 5.0);
    EXPECT_DOUBLE_EQ(s.coverage, 3.0 / 8.0);
    EXPECT_NEAR(s.ig_per_cost, 0.6 / (0.02 * 3 + 1.02), 1e-12);
    EXPECT_EQ(s.steps_to_goal, 2);
    EXPECT_EQ(exploration_stats(rs, 8, 2.0, 0.01, 6.0).steps_to_goal, -1);
}

TEST(SafetyAdjusted, ReturnMinusPenaltyPerViolation) {
    const auto b = test::two_dim_bounds();
    std::vector<RunRecord> rs{rec(0, 0, 1.0), rec(0, 1, 0.1), rec(0, 2, 0.1)};
    rs[0].r_task = 3.0;
    EXPECT_DOUBLE_EQ(safety_adjusted_return(rs, b, 0.5), 2.0);
    EXPECT_THROW(safety_adjusted_return(rs, b, -1.0), UsageError);
}

TEST(Pearson, KnownValues) {
    const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1}, c{1, 1, 1, 1};
    EXPECT_NEAR(*pearson(x, y), 1.0, 1e-12);
    EXPECT_NEAR(*pearson(x, z), -1.0, 1e-12);
    EXPECT_FALSE(pearson(x, c));
    EXPECT_FALSE(pearson(std::vector<double>{1.0}, std::vector<double>{1.0}));
}

TEST(ComputeMetrics, EmitsPreDriftEceOnlyWithChangePoint) {
    const auto b = test::two_dim_bounds();
    std::vector<RunRecord> rs;
    for (int t = 0; t < 10; ++t) {
        auto r = rec(0, t, 1.0);
        r.p_top = 0.9;
        r.top_hit = t < 9;
        rs.push_back(r);
    }
    MetricsContext ctx;
    ctx.bounds = b;
    ctx.state_count = 4;
    auto has = [](const MetricMap& m, const std::string& k) {
        return std::any_of(m.begin(), m.end(), [&](const auto& kv) { return kv.first == k; });
    };
    EXPECT_FALSE(has(compute_metrics(rs, {"energy", "thermal"}, ctx), "pre_drift_ece"));
    rs[5].ev_change_point = true;
    const auto m = compute_metrics(rs, {"energy", "thermal"}, ctx);
    ASSERT_TRUE(has(m, "pre_drift_ece"));
    for (const auto& [k, v] : m) {
        if (k == "pre_drift_ece") {
            EXPECT_NEAR(v, 0.1, 1e-12); // 5 predictions at 0.9, all hit
        }
        if (k == "ece") {
            EXPECT_NEAR(v, 0.0, 1e-12); // 9 of 10 hit at 0.9
        }
        ASSERT_TRUE(std::isfinite(v)) << k;
    }
}
