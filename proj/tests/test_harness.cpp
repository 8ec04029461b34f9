#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace intero;

TEST(Harness, InvariantsHoldForEveryMaskAndEnvironment) {
    for (const char* file : {"viability_grid.toml", "drift_bandit.toml", "costly_maze.toml", "combined.toml"}) {
        for (const auto& mask : AblationMask::all()) {
            auto cfg = test::small_config(file, 3, 150);
            cfg.mask = mask;
            const auto run = simulate(cfg, 7);
            SCOPED_TRACE(std::string(file) + " " + mask.name());
            ASSERT_EQ(run.records.size(), 450u);
            EXPECT_EQ(oracle::audit_run(cfg, run), "");
        }
    }
}

TEST(Harness, RandomBaselineRespectsShield) {
    auto cfg = test::small_config("viability_grid.toml", 4, 300);
    cfg.baseline = Baseline::Random;
    const auto run = simulate(cfg, 3);
    EXPECT_EQ(oracle::audit_run(cfg, run), "");
    long long shielded = 0;
    for (const auto& r : run.records) shielded += r.shielded;
    EXPECT_GT(shielded, 0); // the random walk does hit the hard bounds
}

TEST(Harness, DeterministicForSeed) {
    const auto cfg = test::small_config("combined.toml", 2, 120);
    auto csv = [&](std::uint64_t seed) {
        std::stringstream ss;
        const auto run = simulate(cfg, seed);
        write_records_csv(ss, run.records, run.dim_names);
        return ss.str() + metrics_to_json(run.metrics);
    };
    EXPECT_EQ(csv(5), csv(5));
    EXPECT_NE(csv(5), csv(6));
}

TEST(Harness, BanditDefersWhenAbstaining) {
    const auto cfg = test::small_config("drift_bandit.toml", 30, 40);
    const auto run = simulate(cfg, 1);
    const int defer = std::get<DriftBanditConfig>(cfg.env.params).arms;
    long long abstained = 0;
    for (const auto& r : run.records) {
        if (r.abstained && !r.shielded) {
            ++abstained;
            ASSERT_EQ(r.action, defer);
        }
    }
    EXPECT_GT(abstained, 0);
}

TEST(Harness, WritesRunArtifacts) {
    const auto cfg = test::small_config("costly_maze.toml", 1, 30);
    const auto dir = test::scratch("run");
    run_to_dir(cfg, 2, dir, {true, true});
    for (const char* f : {"config.json", "records.csv", "metrics.json", "model.json", "q.json"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    const auto j = nlohmann::json::parse(test::slurp(dir / "config.json"));
    EXPECT_EQ(j["experiment"]["seed"], 2);
    EXPECT_EQ(read_records_csv((dir / "records.csv").string()).records.size(), 30u);
}

TEST(Harness, FuzzedParametersStayFiniteAndSound) {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::string> files{"viability_grid.toml", "drift_bandit.toml", "costly_maze.toml", "combined.toml"};
    for (int i = 0; i < 24; ++i) {
        auto cfg = test::small_config(files[static_cast<std::size_t>(i) % files.size()], 2, 80);
        cfg.mask = AblationMask::all()[gen() % 8];
        cfg.homeostat.lambda_h = 5.0 * u(gen);
        cfg.homeostat.tau_min = 0.01 + 0.2 * u(gen);
        cfg.homeostat.tau_max = cfg.homeostat.tau_min + 2.0 * u(gen) + 1e-3;
        if (gen() % 2) cfg.homeostat.mode = RegulationMode::ActiveSearch;
        for (double& w : cfg.allostat.feature_weights) w = 3.0 * u(gen);
        cfg.allostat.horizon = static_cast<int>(gen() % 5);
        cfg.allostat.n_rollouts = 1 + static_cast<int>(gen() % 6);
        cfg.allostat.risk_coeff = 3.0 * u(gen);
        cfg.allostat.abstain_threshold = 4.0 * u(gen);
        cfg.enact.lambda_e = 10.0 * u(gen);
        cfg.arbiter.urgency_gain = 0.05 + 5.0 * u(gen);
        cfg.learner.alpha = u(gen);
        cfg.learner.v_bins = 1 + static_cast<int>(gen() % 6);
        cfg.world_model.prior = 0.01 + 2.0 * u(gen);
        cfg.world_model.v_bins = 1 + static_cast<int>(gen() % 3);
        for (double& s : cfg.internal.noise.sigma) s = 0.1 * u(gen);
        SCOPED_TRACE(i);
        const auto run = simulate(cfg, gen());
        EXPECT_EQ(oracle::audit_run(cfg, run), "");
        for (const auto& [k, v] : run.metrics) ASSERT_TRUE(std::isfinite(v)) << k;
    }
}

TEST(Harness, RejectsDimensionMismatch) {
    auto cfg = test::small_config("viability_grid.toml", 1, 10);
    cfg.internal.names = {"energy"};
    cfg.internal.initial = {1.0};
    cfg.internal.noise.sigma = {0.0};
    EXPECT_THROW(simulate(cfg, 1), ConfigError);
}

TEST(Ablate, JobsCoverEveryMaskAndSeed) {
    const auto cfg = test::small_config("viability_grid.toml", 1, 10);
    const auto seeds = ablation_seeds(cfg, 3);
    EXPECT_EQ(seeds, (std::vector<std::uint64_t>{1, 2, 3}));
    EXPECT_THROW(ablation_seeds(cfg, 1), ConfigError);
    const auto jobs = ablation_jobs({cfg}, seeds, "out");
    ASSERT_EQ(jobs.size(), 24u);
    std::set<std::string> dirs;
    for (const auto& j : jobs) dirs.insert(j.dir.string());
    EXPECT_EQ(dirs.size(), 24u);
}

TEST(Ablate, SummaryStatsUseSampleStd) {
    const auto c = summarize({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(*c.mean, 2.5);
    EXPECT_NEAR(*c.std, std::sqrt(5.0 / 3.0), 1e-12);
    EXPECT_EQ(*summarize({7.0}).std, 0.0);
    EXPECT_FALSE(summarize({}).mean);
}

TEST(Ablate, DominanceTableFixture) {
    std::vector<AblationRun> runs;
    auto add = [&](const std::string& mask, std::uint64_t seed, double v, bool ok = true) {
        AblationRun r;
        r.env = "e";
        r.mask = mask;
        r.seed = seed;
        r.ok = ok;
        if (ok) r.metrics["safety_adjusted_return"] = v;
        runs.push_back(r);
    };
    add("HAE", 1, 5.0);
    add("HAE", 2, 1.0);
    add("HA-", 1, 4.0);
    add("HA-", 2, 3.0);
    add("H-E", 1, 0.0, false);
    const auto table = dominance_table(runs);
    ASSERT_EQ(table.size(), 7u);
    EXPECT_EQ(table[0].reduced_mask, "HA-");
    EXPECT_EQ(table[0].pairs, 2);
    EXPECT_DOUBLE_EQ(table[0].full_mean, 3.0);
    EXPECT_DOUBLE_EQ(table[0].reduced_mean, 3.5);
    EXPECT_DOUBLE_EQ(table[0].win_fraction, 0.5);
    EXPECT_FALSE(table[0].dominates);
    EXPECT_EQ(table[1].pairs, 0); // failed run leaves the cell empty
    std::stringstream ss;
    write_dominance_csv(ss, table);
    EXPECT_NE(ss.str().find("e,HAE,H-E,safety_adjusted_return,NA,NA,NA,NA,0,0"), std::string::npos);
}
