#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace intero;

TEST(Enact, IntrinsicValueCombinesExternalAndInternalGain) {
    DirichletModel m(3, 2, 2, {});
    const AugmentedState s{0, {0, 0}};
    EnactConfig cfg;
    cfg.lambda_e = 2.5;
    const auto iv = intrinsic_value(s, 1, m, cfg);
    const std::vector<double> ext(3, 1.0), inner(5, 1.0);
    EXPECT_NEAR(iv.ig_ext, dirichlet_expected_info_gain(ext), 1e-12);
    EXPECT_NEAR(iv.ig_int, 2 * dirichlet_expected_info_gain(inner), 1e-12);
    EXPECT_NEAR(iv.value, iv.ig_ext + 2.5 * iv.ig_int, 1e-12);
}

TEST(Enact, ScoreIsGainPerFlooredCost) {
    const EnactConfig cfg; // floor 0.01
    EXPECT_DOUBLE_EQ(exploration_score(0.5, 0.25, cfg), 2.0);
    EXPECT_DOUBLE_EQ(exploration_score(0.5, 0.0, cfg), 50.0);
    EXPECT_DOUBLE_EQ(exploration_score(0.5, 0.001, cfg), 50.0);
    EXPECT_THROW(exploration_score(0.5, -0.1, cfg), UsageError);
    // Monotone: more cost never raises the score.
    double prev = INFINITY;
    for (double c = 0.0; c < 2.0; c += 0.01) {
        const double s = exploration_score(0.3, c, cfg);
        ASSERT_LE(s, prev);
        prev = s;
    }
}

TEST(Enact, PredictedCostUsesMeanDrift) {
    const auto b = test::two_dim_bounds();
    DirichletModel m(1, 2, 2, {});
    const AugmentedState s{0, {0, 0}};
    m.observe(s, 1, 0, std::vector<double>{-0.8, 0.0});
    const std::vector<double> v{1.0, 0.0};
    EXPECT_EQ(predicted_internal_cost(v, s, 0, m, b, 1.0), 0.0);
    // 1.0 - 0.8 = 0.2 -> ((0.4 - 0.2) / 0.2)^2 = 1
    EXPECT_NEAR(predicted_internal_cost(v, s, 1, m, b, 3.0), 3.0, 1e-12);
}

TEST(EnactConfig, Validation) {
    EnactConfig c;
    c.cost_floor = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.lambda_e = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}
