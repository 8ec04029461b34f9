#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace intero;

TEST(Weights, StickBreakingHandValues) {
    const auto b = test::two_dim_bounds();
    const ArbiterConfig cfg; // urgency_gain 1
    // Margin 1, g 0: everything goes to exploration.
    auto w = compute_weights(std::vector<double>{1.0, 0.0}, b, 0.0, 0.0, cfg);
    EXPECT_DOUBLE_EQ(w.w_h, 0.0);
    EXPECT_DOUBLE_EQ(w.w_a, 0.0);
    EXPECT_DOUBLE_EQ(w.w_e, 1.0);
    // Margin 0.5, g 1: u_h 0.5, u_a 0.5 -> (0.5, 0.25, 0.25).
    w = compute_weights(std::vector<double>{0.5, 0.0}, b, 1.0, 0.0, cfg);
    EXPECT_NEAR(w.w_h, 0.5, 1e-15);
    EXPECT_NEAR(w.w_a, 0.25, 1e-15);
    EXPECT_NEAR(w.w_e, 0.25, 1e-15);
    EXPECT_FALSE(w.shielded);
    // Exploration bonus inflates the E stick: z = (0.5, 0.25, 0.25 * 2) -> / 1.25.
    w = compute_weights(std::vector<double>{0.5, 0.0}, b, 1.0, 0.5, cfg, 2.0);
    EXPECT_NEAR(w.w_h, 0.4, 1e-15);
    EXPECT_NEAR(w.w_a, 0.2, 1e-15);
    EXPECT_NEAR(w.w_e, 0.4, 1e-15);
}

TEST(Weights, ShieldOnHardViolation) {
    const auto b = test::two_dim_bounds();
    for (const auto& v : {std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}, std::vector<double>{-0.5, 3.0}}) {
        const auto w = compute_weights(v, b, 0.3, 0.2, {}, 1.0);
        EXPECT_TRUE(w.shielded);
        EXPECT_EQ(w.w_h, 1.0);
        EXPECT_EQ(w.w_a + w.w_e, 0.0);
    }
}

TEST(Weights, PropertySimplexClosure) {
    const auto b = test::two_dim_bounds();
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> e(-0.5, 2.5), t(-1.5, 1.5), g(0.0, 20.0), u(0.0, 1.0), k(0.01, 10.0);
    for (int i = 0; i < 100000; ++i) {
        ArbiterConfig cfg;
        cfg.urgency_gain = k(gen);
        const std::vector<double> v{e(gen), t(gen)};
        const auto w = compute_weights(v, b, g(gen), u(gen), cfg, g(gen));
        ASSERT_GE(w.w_h, 0.0);
        ASSERT_GE(w.w_a, 0.0);
        ASSERT_GE(w.w_e, 0.0);
        ASSERT_NEAR(w.sum(), 1.0, 1e-12);
        ASSERT_EQ(w.shielded, outside_hard(v, b));
    }
}

TEST(Weights, StabilityShareGrowsAsMarginShrinks) {
    const auto b = test::two_dim_bounds();
    double prev = -1.0;
    for (double e = 1.0; e > 0.0; e -= 0.01) {
        const auto w = compute_weights(std::vector<double>{e, 0.0}, b, 0.5, 0.5, {}, 1.0);
        ASSERT_GE(w.w_h, prev - 1e-15);
        prev = w.w_h;
    }
}

TEST(Weights, RejectsBadInputs) {
    const auto b = test::two_dim_bounds();
    EXPECT_THROW(compute_weights(std::vector<double>{1.0, 0.0}, b, NAN, 0.0, {}), UsageError);
    EXPECT_THROW(compute_weights(std::vector<double>{1.0, 0.0}, b, 0.0, 1.5, {}), UsageError);
    ArbiterConfig cfg;
    cfg.urgency_gain = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Channels, MinMaxNormalizationOverAllowed) {
    const std::vector<double> x{3.0, -1.0, 1.0, 100.0};
    const auto n = normalize_channel(x, {true, true, true, false});
    EXPECT_DOUBLE_EQ(n[0], 1.0);
    EXPECT_DOUBLE_EQ(n[1], 0.0);
    EXPECT_DOUBLE_EQ(n[2], 0.5);
    EXPECT_DOUBLE_EQ(n[3], 0.0);
    const auto flat = normalize_channel(std::vector<double>{2.0, 2.0}, {true, true});
    EXPECT_EQ(flat, (std::vector<double>{0.5, 0.5}));
}

namespace {

SelectionRequest request(const std::vector<double>& h, const std::vector<double>& a, const std::vector<double>& e,
                         ArbitrationWeights w, double tau) {
    SelectionRequest r;
    r.r_h = h;
    r.r_a = a;
    r.r_e = e;
    r.weights = w;
    r.tau = tau;
    return r;
}

} // namespace

TEST(Selection, CombinedScoreAndProbabilities) {
    const std::vector<double> h{0.0, 1.0, 2.0}, a{5.0, 5.0, 5.0}, e{1.0, 0.0, 0.0};
    RngStream rng(1, "arb");
    auto req = request(h, a, e, {0.5, 0.25, 0.25, false}, 0.2);
    const std::vector<double> risk{0.0, 0.0, 0.3};
    req.risk_penalty = risk;
    const auto sel = select_action(req, rng);
    // h -> (0, .5, 1), a -> .5 each, e -> (1, 0, 0)
    EXPECT_NEAR(sel.combined[0], 0.125 + 0.25, 1e-15);
    EXPECT_NEAR(sel.combined[1], 0.25 + 0.125, 1e-15);
    EXPECT_NEAR(sel.combined[2], 0.5 + 0.125 - 0.3, 1e-15);
    const auto p = softmax_probabilities(sel.combined, 0.2);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(sel.probs[k], p[k], 1e-15);
    EXPECT_EQ(sel.tau_effective, 0.2);
}

TEST(Selection, ArgmaxInvariantUnderTau) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> h(5), a(5), e(5);
        for (std::size_t k = 0; k < 5; ++k) {
            h[k] = u(gen);
            a[k] = u(gen);
            e[k] = u(gen);
        }
        std::size_t best = 0;
        for (double tau : {0.01, 0.1, 1.0, 10.0}) {
            RngStream rng(1, "arb");
            const auto sel = select_action(request(h, a, e, {0.3, 0.3, 0.4, false}, tau), rng);
            const auto arg = static_cast<std::size_t>(std::max_element(sel.probs.begin(), sel.probs.end()) - sel.probs.begin());
            if (tau == 0.01) best = arg;
            ASSERT_EQ(arg, best);
        }
    }
}

TEST(Selection, ShieldRestrictsToRecoveryAtTauMin) {
    const std::vector<double> h{10.0, 0.0, 0.0, 0.0}, a(4, 0.0), e(4, 0.0);
    RngStream rng(2, "arb");
    auto req = request(h, a, e, {1.0, 0.0, 0.0, true}, 0.4);
    req.tau_min = 0.05;
    req.recovery_actions = {1, 3};
    for (int i = 0; i < 500; ++i) {
        const auto sel = select_action(req, rng);
        ASSERT_TRUE(sel.action == 1 || sel.action == 3);
        ASSERT_EQ(sel.probs[0], 0.0);
        ASSERT_EQ(sel.tau_effective, 0.05);
        ASSERT_FALSE(sel.shield_fault);
    }
    // Recovery actions all masked: fall back to the recovery set and flag it.
    req.allowed = {true, false, true, false};
    const auto sel = select_action(req, rng);
    EXPECT_TRUE(sel.shield_fault);
    EXPECT_TRUE(sel.action == 1 || sel.action == 3);
    req.recovery_actions = {7};
    EXPECT_THROW(select_action(req, rng), UsageError);
}

TEST(Selection, MaskedActionsNeverChosen) {
    const std::vector<double> h{0.0, 1.0, 2.0}, a(3, 0.0), e(3, 0.0);
    RngStream rng(4, "arb");
    auto req = request(h, a, e, {1.0, 0.0, 0.0, false}, 5.0);
    req.allowed = {true, true, false};
    for (int i = 0; i < 300; ++i) ASSERT_NE(select_action(req, rng).action, 2);
    req.allowed = {false, false, false};
    EXPECT_THROW(select_action(req, rng), UsageError);
}
