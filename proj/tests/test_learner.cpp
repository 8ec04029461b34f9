#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace intero;

namespace {

// Deterministic 3-state MDP: action 0 advances (s+1)%3, action 1 stays.
constexpr std::array<std::array<double, 2>, 3> kReward{{{0.0, 0.1}, {-0.2, 0.0}, {1.0, -0.5}}};
int next_state(int s, int a) { return a == 0 ? (s + 1) % 3 : s; }

std::array<std::array<double, 2>, 3> value_iteration(double gamma) {
    std::array<std::array<double, 2>, 3> q{};
    for (int it = 0; it < 5000; ++it) {
        auto nq = q;
        for (int s = 0; s < 3; ++s) {
            for (int a = 0; a < 2; ++a) {
                const auto& n = q[static_cast<std::size_t>(next_state(s, a))];
                nq[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] =
                    kReward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] + gamma * std::max(n[0], n[1]);
            }
        }
        q = nq;
    }
    return q;
}

} // namespace

TEST(Learner, TdUpdateFormula) {
    LearnerConfig cfg;
    cfg.alpha = 0.25;
    cfg.gamma_task = 0.5;
    QTable q(2, 2, 0, cfg);
    const AugmentedState s0{0, {}}, s1{1, {}};
    q.set(s1, 0, 4.0);
    q.set(s1, 1, 2.0);
    q.set(s0, 1, 1.0);
    const double err = q.td_update(s0, 1, 0.5, s1);
    // target 0.5 + 0.5 * 4 = 2.5, error 1.5, Q += 0.375
    EXPECT_DOUBLE_EQ(err, 1.5);
    EXPECT_DOUBLE_EQ(q.value(s0, 1), 1.375);
    EXPECT_THROW(q.td_update(s0, 2, 0.0, s1), UsageError);
    EXPECT_THROW(q.td_update(s0, 0, NAN, s1), UsageError);
}

TEST(Learner, ConvergesToValueIteration) {
    LearnerConfig cfg;
    cfg.alpha = 0.2;
    cfg.gamma_task = 0.9;
    QTable q(3, 2, 0, cfg);
    std::mt19937_64 gen(5);
    const double bound = 1.0 / (1.0 - cfg.gamma_task);
    int s = 0;
    for (int i = 0; i < 60000; ++i) {
        const int a = static_cast<int>(gen() % 2);
        const int n = next_state(s, a);
        q.td_update({s, {}}, a, kReward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)], {n, {}});
        ASSERT_LE(q.max_abs(), bound + 1e-9); // |Q| <= r_max / (1 - gamma) from a zero start
        s = n;
    }
    const auto vi = value_iteration(cfg.gamma_task);
    for (int st = 0; st < 3; ++st) {
        for (int a = 0; a < 2; ++a) {
            EXPECT_NEAR(q.value({st, {}}, a), vi[static_cast<std::size_t>(st)][static_cast<std::size_t>(a)], 1e-6);
        }
    }
}

TEST(Learner, BinningClampsToEdges) {
    const auto b = test::two_dim_bounds();
    EXPECT_EQ(bin_viability(std::vector<double>{1.0, 0.0}, b, 1), (std::vector<int>{0, 0}));
    EXPECT_EQ(bin_viability(std::vector<double>{0.0, -1.0}, b, 4), (std::vector<int>{0, 0}));
    EXPECT_EQ(bin_viability(std::vector<double>{1.99, 0.99}, b, 4), (std::vector<int>{3, 3}));
    EXPECT_EQ(bin_viability(std::vector<double>{2.5, -3.0}, b, 4), (std::vector<int>{3, 0}));
    EXPECT_EQ(bin_viability(std::vector<double>{0.6, 0.1}, b, 4), (std::vector<int>{1, 2}));
    EXPECT_THROW(bin_viability(std::vector<double>{1.0, 0.0}, b, 0), UsageError);
}

TEST(Learner, JsonDropsZeroRows) {
    QTable q(3, 2, 1, LearnerConfig{0.1, 0.9, 2});
    q.set({2, {1}}, 0, -0.5);
    const auto j = q.to_json();
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j["s2:v1"][0].get<double>(), -0.5);
}

TEST(LearnerConfig, Validation) {
    LearnerConfig c;
    c.gamma_task = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.alpha = 1.1;
    EXPECT_THROW(c.validate(), ConfigError);
}
