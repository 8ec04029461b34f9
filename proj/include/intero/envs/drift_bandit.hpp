#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "intero/envs.hpp"
#include "intero/errors.hpp"
#include "intero/rng.hpp"

namespace intero {

struct DriftBanditConfig {
    int arms = 4;
    std::vector<double> payouts{0.0, 0.5, 1.0}; // reward of each outcome level
    std::vector<std::vector<double>> arm_probs;  // empty = randomize from the env stream
    double peak = 0.85;                          // dominant-outcome mass when randomizing
    double pull_cost = 0.02;
    int episode_len = 40;
    int shift_window = 50;
    std::size_t internal_dims = 2;
    DriftSchedule drift; // blocks are per-arm outcome distributions

    void validate() const {
        if (arms < 2) throw ConfigError("drift_bandit: at least 2 arms required");
        if (payouts.size() < 2) throw ConfigError("drift_bandit: at least 2 payout levels required");
        if (!(peak > 0.0 && peak <= 1.0)) throw ConfigError("drift_bandit: peak must be in (0,1]");
        if (episode_len < 1) throw ConfigError("env.episode_len must be >= 1");
        if (shift_window < 1) throw ConfigError("env.shift_window must be >= 1");
        if (internal_dims < 1) throw ConfigError("drift_bandit: at least one internal dimension required");
        auto check_block = [&](const std::vector<std::vector<double>>& block) {
            if (block.empty()) return;
            if (block.size() != static_cast<std::size_t>(arms)) throw ConfigError("drift_bandit: one distribution per arm required");
            for (const auto& p : block) {
                if (p.size() != payouts.size()) throw ConfigError("drift_bandit: distribution length must equal payout levels");
                double s = 0.0;
                for (double x : p) {
                    if (!(x >= 0.0)) throw ConfigError("drift_bandit: probabilities must be >= 0");
                    s += x;
                }
                if (std::abs(s - 1.0) > 1e-9) throw ConfigError("drift_bandit: arm distribution must sum to 1");
            }
        };
        check_block(arm_probs);
        drift.validate();
        for (const auto& cp : drift.change_points) check_block(cp.block);
    }
};

/// k-armed bandit whose external state is the last outcome level (or "deferred").
/// Actions 0..k-1 pull arms; action k defers at no cost and no reward.
class DriftBandit final : public Environment {
public:
    DriftBandit(DriftBanditConfig cfg, RngStream rng) : cfg_(std::move(cfg)), rng_(std::move(rng)) {
        cfg_.validate();
        probs_ = cfg_.arm_probs.empty() ? randomized() : cfg_.arm_probs;
        from_ = probs_;
        to_ = probs_;
        check_recovery_coverage();
    }

    std::string_view kind() const override { return "drift_bandit"; }
    int state_count() const override { return levels() + 1; }
    int action_count() const override { return cfg_.arms + 1; }
    std::size_t internal_dims() const override { return cfg_.internal_dims; }
    int episode_len() const override { return cfg_.episode_len; }
    std::optional<int> defer_action() const override { return cfg_.arms; }
    std::vector<int> recovery_actions(int) const override { return {cfg_.arms}; }

    std::string action_name(int a) const override {
        return a == cfg_.arms ? std::string("defer") : "arm" + std::to_string(a);
    }

    int deferred_state() const { return levels(); }
    int levels() const { return static_cast<int>(cfg_.payouts.size()); }
    const std::vector<std::vector<double>>& arm_distributions() const { return probs_; }

    int reset() override {
        state_ = deferred_state();
        return state_;
    }

    StepResult step(int action, std::span<const double> v) override {
        if (action < 0 || action > cfg_.arms) throw UsageError("drift_bandit: action out of range");
        if (v.size() != cfg_.internal_dims) throw UsageError("drift_bandit: internal dimension mismatch");
        StepResult r;
        apply_drift_schedule(r.flags);
        r.drift.assign(cfg_.internal_dims, 0.0);
        if (action == cfg_.arms) {
            state_ = deferred_state();
        } else {
            state_ = rng_.categorical(probs_[static_cast<std::size_t>(action)]);
            r.r_task = cfg_.payouts[static_cast<std::size_t>(state_)];
            r.drift[0] = -cfg_.pull_cost;
            r.action_cost = cfg_.pull_cost;
        }
        r.next_state = state_;
        ++global_t_;
        return r;
    }

private:
    /// Peaked random distributions; after the first draw each arm's dominant level moves.
    std::vector<std::vector<double>> randomized() {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(cfg_.arms));
        const int n = levels();
        for (std::size_t a = 0; a < out.size(); ++a) {
            auto& p = out[a];
            int dominant = rng_.uniform_int(n);
            if (!probs_.empty()) {
                const auto& old = probs_[a];
                const int old_dominant = static_cast<int>(std::max_element(old.begin(), old.end()) - old.begin());
                dominant = (old_dominant + 1 + rng_.uniform_int(n - 1)) % n;
            }
            p.assign(static_cast<std::size_t>(n), (1.0 - cfg_.peak) / (n - 1));
            p[static_cast<std::size_t>(dominant)] = cfg_.peak;
        }
        return out;
    }

    void apply_drift_schedule(EventFlags& flags) {
        for (std::size_t i = 0; i < cfg_.drift.change_points.size(); ++i) {
            const auto& cp = cfg_.drift.change_points[i];
            if (cp.step == global_t_) {
                flags.change_point = true;
                from_ = probs_;
                to_ = cp.block.empty() ? randomized() : cp.block;
                active_ = static_cast<int>(i);
            }
            if (global_t_ >= cp.step && global_t_ < cp.step + cfg_.shift_window) flags.shift_window = true;
        }
        if (active_ >= 0) {
            const auto& cp = cfg_.drift.change_points[static_cast<std::size_t>(active_)];
            const double frac = cp.kind == DriftKind::Abrupt
                                    ? 1.0
                                    : std::min(1.0, static_cast<double>(global_t_ - cp.step + 1) / cp.duration);
            for (std::size_t a = 0; a < probs_.size(); ++a) {
                for (std::size_t k = 0; k < probs_[a].size(); ++k) {
                    probs_[a][k] = (1.0 - frac) * from_[a][k] + frac * to_[a][k];
                }
            }
            if (frac >= 1.0) active_ = -1;
        }
    }

    DriftBanditConfig cfg_;
    RngStream rng_;
    std::vector<std::vector<double>> probs_, from_, to_;
    int active_ = -1;
    int state_ = 0;
    long long global_t_ = 0;
};

} // namespace intero
