#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "intero/core_state.hpp"
#include "intero/errors.hpp"

namespace intero {

/// Uniform per-dimension bins over the hard range; out-of-range values clamp to the edge bins.
inline std::vector<int> bin_viability(std::span<const double> v, const ViabilityBounds& b, int bins) {
    if (bins < 1) throw UsageError("bin_viability: bins must be >= 1");
    b.check_dims(v.size());
    std::vector<int> out(v.size(), 0);
    if (bins == 1) return out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = (v[i] - b.hard_lo[i]) / (b.hard_hi[i] - b.hard_lo[i]);
        const double pos = std::floor(t * bins);
        out[i] = static_cast<int>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    }
    return out;
}

inline AugmentedState augment(int external, std::span<const double> v, const ViabilityBounds& b, int bins) {
    return AugmentedState{external, bin_viability(v, b, bins)};
}

struct LearnerConfig {
    double alpha = 0.1;
    double gamma_task = 0.95;
    int v_bins = 3;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("learner.alpha must be in [0,1]");
        if (!(gamma_task >= 0.0 && gamma_task < 1.0)) throw ConfigError("learner.gamma_task must be in [0,1)");
        if (v_bins < 1) throw ConfigError("learner.v_bins must be >= 1");
    }
};

/// Tabular action values over augmented states, trained by one-step TD control.
/// Consumes only the shaped reward; regulatory signals never enter the target.
class QTable {
public:
    QTable(int state_count, int action_count, std::size_t dims, LearnerConfig cfg)
        : cfg_(cfg), index_(state_count, dims, cfg.v_bins), actions_(action_count) {
        if (action_count < 1) throw ConfigError("QTable: action_count must be >= 1");
        values_.assign(index_.size() * static_cast<std::size_t>(actions_), 0.0);
    }

    const LearnerConfig& config() const noexcept { return cfg_; }
    const StateIndexer& indexer() const noexcept { return index_; }
    int action_count() const noexcept { return actions_; }

    std::span<const double> row(const AugmentedState& st) const {
        return {values_.data() + index_.index(st) * static_cast<std::size_t>(actions_),
                static_cast<std::size_t>(actions_)};
    }

    double value(const AugmentedState& st, int a) const { return row(st)[static_cast<std::size_t>(check(a))]; }

    void set(const AugmentedState& st, int a, double q) {
        values_[index_.index(st) * static_cast<std::size_t>(actions_) + static_cast<std::size_t>(check(a))] = q;
    }

    double max_value(const AugmentedState& st) const {
        const auto r = row(st);
        return *std::max_element(r.begin(), r.end());
    }

    /// Q(prev,a) += alpha * (r + gamma * max_a' Q(next,a') - Q(prev,a)). Returns the TD error.
    double td_update(const AugmentedState& prev, int a, double r_shaped, const AugmentedState& next) {
        if (!std::isfinite(r_shaped)) throw UsageError("td_update: non-finite reward");
        const double target = r_shaped + cfg_.gamma_task * max_value(next);
        double& q = values_[index_.index(prev) * static_cast<std::size_t>(actions_) + static_cast<std::size_t>(check(a))];
        const double err = target - q;
        q += cfg_.alpha * err;
        return err;
    }

    double max_abs() const {
        double m = 0.0;
        for (double q : values_) m = std::max(m, std::abs(q));
        return m;
    }

    std::span<const double> values() const noexcept { return values_; }

    /// Nonzero rows only: "s<id>:v<bins>" -> action values.
    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (std::size_t s = 0; s < index_.size(); ++s) {
            const auto first = values_.begin() + static_cast<std::ptrdiff_t>(s * static_cast<std::size_t>(actions_));
            const auto last = first + actions_;
            if (std::all_of(first, last, [](double q) { return q == 0.0; })) continue;
            const auto st = index_.unindex(s);
            std::string key = "s" + std::to_string(st.external) + ":v";
            for (std::size_t i = 0; i < st.internal_bin.size(); ++i) {
                if (i) key += '-';
                key += std::to_string(st.internal_bin[i]);
            }
            j[key] = std::vector<double>(first, last);
        }
        return j;
    }

private:
    int check(int a) const {
        if (a < 0 || a >= actions_) throw UsageError("QTable: action out of range");
        return a;
    }

    LearnerConfig cfg_;
    StateIndexer index_;
    int actions_;
    std::vector<double> values_;
};

} // namespace intero
