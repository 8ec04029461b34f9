#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <nlohmann/json.hpp>

#include "intero/core_state.hpp"
#include "intero/errors.hpp"

namespace intero {

/// Shannon entropy (nats) of a concentration vector's mean, p_k = alpha_k / sum(alpha).
inline double dirichlet_predictive_entropy(std::span<const double> alpha) {
    double a0 = 0.0;
    for (double a : alpha) a0 += a;
    double h = 0.0;
    for (double a : alpha) {
        const double p = a / a0;
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

/// Expected KL from Dir(alpha) to the one-observation posterior Dir(alpha + e_k),
/// averaged under the posterior predictive p_k = alpha_k / alpha_0:
///   sum_k p_k [ ln alpha_0 - ln alpha_k + psi(alpha_k + 1) - psi(alpha_0 + 1) ].
/// Equals the mutual information between the next outcome and the categorical parameters.
inline double dirichlet_expected_info_gain(std::span<const double> alpha) {
    double a0 = 0.0;
    for (double a : alpha) a0 += a;
    const double log_a0 = std::log(a0);
    const double psi_a0 = boost::math::digamma(a0 + 1.0);
    double ig = 0.0;
    for (double a : alpha) {
        const double kl = log_a0 - std::log(a) + boost::math::digamma(a + 1.0) - psi_a0;
        ig += (a / a0) * kl;
    }
    return std::max(ig, 0.0);
}

struct WorldModelConfig {
    double prior = 1.0;       // alpha_0 per cell entry
    double pe_decay = 0.05;   // beta of the prediction-error EMA
    int drift_bins = 5;       // outcome bins per internal dimension
    double drift_range = 0.2; // inner bins tile [-range, range]
    int v_bins = 1;           // internal-state bins in the model's augmented state

    void validate() const {
        if (!(prior > 0.0)) throw ConfigError("world_model.prior must be > 0");
        if (!(pe_decay > 0.0 && pe_decay <= 1.0)) throw ConfigError("world_model.pe_decay must be in (0,1]");
        if (drift_bins < 1) throw ConfigError("world_model.drift_bins must be >= 1");
        if (!(drift_range > 0.0)) throw ConfigError("world_model.drift_range must be > 0");
        if (v_bins < 1) throw ConfigError("world_model.v_bins must be >= 1");
    }
};

struct Prediction {
    std::vector<double> probs;      // over successor external states
    std::vector<double> drift_mean; // expected internal drift
};

/// Dirichlet-categorical model of external transitions and internal drift outcomes,
/// indexed by (augmented state, action).
///
/// Read-side queries memoize per cell, so a model must not be read from several
/// threads at once; runs own their model.
class DirichletModel {
public:
    DirichletModel(int state_count, int action_count, std::size_t dims, WorldModelConfig cfg = {})
        : cfg_(cfg),
          index_(state_count, dims, cfg.v_bins),
          actions_(action_count),
          successors_(state_count),
          dims_(dims) {
        cfg_.validate();
        if (action_count < 1) throw ConfigError("DirichletModel: action_count must be >= 1");
        const std::size_t cells = index_.size() * static_cast<std::size_t>(actions_);
        counts_.assign(cells * static_cast<std::size_t>(successors_), cfg_.prior);
        count_sum_.assign(cells, cfg_.prior * successors_);
        obs_total_.assign(cells, 0);
        drift_mean_.assign(cells * dims_, 0.0);
        drift_m2_.assign(cells * dims_, 0.0);
        drift_counts_.assign(cells * dims_ * static_cast<std::size_t>(cfg_.drift_bins), cfg_.prior);
        entropy_cache_.assign(cells, kStale);
        ig_ext_cache_.assign(cells, kStale);
        ig_int_cache_.assign(cells, kStale);
    }

    const WorldModelConfig& config() const noexcept { return cfg_; }
    const StateIndexer& indexer() const noexcept { return index_; }
    int action_count() const noexcept { return actions_; }
    int successor_count() const noexcept { return successors_; }
    std::size_t dims() const noexcept { return dims_; }
    double pe_ema() const noexcept { return pe_ema_; }

    /// Bin of a scalar drift: n equal bins over [-range, range], the outer two open-ended.
    int drift_bin(double d) const {
        const int n = cfg_.drift_bins;
        const double width = 2.0 * cfg_.drift_range / n;
        const double pos = std::floor((d + cfg_.drift_range) / width);
        return static_cast<int>(std::clamp(pos, 0.0, static_cast<double>(n - 1)));
    }

    std::size_t cell(const AugmentedState& st, int a) const {
        if (a < 0 || a >= actions_) throw UsageError("DirichletModel: action " + std::to_string(a) + " out of range");
        return index_.index(st) * static_cast<std::size_t>(actions_) + static_cast<std::size_t>(a);
    }

    std::span<const double> concentration(const AugmentedState& st, int a) const {
        return concentration(cell(st, a));
    }

    std::span<const double> concentration(std::size_t c) const {
        return {counts_.data() + c * static_cast<std::size_t>(successors_), static_cast<std::size_t>(successors_)};
    }

    std::span<const double> drift_outcome_concentration(const AugmentedState& st, int a, std::size_t dim) const {
        const std::size_t nb = static_cast<std::size_t>(cfg_.drift_bins);
        return {drift_counts_.data() + (cell(st, a) * dims_ + dim) * nb, nb};
    }

    long long observations(const AugmentedState& st, int a) const { return obs_total_[cell(st, a)]; }

    double probability(const AugmentedState& st, int a, int next_external) const {
        const std::size_t c = cell(st, a);
        check_successor(next_external);
        return counts_[c * static_cast<std::size_t>(successors_) + static_cast<std::size_t>(next_external)] /
               count_sum_[c];
    }

    Prediction predict(const AugmentedState& st, int a) const {
        const std::size_t c = cell(st, a);
        Prediction out;
        out.probs.resize(static_cast<std::size_t>(successors_));
        const auto alpha = concentration(c);
        for (int k = 0; k < successors_; ++k) out.probs[k] = alpha[k] / count_sum_[c];
        out.drift_mean.assign(drift_mean_.begin() + static_cast<std::ptrdiff_t>(c * dims_),
                              drift_mean_.begin() + static_cast<std::ptrdiff_t>((c + 1) * dims_));
        return out;
    }

    std::span<const double> drift_mean(const AugmentedState& st, int a) const {
        return {drift_mean_.data() + cell(st, a) * dims_, dims_};
    }

    /// Sample variance (n divisor) of the observed drift; zero for unseen cells.
    std::vector<double> drift_variance(const AugmentedState& st, int a) const {
        const std::size_t c = cell(st, a);
        std::vector<double> var(dims_, 0.0);
        if (obs_total_[c] > 0) {
            for (std::size_t d = 0; d < dims_; ++d) var[d] = drift_m2_[c * dims_ + d] / static_cast<double>(obs_total_[c]);
        }
        return var;
    }

    double predictive_entropy(const AugmentedState& st, int a) const {
        const std::size_t c = cell(st, a);
        if (std::isnan(entropy_cache_[c])) entropy_cache_[c] = dirichlet_predictive_entropy(concentration(c));
        return entropy_cache_[c];
    }

    /// Entropy normalized by ln(K); zero when there is a single successor.
    double normalized_entropy(const AugmentedState& st, int a) const {
        if (successors_ < 2) return 0.0;
        return std::clamp(predictive_entropy(st, a) / std::log(static_cast<double>(successors_)), 0.0, 1.0);
    }

    /// Expected information gain about the external-transition parameters.
    double expected_info_gain(const AugmentedState& st, int a) const {
        const std::size_t c = cell(st, a);
        if (std::isnan(ig_ext_cache_[c])) ig_ext_cache_[c] = dirichlet_expected_info_gain(concentration(c));
        return ig_ext_cache_[c];
    }

    /// Expected information gain about the internal drift-outcome parameters, summed over dimensions.
    double internal_info_gain(const AugmentedState& st, int a) const {
        const std::size_t c = cell(st, a);
        if (std::isnan(ig_int_cache_[c])) {
            double ig = 0.0;
            for (std::size_t d = 0; d < dims_; ++d) ig += dirichlet_expected_info_gain(drift_outcome_concentration(st, a, d));
            ig_int_cache_[c] = ig;
        }
        return ig_int_cache_[c];
    }

    /// Bayesian update for one observed transition (the model's only mutator).
    void observe(const AugmentedState& prev, int a, int next_external, std::span<const double> drift) {
        const std::size_t c = cell(prev, a);
        check_successor(next_external);
        if (drift.size() != dims_) throw UsageError("DirichletModel::observe: drift has wrong dimension");

        const std::size_t k = c * static_cast<std::size_t>(successors_) + static_cast<std::size_t>(next_external);
        const double p_pred = counts_[k] / count_sum_[c];
        pe_ema_ = (1.0 - cfg_.pe_decay) * pe_ema_ + cfg_.pe_decay * (1.0 - p_pred);

        counts_[k] += 1.0;
        count_sum_[c] += 1.0;
        const long long n = ++obs_total_[c];

        const std::size_t nb = static_cast<std::size_t>(cfg_.drift_bins);
        for (std::size_t d = 0; d < dims_; ++d) {
            // Welford running mean / M2.
            double& mean = drift_mean_[c * dims_ + d];
            const double delta = drift[d] - mean;
            mean += delta / static_cast<double>(n);
            drift_m2_[c * dims_ + d] += delta * (drift[d] - mean);
            drift_counts_[(c * dims_ + d) * nb + static_cast<std::size_t>(drift_bin(drift[d]))] += 1.0;
        }
        entropy_cache_[c] = kStale;
        ig_ext_cache_[c] = kStale;
        ig_int_cache_[c] = kStale;
    }

    void set_pe_ema(double pe) {
        if (!(pe >= 0.0)) throw UsageError("pe_ema must be >= 0");
        pe_ema_ = pe;
    }

    /// Visited cells only: "s<id>:v<b0>-<b1>..:a<id>" -> concentration vector.
    nlohmann::json snapshot() const {
        nlohmann::json j = nlohmann::json::object();
        for (std::size_t c = 0; c < obs_total_.size(); ++c) {
            if (obs_total_[c] == 0) continue;
            const auto st = index_.unindex(c / static_cast<std::size_t>(actions_));
            std::ostringstream key;
            key << 's' << st.external << ":v";
            for (std::size_t i = 0; i < st.internal_bin.size(); ++i) {
                if (i) key << '-';
                key << st.internal_bin[i];
            }
            key << ":a" << c % static_cast<std::size_t>(actions_);
            const auto alpha = concentration(c);
            j[key.str()] = std::vector<double>(alpha.begin(), alpha.end());
        }
        return j;
    }

private:
    static constexpr double kStale = std::numeric_limits<double>::quiet_NaN();

    void check_successor(int next) const {
        if (next < 0 || next >= successors_) {
            throw UsageError("DirichletModel: successor " + std::to_string(next) + " out of range");
        }
    }

    WorldModelConfig cfg_;
    StateIndexer index_;
    int actions_;
    int successors_;
    std::size_t dims_;
    std::vector<double> counts_;
    std::vector<double> count_sum_;
    std::vector<long long> obs_total_;
    std::vector<double> drift_mean_;
    std::vector<double> drift_m2_;
    std::vector<double> drift_counts_;
    double pe_ema_ = 0.0;
    mutable std::vector<double> entropy_cache_;
    mutable std::vector<double> ig_ext_cache_;
    mutable std::vector<double> ig_int_cache_;
};

} // namespace intero
