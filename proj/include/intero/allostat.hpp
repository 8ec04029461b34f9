#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "intero/core_state.hpp"
#include "intero/errors.hpp"
#include "intero/learner.hpp"
#include "intero/rng.hpp"
#include "intero/world_model.hpp"

namespace intero {

/// Indices into the viability feature vector.
enum Feature : std::size_t { kBoundary = 0, kEntropy = 1, kPredictionError = 2, kViolation = 3 };
inline constexpr std::size_t kFeatureCount = 4;
using FeatureVector = std::array<double, kFeatureCount>;

struct AllostatConfig {
    int horizon = 4;
    double gamma_allo = 0.8;
    int n_rollouts = 16;
    FeatureVector feature_weights{1.0, 0.5, 0.5, 2.0};
    double abstain_threshold = 1.5;
    double risk_coeff = 1.0;

    void validate() const {
        if (horizon < 0) throw ConfigError("allostat.horizon must be >= 0");
        if (!(gamma_allo >= 0.0 && gamma_allo < 1.0)) throw ConfigError("allostat.gamma must be in [0,1)");
        if (n_rollouts < 1) throw ConfigError("allostat.n_rollouts must be >= 1");
        for (double w : feature_weights) {
            if (!(w >= 0.0)) throw ConfigError("allostat.weights must be nonnegative");
        }
        if (!std::isfinite(abstain_threshold)) throw ConfigError("allostat.abstain_threshold must be finite");
        if (!(risk_coeff >= 0.0)) throw ConfigError("allostat.risk_coeff must be >= 0");
    }

    /// Upper bound on g: sum(w) * (1 - gamma^(H+1)) / (1 - gamma).
    double g_upper_bound() const {
        double wsum = 0.0;
        for (double w : feature_weights) wsum += w;
        return wsum * (1.0 - std::pow(gamma_allo, horizon + 1)) / (1.0 - gamma_allo);
    }
};

struct AllostaticSignal {
    double g = 0.0;
    FeatureVector per_feature{};
    int horizon_used = 0;
    int rollouts_used = 0;
};

inline double weighted(const FeatureVector& w, const FeatureVector& phi) {
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) s += w[i] * phi[i];
    return s;
}

/// [1 - margin, normalized predictive entropy, clamped prediction-error EMA, hard violation flag].
inline FeatureVector viability_features(std::span<const double> v_hat, const AugmentedState& st_hat, int a_hat,
                                        const DirichletModel& model, const ViabilityBounds& b) {
    return {1.0 - viability_margin(v_hat, b),
            model.normalized_entropy(st_hat, a_hat),
            std::clamp(model.pe_ema(), 0.0, 1.0),
            outside_hard(v_hat, b) ? 1.0 : 0.0};
}

inline FeatureVector viability_features(const ViabilityVector& v_hat, const AugmentedState& st_hat, int a_hat,
                                        const DirichletModel& model, const ViabilityBounds& b) {
    return viability_features(v_hat.values(), st_hat, a_hat, model, b);
}

/// Internal state advanced by a mean drift, kept inside the same clamp window as the real dynamics.
inline std::vector<double> advance_mean(std::span<const double> v, std::span<const double> drift,
                                        const ViabilityBounds& b) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::clamp(v[i] + drift[i], b.hard_lo[i] - 1.0, b.hard_hi[i] + 1.0);
    }
    return out;
}

/// Predicted next-step threat w^T phi under action a: features of the drift-mean successor
/// internal state, with the action's own outcome uncertainty.
inline double one_step_threat(std::span<const double> v, const AugmentedState& st, int a, const DirichletModel& model,
                              const ViabilityBounds& b, const AllostatConfig& cfg) {
    const auto v_next = advance_mean(v, model.drift_mean(st, a), b);
    return weighted(cfg.feature_weights, viability_features(v_next, st, a, model, b));
}

/// Monte-Carlo estimate of the discounted expected threat accumulation g_t.
///
/// `policy(external, v)` must return an action distribution. Rollouts sample actions from it,
/// successors from the model's posterior predictive, and advance v by the model's mean drift.
/// The model is only read.
template <class Policy>
AllostaticSignal estimate_g(int external, std::span<const double> v, Policy&& policy, const DirichletModel& model,
                            const ViabilityBounds& b, const AllostatConfig& cfg, RngStream& rng) {
    b.check_dims(v.size());
    const int model_bins = model.config().v_bins;
    FeatureVector acc{};
    for (int m = 0; m < cfg.n_rollouts; ++m) {
        int s_hat = external;
        std::vector<double> v_hat(v.begin(), v.end());
        double discount = 1.0;
        for (int step = 0; step <= cfg.horizon; ++step) {
            const AugmentedState st = augment(s_hat, v_hat, b, model_bins);
            const std::vector<double> probs = policy(s_hat, std::span<const double>(v_hat));
            const int a_hat = rng.categorical(probs);
            const FeatureVector phi = viability_features(v_hat, st, a_hat, model, b);
            for (std::size_t i = 0; i < kFeatureCount; ++i) acc[i] += discount * phi[i];
            discount *= cfg.gamma_allo;
            if (step == cfg.horizon || discount == 0.0) break;
            s_hat = rng.categorical(model.concentration(st, a_hat));
            v_hat = advance_mean(v_hat, model.drift_mean(st, a_hat), b);
        }
    }
    AllostaticSignal sig;
    for (std::size_t i = 0; i < kFeatureCount; ++i) sig.per_feature[i] = acc[i] / cfg.n_rollouts;
    sig.g = weighted(cfg.feature_weights, sig.per_feature);
    sig.horizon_used = cfg.horizon;
    sig.rollouts_used = cfg.n_rollouts;
    return sig;
}

template <class Policy>
AllostaticSignal estimate_g(int external, const ViabilityVector& v, Policy&& policy, const DirichletModel& model,
                            const ViabilityBounds& b, const AllostatConfig& cfg, RngStream& rng) {
    return estimate_g(external, v.values(), std::forward<Policy>(policy), model, b, cfg, rng);
}

struct AllostatOutput {
    double tau_multiplier = 1.0;
    double risk_scale = 0.0; // kappa_risk * g
    bool abstain = false;
    double info_seek_bonus = 0.0;

    /// Additive penalty for an action whose predicted next-step threat is `threat`.
    double risk_penalty(double threat) const { return risk_scale * threat; }
};

/// Policy modulation derived from g. Pure in (g, cfg); g never feeds a learning update.
inline AllostatOutput modulate(const AllostaticSignal& g, const AllostatConfig& cfg) {
    if (!std::isfinite(g.g)) throw UsageError("modulate: non-finite g");
    AllostatOutput out;
    out.tau_multiplier = 1.0 / (1.0 + cfg.risk_coeff * g.g);
    out.risk_scale = cfg.risk_coeff * g.g;
    out.abstain = g.g > cfg.abstain_threshold;
    out.info_seek_bonus = cfg.risk_coeff * g.g;
    return out;
}

} // namespace intero
