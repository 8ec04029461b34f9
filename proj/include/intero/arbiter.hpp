#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "intero/core_state.hpp"
#include "intero/errors.hpp"
#include "intero/homeostat.hpp"
#include "intero/rng.hpp"

namespace intero {

struct ArbitrationWeights {
    double w_h = 1.0;
    double w_a = 0.0;
    double w_e = 0.0;
    bool shielded = false;

    double sum() const { return w_h + w_a + w_e; }
};

struct ArbiterConfig {
    double urgency_gain = 1.0;

    void validate() const {
        if (!(urgency_gain > 0.0)) throw ConfigError("arbiter.urgency_gain must be > 0");
    }
};

/// Stick-breaking weights: stability claims 1 - margin first, anticipation claims its urgency
/// share of the remainder, exploration takes the rest. Any hard-bound violation shields.
///
/// `info_seek_bonus * model_uncertainty` inflates the exploration stick before normalization.
inline ArbitrationWeights compute_weights(std::span<const double> v, const ViabilityBounds& b, double g,
                                          double model_uncertainty, const ArbiterConfig& cfg,
                                          double info_seek_bonus = 0.0) {
    if (!std::isfinite(g) || !std::isfinite(model_uncertainty)) throw UsageError("compute_weights: non-finite input");
    if (model_uncertainty < 0.0 || model_uncertainty > 1.0) {
        throw UsageError("compute_weights: model_uncertainty must lie in [0,1]");
    }
    if (outside_hard(v, b)) return {1.0, 0.0, 0.0, true};

    const double u_h = 1.0 - viability_margin(v, b);
    const double kg = cfg.urgency_gain * std::max(g, 0.0);
    const double u_a = std::clamp(kg / (1.0 + kg), 0.0, 1.0);

    const double z_h = u_h;
    const double z_a = (1.0 - u_h) * u_a;
    const double z_e = (1.0 - u_h) * (1.0 - u_a) * (1.0 + info_seek_bonus * model_uncertainty);
    const double total = z_h + z_a + z_e;
    if (!(total > 0.0)) return {0.0, 0.0, 1.0, false};
    ArbitrationWeights w{z_h / total, z_a / total, z_e / total, false};
    // Put the rounding residue on the largest weight so the sum is exact.
    const double residue = 1.0 - (w.w_h + w.w_a + w.w_e);
    if (w.w_h >= w.w_a && w.w_h >= w.w_e) w.w_h += residue;
    else if (w.w_a >= w.w_e) w.w_a += residue;
    else w.w_e += residue;
    return w;
}

inline ArbitrationWeights compute_weights(const ViabilityVector& v, const ViabilityBounds& b, double g,
                                          double model_uncertainty, const ArbiterConfig& cfg,
                                          double info_seek_bonus = 0.0) {
    return compute_weights(v.values(), b, g, model_uncertainty, cfg, info_seek_bonus);
}

/// Min-max normalization over the allowed actions; a constant channel maps to 0.5.
/// Disallowed entries are left at 0.
inline std::vector<double> normalize_channel(std::span<const double> x, const std::vector<bool>& allowed) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t a = 0; a < x.size(); ++a) {
        if (!allowed[a]) continue;
        lo = std::min(lo, x[a]);
        hi = std::max(hi, x[a]);
    }
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t a = 0; a < x.size(); ++a) {
        if (!allowed[a]) continue;
        out[a] = hi > lo ? (x[a] - lo) / (hi - lo) : 0.5;
    }
    return out;
}

struct SelectionRequest {
    std::span<const double> r_h;          // learned Q of the shaped reward
    std::span<const double> r_a;          // negated one-step threat
    std::span<const double> r_e;          // exploration scores
    std::span<const double> risk_penalty; // optional, subtracted after combination
    ArbitrationWeights weights;
    double tau = 1.0;
    double tau_min = 0.05;                // used when shielded
    std::vector<bool> allowed;            // empty = all allowed
    std::vector<int> recovery_actions;
};

struct Selection {
    int action = 0;
    std::vector<double> combined;
    std::vector<double> probs;
    double tau_effective = 1.0;
    bool shield_fault = false;
};

/// Combined score w_h R_H + w_a R_A + w_e R_E over normalized channels, sampled by softmax.
/// Under the shield the choice is restricted to recovery actions at tau_min.
inline Selection select_action(const SelectionRequest& req, RngStream& rng) {
    const std::size_t n = req.r_h.size();
    if (n == 0) throw UsageError("select_action: no actions");
    if (req.r_a.size() != n || req.r_e.size() != n) throw UsageError("select_action: channel length mismatch");
    if (!req.risk_penalty.empty() && req.risk_penalty.size() != n) {
        throw UsageError("select_action: risk penalty length mismatch");
    }

    std::vector<bool> allowed = req.allowed.empty() ? std::vector<bool>(n, true) : req.allowed;
    if (allowed.size() != n) throw UsageError("select_action: mask length mismatch");

    Selection sel;
    sel.tau_effective = req.tau;
    if (req.weights.shielded) {
        std::vector<bool> rec(n, false);
        for (int a : req.recovery_actions) {
            if (a < 0 || static_cast<std::size_t>(a) >= n) throw UsageError("select_action: recovery action out of range");
            rec[static_cast<std::size_t>(a)] = true;
        }
        std::vector<bool> both(n, false);
        bool any = false;
        for (std::size_t a = 0; a < n; ++a) any |= (both[a] = allowed[a] && rec[a]);
        if (!any) {
            sel.shield_fault = true;
            both = rec;
        }
        allowed = std::move(both);
        sel.tau_effective = req.tau_min;
    }
    if (std::none_of(allowed.begin(), allowed.end(), [](bool b) { return b; })) {
        throw UsageError("select_action: empty action set");
    }

    const auto nh = normalize_channel(req.r_h, allowed);
    const auto na = normalize_channel(req.r_a, allowed);
    const auto ne = normalize_channel(req.r_e, allowed);

    std::vector<double> score;
    std::vector<int> index;
    sel.combined.assign(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        sel.combined[a] = req.weights.w_h * nh[a] + req.weights.w_a * na[a] + req.weights.w_e * ne[a];
        if (!req.risk_penalty.empty()) sel.combined[a] -= req.risk_penalty[a];
        if (allowed[a]) {
            score.push_back(sel.combined[a]);
            index.push_back(static_cast<int>(a));
        }
    }
    const auto p = softmax_probabilities(score, sel.tau_effective);
    sel.probs.assign(n, 0.0);
    for (std::size_t i = 0; i < index.size(); ++i) sel.probs[static_cast<std::size_t>(index[i])] = p[i];
    sel.action = index[static_cast<std::size_t>(rng.categorical(p))];
    return sel;
}

} // namespace intero
