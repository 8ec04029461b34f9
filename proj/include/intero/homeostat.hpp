#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intero/core_state.hpp"
#include "intero/errors.hpp"
#include "intero/rng.hpp"

namespace intero {

enum class RegulationMode { Conservative, ActiveSearch };

inline RegulationMode parse_regulation_mode(std::string_view s) {
    if (s == "conservative") return RegulationMode::Conservative;
    if (s == "active_search") return RegulationMode::ActiveSearch;
    throw ConfigError("homeostat.mode must be \"conservative\" or \"active_search\", got \"" +
                      std::string(s) + "\"");
}

inline std::string_view to_string(RegulationMode m) {
    return m == RegulationMode::Conservative ? "conservative" : "active_search";
}

struct HomeostatConfig {
    double lambda_h = 1.0;
    double tau_min = 0.05;
    double tau_max = 0.5;
    RegulationMode mode = RegulationMode::Conservative;

    void validate() const {
        if (!(lambda_h >= 0.0)) throw ConfigError("homeostat.lambda_h must be >= 0");
        if (!(tau_min > 0.0 && tau_min < tau_max)) {
            throw ConfigError("homeostat: require 0 < tau_min < tau_max");
        }
    }

    double tau_mid() const { return 0.5 * (tau_min + tau_max); }
};

/// Asymmetric quadratic hinge around the soft range of dimension `dim`.
inline double deviation_penalty(double v_i, std::size_t dim, const ViabilityBounds& b) {
    const double below = std::max(0.0, b.soft_lo[dim] - v_i) / b.weight_lo[dim];
    const double above = std::max(0.0, v_i - b.soft_hi[dim]) / b.weight_hi[dim];
    return below * below + above * above;
}

/// c_H(v) = sum_i rho_i * deviation_penalty(v_i).
inline double homeostatic_cost(std::span<const double> v, const ViabilityBounds& b) {
    b.check_dims(v.size());
    double c = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) c += b.rho[i] * deviation_penalty(v[i], i, b);
    return c;
}

inline double homeostatic_cost(const ViabilityVector& v, const ViabilityBounds& b) {
    return homeostatic_cost(v.values(), b);
}

/// r = r_task - lambda_h * c_H(v). Never exceeds r_task.
inline double shaped_reward(double r_task, std::span<const double> v, const ViabilityBounds& b,
                            const HomeostatConfig& cfg) {
    if (!std::isfinite(r_task)) throw UsageError("shaped_reward: non-finite task reward");
    return r_task - cfg.lambda_h * homeostatic_cost(v, b);
}

inline double shaped_reward(double r_task, const ViabilityVector& v, const ViabilityBounds& b,
                            const HomeostatConfig& cfg) {
    return shaped_reward(r_task, v.values(), b, cfg);
}

/// Viability-coupled temperature, affine in the margin.
/// Conservative: deterioration lowers tau. ActiveSearch: deterioration raises tau.
inline double temperature(std::span<const double> v, const ViabilityBounds& b, const HomeostatConfig& cfg) {
    const double m = viability_margin(v, b);
    const double span = cfg.tau_max - cfg.tau_min;
    return cfg.mode == RegulationMode::Conservative ? cfg.tau_min + span * m
                                                    : cfg.tau_min + span * (1.0 - m);
}

inline double temperature(const ViabilityVector& v, const ViabilityBounds& b, const HomeostatConfig& cfg) {
    return temperature(v.values(), b, cfg);
}

/// Max-shifted Boltzmann probabilities exp(q/tau) / Z.
inline std::vector<double> softmax_probabilities(std::span<const double> q, double tau) {
    if (q.empty()) throw UsageError("softmax: empty value vector");
    if (!(tau > 0.0)) throw UsageError("softmax: tau must be positive");
    const double qmax = *std::max_element(q.begin(), q.end());
    std::vector<double> p(q.size());
    double z = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
        p[a] = std::exp((q[a] - qmax) / tau);
        z += p[a];
    }
    for (double& x : p) x /= z;
    return p;
}

struct PolicySample {
    int action = 0;
    std::vector<double> probs;
};

inline PolicySample softmax_policy(std::span<const double> q, double tau, RngStream& rng) {
    PolicySample s;
    s.probs = softmax_probabilities(q, tau);
    s.action = rng.categorical(s.probs);
    return s;
}

} // namespace intero
