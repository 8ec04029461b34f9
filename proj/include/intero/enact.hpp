#pragma once

#include <algorithm>
#include <span>

#include "intero/allostat.hpp"
#include "intero/core_state.hpp"
#include "intero/errors.hpp"
#include "intero/homeostat.hpp"
#include "intero/world_model.hpp"

namespace intero {

struct EnactConfig {
    double lambda_e = 1.0;
    double cost_floor = 0.01;

    void validate() const {
        if (!(lambda_e >= 0.0)) throw ConfigError("enact.lambda_e must be >= 0");
        if (!(cost_floor > 0.0)) throw ConfigError("enact.cost_floor must be > 0");
    }
};

struct IntrinsicValue {
    double ig_ext = 0.0;
    double ig_int = 0.0;
    double value = 0.0; // ig_ext + lambda_e * ig_int
};

/// One-step expected information gain about external and internal dynamics.
inline IntrinsicValue intrinsic_value(const AugmentedState& st, int a, const DirichletModel& model,
                                      const EnactConfig& cfg) {
    IntrinsicValue iv;
    iv.ig_ext = model.expected_info_gain(st, a);
    iv.ig_int = model.internal_info_gain(st, a);
    iv.value = iv.ig_ext + cfg.lambda_e * iv.ig_int;
    return iv;
}

/// lambda_h * c_H of the internal state advanced by the model's mean drift under `a`.
inline double predicted_internal_cost(std::span<const double> v, const AugmentedState& st, int a,
                                      const DirichletModel& model, const ViabilityBounds& b, double lambda_h) {
    const auto v_next = advance_mean(v, model.drift_mean(st, a), b);
    return lambda_h * homeostatic_cost(v_next, b);
}

/// Information gain per unit predicted internal cost.
inline double exploration_score(double intrinsic, double predicted_cost, const EnactConfig& cfg) {
    if (!(predicted_cost >= 0.0)) throw UsageError("exploration_score: predicted_cost must be >= 0");
    return intrinsic / std::max(predicted_cost, cfg.cost_floor);
}

inline double exploration_score(const AugmentedState& st, int a, const DirichletModel& model,
                                const EnactConfig& cfg, double predicted_cost) {
    return exploration_score(intrinsic_value(st, a, model, cfg).value, predicted_cost, cfg);
}

} // namespace intero
