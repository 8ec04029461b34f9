#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intero/errors.hpp"

namespace intero {

enum class PerturbationKind { EnergyDrainSpike, SensorNoiseBurst, ResourceLockout };

inline PerturbationKind parse_perturbation_kind(std::string_view s) {
    if (s == "energy_drain_spike") return PerturbationKind::EnergyDrainSpike;
    if (s == "sensor_noise_burst") return PerturbationKind::SensorNoiseBurst;
    if (s == "resource_lockout") return PerturbationKind::ResourceLockout;
    throw ConfigError("unknown perturbation kind \"" + std::string(s) + "\"");
}

inline std::string_view to_string(PerturbationKind k) {
    switch (k) {
    case PerturbationKind::EnergyDrainSpike: return "energy_drain_spike";
    case PerturbationKind::SensorNoiseBurst: return "sensor_noise_burst";
    case PerturbationKind::ResourceLockout: return "resource_lockout";
    }
    return "?";
}

struct PerturbationEvent {
    int step = 0; // within-episode step at which the event starts
    PerturbationKind kind = PerturbationKind::EnergyDrainSpike;
    double magnitude = 0.0;
    int duration = 1;
};

/// Perturbations replayed at the same within-episode steps in every episode.
struct PerturbationSchedule {
    std::vector<PerturbationEvent> events;

    void validate() const {
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (events[i].step < 0) throw ConfigError("perturbation step must be >= 0");
            if (events[i].duration < 1) throw ConfigError("perturbation duration must be >= 1");
            if (i > 0 && events[i].step <= events[i - 1].step) {
                throw ConfigError("perturbation steps must be strictly increasing");
            }
        }
    }

    /// Sum of magnitudes of events of `kind` active at within-episode step t.
    double active(PerturbationKind kind, int t) const {
        double total = 0.0;
        for (const auto& e : events) {
            if (e.kind == kind && t >= e.step && t < e.step + e.duration) total += e.magnitude;
        }
        return total;
    }

    bool any_active(int t) const {
        for (const auto& e : events) {
            if (t >= e.step && t < e.step + e.duration) return true;
        }
        return false;
    }
};

enum class DriftKind { Abrupt, Gradual };

inline DriftKind parse_drift_kind(std::string_view s) {
    if (s == "abrupt") return DriftKind::Abrupt;
    if (s == "gradual") return DriftKind::Gradual;
    throw ConfigError("unknown drift kind \"" + std::string(s) + "\"");
}

inline std::string_view to_string(DriftKind k) { return k == DriftKind::Abrupt ? "abrupt" : "gradual"; }

/// A change in environment parameters at a global step (counted across episodes).
/// `block` is kind-specific: food cells for the grid, arm distributions for the bandit.
/// An empty block asks the environment to re-randomize from its own stream.
struct ChangePoint {
    long long step = 0;
    DriftKind kind = DriftKind::Abrupt;
    int duration = 1; // transition length for gradual changes
    std::vector<std::vector<double>> block;
};

struct DriftSchedule {
    std::vector<ChangePoint> change_points;

    void validate() const {
        for (std::size_t i = 0; i < change_points.size(); ++i) {
            if (change_points[i].step < 0) throw ConfigError("drift step must be >= 0");
            if (change_points[i].duration < 1) throw ConfigError("drift duration must be >= 1");
            if (i > 0 && change_points[i].step <= change_points[i - 1].step) {
                throw ConfigError("drift change points must be strictly increasing");
            }
        }
    }
};

struct EventFlags {
    bool perturbed = false;    // a perturbation is active this step
    bool change_point = false; // a drift change point fires this step
    bool shift_window = false; // inside [change point, change point + W)
};

struct StepResult {
    int next_state = 0;
    double r_task = 0.0;
    std::vector<double> drift;  // deterministic internal drift f(v, a, s) - v
    double action_cost = 0.0;   // nominal energy cost of the action taken
    EventFlags flags;
};

/// Shared environment contract. Steps are deterministic given the construction seed and
/// the action history. State and action ids are dense from 0.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string_view kind() const = 0;
    virtual int state_count() const = 0;
    virtual int action_count() const = 0;
    virtual std::size_t internal_dims() const = 0;
    virtual int episode_len() const = 0;

    /// Starts the next episode and returns the initial external state.
    virtual int reset() = 0;

    /// Advances one step. `v` is the agent's current internal state (the drift may depend on it).
    virtual StepResult step(int action, std::span<const double> v) = 0;

    /// Actions that move the agent toward restoring its internal state. Never empty.
    virtual std::vector<int> recovery_actions(int state) const = 0;

    virtual std::optional<int> defer_action() const { return std::nullopt; }

    /// Additional internal-noise std-dev currently injected by a perturbation.
    virtual double extra_noise() const { return 0.0; }

    /// Coarse region label of a state (room index for mazes, 0 elsewhere).
    virtual int region(int /*state*/) const { return 0; }

    virtual std::string action_name(int a) const { return "a" + std::to_string(a); }

    /// Throws unless every state exposes at least one in-range recovery action.
    void check_recovery_coverage() const {
        for (int s = 0; s < state_count(); ++s) {
            const auto rec = recovery_actions(s);
            if (rec.empty()) throw ConfigError(std::string(kind()) + ": state " + std::to_string(s) + " has no recovery action");
            for (int a : rec) {
                if (a < 0 || a >= action_count()) throw ConfigError(std::string(kind()) + ": recovery action out of range");
            }
        }
    }
};

} // namespace intero
