#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>
#include "toml.hpp"

#include "intero/allostat.hpp"
#include "intero/arbiter.hpp"
#include "intero/core_state.hpp"
#include "intero/enact.hpp"
#include "intero/envs.hpp"
#include "intero/envs/costly_maze.hpp"
#include "intero/envs/drift_bandit.hpp"
#include "intero/envs/viability_grid.hpp"
#include "intero/errors.hpp"
#include "intero/homeostat.hpp"
#include "intero/learner.hpp"
#include "intero/metrics.hpp"
#include "intero/world_model.hpp"

namespace intero {

/// Which regulatory modules are coupled into the agent. Written as e.g. "HAE", "H-E", "---".
struct AblationMask {
    bool h = true;
    bool a = true;
    bool e = true;

    std::string name() const { return std::string{h ? 'H' : '-', a ? 'A' : '-', e ? 'E' : '-'}; }

    static AblationMask parse(std::string_view s) {
        if (s.size() != 3 || (s[0] != 'H' && s[0] != '-') || (s[1] != 'A' && s[1] != '-') ||
            (s[2] != 'E' && s[2] != '-')) {
            throw ConfigError("ablation mask must look like \"HAE\" with '-' for disabled modules, got \"" +
                              std::string(s) + "\"");
        }
        return {s[0] == 'H', s[1] == 'A', s[2] == 'E'};
    }

    /// All 2^3 masks, full architecture first.
    static std::vector<AblationMask> all() {
        std::vector<AblationMask> out;
        for (int bits = 7; bits >= 0; --bits) out.push_back({(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0});
        return out;
    }

    bool full() const { return h && a && e; }
    friend bool operator==(const AblationMask&, const AblationMask&) = default;
};

enum class Baseline { None, Random };

struct InternalConfig {
    std::vector<std::string> names;
    std::vector<double> initial;
    NoiseSpec noise;
};

using EnvParams = std::variant<ViabilityGridConfig, DriftBanditConfig, CostlyMazeConfig>;

struct EnvConfig {
    std::string kind = "viability_grid";
    std::uint64_t seed = 0;
    EnvParams params = ViabilityGridConfig{};
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<std::uint64_t> seeds{1};
    int episodes = 20;
    AblationMask mask;
    Baseline baseline = Baseline::None;
    std::string output_dir = "out";
    std::vector<std::string> ablation_include; // further config files swept by `ablate`

    EnvConfig env;
    InternalConfig internal;
    ViabilityBounds bounds;
    HomeostatConfig homeostat;
    AllostatConfig allostat;
    EnactConfig enact;
    ArbiterConfig arbiter;
    LearnerConfig learner;
    WorldModelConfig world_model;
    MetricsConfig metrics;

    void validate() const {
        if (seeds.empty()) throw ConfigError("experiment.seeds must be nonempty");
        if (episodes < 1) throw ConfigError("experiment.episodes must be >= 1");
        const std::size_t n = internal.names.size();
        if (n == 0) throw ConfigError("internal.names must be nonempty");
        if (internal.initial.size() != n || internal.noise.sigma.size() != n) {
            throw ConfigError("internal.initial and internal.noise_sigma must match internal.names");
        }
        for (double x : internal.initial) {
            if (!std::isfinite(x)) throw ConfigError("internal.initial must be finite");
        }
        internal.noise.validate();
        bounds.validate();
        bounds.check_dims(n);
        homeostat.validate();
        allostat.validate();
        enact.validate();
        arbiter.validate();
        learner.validate();
        world_model.validate();
        metrics.validate();
        std::visit([](const auto& p) { p.validate(); }, env.params);
    }

    int episode_len() const {
        return std::visit([](const auto& p) { return p.episode_len; }, env.params);
    }

    PerturbationSchedule perturbations() const {
        if (const auto* g = std::get_if<ViabilityGridConfig>(&env.params)) return g->perturbations;
        if (const auto* m = std::get_if<CostlyMazeConfig>(&env.params)) return m->perturbations;
        return {};
    }
};

/// Defaults for an environment kind: internal dimensions, bounds and kind parameters.
inline ExperimentConfig default_config(std::string_view kind) {
    ExperimentConfig c;
    c.name = std::string(kind);
    c.env.kind = std::string(kind);
    c.internal.initial = {1.0, 0.0};
    c.internal.noise.sigma = {0.005, 0.005};
    c.bounds.hard_lo = {0.0, -1.0};
    c.bounds.hard_hi = {2.0, 1.0};
    c.bounds.soft_lo = {0.4, -1.0};
    c.bounds.soft_hi = {1.6, 0.4};
    c.bounds.weight_lo = {0.2, 0.2};
    c.bounds.weight_hi = {0.2, 0.2};
    c.bounds.rho = {1.0, 1.0};
    if (kind == "viability_grid") {
        c.internal.names = {"energy", "thermal"};
        c.env.params = ViabilityGridConfig{};
        c.metrics.goal_threshold = 1.0;
    } else if (kind == "drift_bandit") {
        c.internal.names = {"energy", "strain"};
        c.bounds.soft_lo = {0.1, -0.5};
        c.bounds.soft_hi = {1.9, 0.5};
        c.env.params = DriftBanditConfig{};
        c.metrics.goal_threshold = 1.0;
    } else if (kind == "costly_maze") {
        c.internal.names = {"energy", "strain"};
        c.bounds.soft_lo = {0.4, -0.5};
        c.bounds.soft_hi = {1.6, 0.5};
        c.env.params = CostlyMazeConfig{};
        c.metrics.goal_threshold = 5.0;
    } else {
        throw ConfigError("env.kind must be one of viability_grid, drift_bandit, costly_maze; got \"" +
                          std::string(kind) + "\"");
    }
    return c;
}

namespace detail {

class TomlReader {
public:
    explicit TomlReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const toml::source_region& where, const std::string& msg) const {
        std::ostringstream os;
        os << source_ << ':' << where.begin.line << ':' << where.begin.column << ": " << msg;
        throw ConfigError(os.str());
    }

    [[noreturn]] void fail(const toml::node& node, const std::string& msg) const { fail(node.source(), msg); }

    void check_keys(const toml::table& t, const std::string& path, std::initializer_list<std::string_view> allowed) const {
        const std::set<std::string_view> ok(allowed);
        for (const auto& [key, node] : t) {
            if (!ok.count(key.str())) fail(node, "unknown key \"" + (path.empty() ? "" : path + ".") + std::string(key.str()) + "\"");
        }
    }

    const toml::table* table(const toml::table& t, std::string_view key) const {
        const auto* node = t.get(key);
        if (!node) return nullptr;
        if (!node->is_table()) fail(*node, "\"" + std::string(key) + "\" must be a table");
        return node->as_table();
    }

    void get(const toml::table& t, std::string_view key, double& out) const {
        if (const auto* n = t.get(key)) {
            if (auto v = n->value<double>()) out = *v;
            else fail(*n, "\"" + std::string(key) + "\" must be a number");
        }
    }

    void get(const toml::table& t, std::string_view key, int& out) const {
        if (const auto* n = t.get(key)) {
            if (!n->is_integer()) fail(*n, "\"" + std::string(key) + "\" must be an integer");
            out = static_cast<int>(n->as_integer()->get());
        }
    }

    void get(const toml::table& t, std::string_view key, long long& out) const {
        if (const auto* n = t.get(key)) {
            if (!n->is_integer()) fail(*n, "\"" + std::string(key) + "\" must be an integer");
            out = n->as_integer()->get();
        }
    }

    void get(const toml::table& t, std::string_view key, std::uint64_t& out) const {
        long long v = static_cast<long long>(out);
        get(t, key, v);
        if (v < 0) fail(*t.get(key), "\"" + std::string(key) + "\" must be >= 0");
        out = static_cast<std::uint64_t>(v);
    }

    void get(const toml::table& t, std::string_view key, bool& out) const {
        if (const auto* n = t.get(key)) {
            if (!n->is_boolean()) fail(*n, "\"" + std::string(key) + "\" must be a boolean");
            out = n->as_boolean()->get();
        }
    }

    void get(const toml::table& t, std::string_view key, std::string& out) const {
        if (const auto* n = t.get(key)) {
            if (!n->is_string()) fail(*n, "\"" + std::string(key) + "\" must be a string");
            out = n->as_string()->get();
        }
    }

    const toml::array* array(const toml::table& t, std::string_view key) const {
        const auto* n = t.get(key);
        if (!n) return nullptr;
        if (!n->is_array()) fail(*n, "\"" + std::string(key) + "\" must be an array");
        return n->as_array();
    }

    void get(const toml::table& t, std::string_view key, std::vector<double>& out) const {
        if (const auto* a = array(t, key)) out = numbers(*a, key);
    }

    void get(const toml::table& t, std::string_view key, std::vector<std::string>& out) const {
        if (const auto* a = array(t, key)) {
            out.clear();
            for (const auto& e : *a) {
                if (!e.is_string()) fail(e, "\"" + std::string(key) + "\" must contain strings");
                out.push_back(e.as_string()->get());
            }
        }
    }

    void get(const toml::table& t, std::string_view key, std::vector<std::uint64_t>& out) const {
        if (const auto* a = array(t, key)) {
            out.clear();
            for (const auto& e : *a) {
                if (!e.is_integer() || e.as_integer()->get() < 0) fail(e, "\"" + std::string(key) + "\" must contain nonnegative integers");
                out.push_back(static_cast<std::uint64_t>(e.as_integer()->get()));
            }
        }
    }

    void get(const toml::table& t, std::string_view key, std::vector<std::vector<double>>& out) const {
        if (const auto* a = array(t, key)) {
            out.clear();
            for (const auto& row : *a) {
                if (!row.is_array()) fail(row, "\"" + std::string(key) + "\" must be an array of arrays");
                out.push_back(numbers(*row.as_array(), key));
            }
        }
    }

    void get(const toml::table& t, std::string_view key, std::vector<Cell>& out) const {
        if (const auto* a = array(t, key)) {
            out.clear();
            for (const auto& row : *a) {
                const auto* r = row.as_array();
                if (!r || r->size() != 2 || !(*r)[0].is_integer() || !(*r)[1].is_integer()) {
                    fail(row, "\"" + std::string(key) + "\" entries must be [x, y] integer pairs");
                }
                out.emplace_back(static_cast<int>((*r)[0].as_integer()->get()), static_cast<int>((*r)[1].as_integer()->get()));
            }
        }
    }

    void get(const toml::table& t, std::string_view key, Cell& out) const {
        if (const auto* r = array(t, key)) {
            if (r->size() != 2 || !(*r)[0].is_integer() || !(*r)[1].is_integer()) {
                fail(*r, "\"" + std::string(key) + "\" must be an [x, y] integer pair");
            }
            out = {static_cast<int>((*r)[0].as_integer()->get()), static_cast<int>((*r)[1].as_integer()->get())};
        }
    }

    PerturbationSchedule perturbations(const toml::table& env) const {
        PerturbationSchedule s;
        const auto* a = array(env, "perturbations");
        if (!a) return s;
        for (const auto& node : *a) {
            const auto* t = node.as_table();
            if (!t) fail(node, "env.perturbations entries must be tables");
            check_keys(*t, "env.perturbations", {"step", "kind", "magnitude", "duration"});
            PerturbationEvent e;
            std::string kind = "energy_drain_spike";
            get(*t, "step", e.step);
            get(*t, "kind", kind);
            get(*t, "magnitude", e.magnitude);
            get(*t, "duration", e.duration);
            try {
                e.kind = parse_perturbation_kind(kind);
            } catch (const ConfigError& err) {
                fail(node, err.what());
            }
            s.events.push_back(e);
        }
        try {
            s.validate();
        } catch (const ConfigError& err) {
            fail(*a, err.what());
        }
        return s;
    }

    DriftSchedule drift(const toml::table& env) const {
        DriftSchedule s;
        const auto* a = array(env, "drift");
        if (!a) return s;
        for (const auto& node : *a) {
            const auto* t = node.as_table();
            if (!t) fail(node, "env.drift entries must be tables");
            check_keys(*t, "env.drift", {"step", "kind", "duration", "block"});
            ChangePoint cp;
            std::string kind = "abrupt";
            get(*t, "step", cp.step);
            get(*t, "kind", kind);
            get(*t, "duration", cp.duration);
            get(*t, "block", cp.block);
            try {
                cp.kind = parse_drift_kind(kind);
            } catch (const ConfigError& err) {
                fail(node, err.what());
            }
            s.change_points.push_back(std::move(cp));
        }
        try {
            s.validate();
        } catch (const ConfigError& err) {
            fail(*a, err.what());
        }
        return s;
    }

private:
    std::vector<double> numbers(const toml::array& a, std::string_view key) const {
        std::vector<double> out;
        for (const auto& e : a) {
            if (auto v = e.value<double>()) out.push_back(*v);
            else fail(e, "\"" + std::string(key) + "\" must contain numbers");
        }
        return out;
    }

    std::string source_;
};

} // namespace detail

/// Parses an experiment file. Errors carry "<source>:<line>:<column>: <message>".
inline ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>") {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& err) {
        std::ostringstream os;
        os << source << ':' << err.source().begin.line << ':' << err.source().begin.column << ": " << err.description();
        throw ConfigError(os.str());
    }
    detail::TomlReader r(source);
    r.check_keys(root, "", {"experiment", "env", "internal", "bounds", "homeostat", "allostat", "enact", "arbiter",
                            "learner", "world_model", "metrics"});

    std::string kind = "viability_grid";
    const toml::table* env = r.table(root, "env");
    if (env) r.get(*env, "kind", kind);
    ExperimentConfig c;
    try {
        c = default_config(kind);
    } catch (const ConfigError& err) {
        r.fail(env && env->get("kind") ? env->get("kind")->source() : root.source(), err.what());
    }

    if (const auto* t = r.table(root, "experiment")) {
        r.check_keys(*t, "experiment", {"name", "seeds", "episodes", "mask", "baseline", "output_dir", "include"});
        r.get(*t, "name", c.name);
        r.get(*t, "seeds", c.seeds);
        r.get(*t, "episodes", c.episodes);
        std::string mask = c.mask.name(), baseline = "none";
        r.get(*t, "mask", mask);
        r.get(*t, "baseline", baseline);
        r.get(*t, "output_dir", c.output_dir);
        r.get(*t, "include", c.ablation_include);
        try {
            c.mask = AblationMask::parse(mask);
        } catch (const ConfigError& err) {
            r.fail(*t->get("mask"), err.what());
        }
        if (baseline == "random") c.baseline = Baseline::Random;
        else if (baseline != "none") r.fail(*t->get("baseline"), "experiment.baseline must be \"none\" or \"random\"");
    }

    if (env) {
        r.get(*env, "seed", c.env.seed);
        if (auto* g = std::get_if<ViabilityGridConfig>(&c.env.params)) {
            r.check_keys(*env, "env", {"kind", "seed", "episode_len", "width", "height", "start", "food", "hazards",
                                       "goals", "walls", "shortcuts", "energy_cost", "eat_gain", "satiety", "hazard_heat",
                                       "cool_rate", "shortcut_cost", "goal_reward", "shift_window", "perturbations",
                                       "drift"});
            r.get(*env, "episode_len", g->episode_len);
            r.get(*env, "width", g->width);
            r.get(*env, "height", g->height);
            r.get(*env, "start", g->start);
            r.get(*env, "food", g->food);
            r.get(*env, "hazards", g->hazards);
            r.get(*env, "goals", g->goals);
            r.get(*env, "walls", g->walls);
            r.get(*env, "shortcuts", g->shortcuts);
            r.get(*env, "energy_cost", g->energy_cost);
            r.get(*env, "eat_gain", g->eat_gain);
            r.get(*env, "satiety", g->satiety);
            r.get(*env, "hazard_heat", g->hazard_heat);
            r.get(*env, "cool_rate", g->cool_rate);
            r.get(*env, "shortcut_cost", g->shortcut_cost);
            r.get(*env, "goal_reward", g->goal_reward);
            r.get(*env, "shift_window", g->shift_window);
            g->perturbations = r.perturbations(*env);
            g->drift = r.drift(*env);
        } else if (auto* b = std::get_if<DriftBanditConfig>(&c.env.params)) {
            r.check_keys(*env, "env", {"kind", "seed", "episode_len", "arms", "payouts", "arm_probs", "peak",
                                       "pull_cost", "shift_window", "drift"});
            r.get(*env, "episode_len", b->episode_len);
            r.get(*env, "arms", b->arms);
            r.get(*env, "payouts", b->payouts);
            r.get(*env, "arm_probs", b->arm_probs);
            r.get(*env, "peak", b->peak);
            r.get(*env, "pull_cost", b->pull_cost);
            r.get(*env, "shift_window", b->shift_window);
            b->drift = r.drift(*env);
        } else if (auto* m = std::get_if<CostlyMazeConfig>(&c.env.params)) {
            r.check_keys(*env, "env", {"kind", "seed", "episode_len", "map", "move_cost", "probe_cost", "charge_gain", "satiety",
                                       "goal_reward", "strain_noise", "strain_revert", "strain_relax",
                                       "perturbations"});
            r.get(*env, "episode_len", m->episode_len);
            r.get(*env, "map", m->map);
            r.get(*env, "move_cost", m->move_cost);
            r.get(*env, "probe_cost", m->probe_cost);
            r.get(*env, "charge_gain", m->charge_gain);
            r.get(*env, "satiety", m->satiety);
            r.get(*env, "goal_reward", m->goal_reward);
            r.get(*env, "strain_noise", m->strain_noise);
            r.get(*env, "strain_revert", m->strain_revert);
            r.get(*env, "strain_relax", m->strain_relax);
            m->perturbations = r.perturbations(*env);
        }
        try {
            std::visit([](const auto& p) { p.validate(); }, c.env.params);
        } catch (const ConfigError& err) {
            r.fail(env->source(), err.what());
        }
    }

    if (const auto* t = r.table(root, "internal")) {
        r.check_keys(*t, "internal", {"names", "initial", "noise_sigma"});
        r.get(*t, "names", c.internal.names);
        r.get(*t, "initial", c.internal.initial);
        r.get(*t, "noise_sigma", c.internal.noise.sigma);
    }
    if (const auto* t = r.table(root, "bounds")) {
        r.check_keys(*t, "bounds", {"soft_lo", "soft_hi", "hard_lo", "hard_hi", "weight_lo", "weight_hi", "rho"});
        r.get(*t, "soft_lo", c.bounds.soft_lo);
        r.get(*t, "soft_hi", c.bounds.soft_hi);
        r.get(*t, "hard_lo", c.bounds.hard_lo);
        r.get(*t, "hard_hi", c.bounds.hard_hi);
        r.get(*t, "weight_lo", c.bounds.weight_lo);
        r.get(*t, "weight_hi", c.bounds.weight_hi);
        r.get(*t, "rho", c.bounds.rho);
        try {
            c.bounds.validate();
        } catch (const ConfigError& err) {
            r.fail(t->source(), err.what());
        }
    }
    if (const auto* t = r.table(root, "homeostat")) {
        r.check_keys(*t, "homeostat", {"lambda_h", "tau_min", "tau_max", "mode"});
        r.get(*t, "lambda_h", c.homeostat.lambda_h);
        r.get(*t, "tau_min", c.homeostat.tau_min);
        r.get(*t, "tau_max", c.homeostat.tau_max);
        std::string mode(to_string(c.homeostat.mode));
        r.get(*t, "mode", mode);
        try {
            c.homeostat.mode = parse_regulation_mode(mode);
            c.homeostat.validate();
        } catch (const ConfigError& err) {
            r.fail(t->source(), err.what());
        }
    }
    if (const auto* t = r.table(root, "allostat")) {
        r.check_keys(*t, "allostat", {"horizon", "gamma", "n_rollouts", "weights", "abstain_threshold", "risk_coeff"});
        r.get(*t, "horizon", c.allostat.horizon);
        r.get(*t, "gamma", c.allostat.gamma_allo);
        r.get(*t, "n_rollouts", c.allostat.n_rollouts);
        std::vector<double> w(c.allostat.feature_weights.begin(), c.allostat.feature_weights.end());
        r.get(*t, "weights", w);
        if (w.size() != kFeatureCount) r.fail(*t->get("weights"), "allostat.weights must have exactly 4 entries");
        std::copy(w.begin(), w.end(), c.allostat.feature_weights.begin());
        r.get(*t, "abstain_threshold", c.allostat.abstain_threshold);
        r.get(*t, "risk_coeff", c.allostat.risk_coeff);
        try {
            c.allostat.validate();
        } catch (const ConfigError& err) {
            r.fail(t->source(), err.what());
        }
    }
    if (const auto* t = r.table(root, "enact")) {
        r.check_keys(*t, "enact", {"lambda_e", "cost_floor"});
        r.get(*t, "lambda_e", c.enact.lambda_e);
        r.get(*t, "cost_floor", c.enact.cost_floor);
        try {
            c.enact.validate();
        } catch (const ConfigError& err) {
            r.fail(t->source(), err.what());
        }
    }
    if (const auto* t = r.table(root, "arbiter")) {
        r.check_keys(*t, "arbiter", {"urgency_gain"});
        r.get(*t, "urgency_gain", c.arbiter.urgency_gain);
        try {
            c.arbiter.validate();
        } catch (const ConfigError& err) {
            r.fail(t->source(), err.what());
        }
    }
    if (const auto* t = r.table(root, "learner")) {
        r.check_keys(*t, "learner", {"alpha", "gamma_task", "v_bins"});
        r.get(*t, "alpha", c.learner.alpha);
        r.get(*t, "gamma_task", c.learner.gamma_task);
        r.get(*t, "v_bins", c.learner.v_bins);
        try {
            c.learner.validate();
        } catch (const ConfigError& err) {
            r.fail(t->source(), err.what());
        }
    }
    if (const auto* t = r.table(root, "world_model")) {
        r.check_keys(*t, "world_model", {"prior", "pe_decay", "drift_bins", "drift_range", "v_bins"});
        r.get(*t, "prior", c.world_model.prior);
        r.get(*t, "pe_decay", c.world_model.pe_decay);
        r.get(*t, "drift_bins", c.world_model.drift_bins);
        r.get(*t, "drift_range", c.world_model.drift_range);
        r.get(*t, "v_bins", c.world_model.v_bins);
        try {
            c.world_model.validate();
        } catch (const ConfigError& err) {
            r.fail(t->source(), err.what());
        }
    }
    if (const auto* t = r.table(root, "metrics")) {
        r.check_keys(*t, "metrics", {"n_bins", "recovery_window", "safety_penalty", "goal_threshold"});
        r.get(*t, "n_bins", c.metrics.n_bins);
        r.get(*t, "recovery_window", c.metrics.recovery_window);
        r.get(*t, "safety_penalty", c.metrics.safety_penalty);
        r.get(*t, "goal_threshold", c.metrics.goal_threshold);
    }

    if (auto* b = std::get_if<DriftBanditConfig>(&c.env.params)) b->internal_dims = c.internal.names.size();
    try {
        c.validate();
    } catch (const ConfigError& err) {
        r.fail(root.source(), err.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = parse_config(ss.str(), path.string());
    // Included configs are resolved relative to the including file.
    for (auto& inc : cfg.ablation_include) {
        const std::filesystem::path p(inc);
        if (p.is_relative()) inc = (path.parent_path() / p).lexically_normal().string();
    }
    return cfg;
}

/// Canonical, fully-resolved echo of a configuration (fixed key order).
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c, std::uint64_t seed) {
    using oj = nlohmann::ordered_json;
    oj j;
    j["experiment"] = {{"name", c.name}, {"seed", seed}, {"episodes", c.episodes}, {"mask", c.mask.name()},
                       {"baseline", c.baseline == Baseline::Random ? "random" : "none"}};
    oj env{{"kind", c.env.kind}, {"seed", c.env.seed}};
    auto perturb_json = [](const PerturbationSchedule& s) {
        oj a = oj::array();
        for (const auto& e : s.events) {
            a.push_back({{"step", e.step}, {"kind", to_string(e.kind)}, {"magnitude", e.magnitude}, {"duration", e.duration}});
        }
        return a;
    };
    auto drift_json = [](const DriftSchedule& s) {
        oj a = oj::array();
        for (const auto& cp : s.change_points) {
            a.push_back({{"step", cp.step}, {"kind", to_string(cp.kind)}, {"duration", cp.duration}, {"block", cp.block}});
        }
        return a;
    };
    auto cells = [](const std::vector<Cell>& v) {
        oj a = oj::array();
        for (const auto& [x, y] : v) a.push_back({x, y});
        return a;
    };
    if (const auto* g = std::get_if<ViabilityGridConfig>(&c.env.params)) {
        env["episode_len"] = g->episode_len;
        env["width"] = g->width;
        env["height"] = g->height;
        env["start"] = {g->start.first, g->start.second};
        env["food"] = cells(g->food);
        env["hazards"] = cells(g->hazards);
        env["goals"] = cells(g->goals);
        env["walls"] = cells(g->walls);
        env["shortcuts"] = cells(g->shortcuts);
        env["energy_cost"] = g->energy_cost;
        env["eat_gain"] = g->eat_gain;
        env["satiety"] = g->satiety;
        env["hazard_heat"] = g->hazard_heat;
        env["cool_rate"] = g->cool_rate;
        env["shortcut_cost"] = g->shortcut_cost;
        env["goal_reward"] = g->goal_reward;
        env["shift_window"] = g->shift_window;
        env["perturbations"] = perturb_json(g->perturbations);
        env["drift"] = drift_json(g->drift);
    } else if (const auto* b = std::get_if<DriftBanditConfig>(&c.env.params)) {
        env["episode_len"] = b->episode_len;
        env["arms"] = b->arms;
        env["payouts"] = b->payouts;
        env["arm_probs"] = b->arm_probs;
        env["peak"] = b->peak;
        env["pull_cost"] = b->pull_cost;
        env["shift_window"] = b->shift_window;
        env["drift"] = drift_json(b->drift);
    } else if (const auto* m = std::get_if<CostlyMazeConfig>(&c.env.params)) {
        env["episode_len"] = m->episode_len;
        env["map"] = m->map;
        env["move_cost"] = m->move_cost;
        env["probe_cost"] = m->probe_cost;
        env["charge_gain"] = m->charge_gain;
        env["satiety"] = m->satiety;
        env["goal_reward"] = m->goal_reward;
        env["strain_noise"] = m->strain_noise;
        env["strain_revert"] = m->strain_revert;
        env["strain_relax"] = m->strain_relax;
        env["perturbations"] = perturb_json(m->perturbations);
    }
    j["env"] = env;
    j["internal"] = {{"names", c.internal.names}, {"initial", c.internal.initial}, {"noise_sigma", c.internal.noise.sigma}};
    j["bounds"] = {{"soft_lo", c.bounds.soft_lo},     {"soft_hi", c.bounds.soft_hi},     {"hard_lo", c.bounds.hard_lo},
                   {"hard_hi", c.bounds.hard_hi},     {"weight_lo", c.bounds.weight_lo}, {"weight_hi", c.bounds.weight_hi},
                   {"rho", c.bounds.rho}};
    j["homeostat"] = {{"lambda_h", c.homeostat.lambda_h}, {"tau_min", c.homeostat.tau_min},
                      {"tau_max", c.homeostat.tau_max}, {"mode", to_string(c.homeostat.mode)}};
    j["allostat"] = {{"horizon", c.allostat.horizon},
                     {"gamma", c.allostat.gamma_allo},
                     {"n_rollouts", c.allostat.n_rollouts},
                     {"weights", c.allostat.feature_weights},
                     {"abstain_threshold", c.allostat.abstain_threshold},
                     {"risk_coeff", c.allostat.risk_coeff}};
    j["enact"] = {{"lambda_e", c.enact.lambda_e}, {"cost_floor", c.enact.cost_floor}};
    j["arbiter"] = {{"urgency_gain", c.arbiter.urgency_gain}};
    j["learner"] = {{"alpha", c.learner.alpha}, {"gamma_task", c.learner.gamma_task}, {"v_bins", c.learner.v_bins}};
    j["world_model"] = {{"prior", c.world_model.prior},           {"pe_decay", c.world_model.pe_decay},
                        {"drift_bins", c.world_model.drift_bins}, {"drift_range", c.world_model.drift_range},
                        {"v_bins", c.world_model.v_bins}};
    j["metrics"] = {{"n_bins", c.metrics.n_bins}, {"recovery_window", c.metrics.recovery_window},
                    {"safety_penalty", c.metrics.safety_penalty}, {"goal_threshold", c.metrics.goal_threshold}};
    return j;
}

} // namespace intero
