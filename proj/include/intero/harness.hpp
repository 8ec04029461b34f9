#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "intero/allostat.hpp"
#include "intero/arbiter.hpp"
#include "intero/config.hpp"
#include "intero/core_state.hpp"
#include "intero/enact.hpp"
#include "intero/envs/costly_maze.hpp"
#include "intero/envs/drift_bandit.hpp"
#include "intero/envs/viability_grid.hpp"
#include "intero/errors.hpp"
#include "intero/homeostat.hpp"
#include "intero/learner.hpp"
#include "intero/metrics.hpp"
#include "intero/record.hpp"
#include "intero/rng.hpp"
#include "intero/world_model.hpp"

namespace intero {

/// Environment stream seed: the run seed mixed with env.seed.
inline std::uint64_t env_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    return detail::splitmix64(cfg.env.seed) ^ seed;
}

inline std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg, std::uint64_t seed) {
    RngStream rng(env_seed(cfg, seed), "env");
    return std::visit(
        [&](const auto& p) -> std::unique_ptr<Environment> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ViabilityGridConfig>) return std::make_unique<ViabilityGrid>(p, rng);
            else if constexpr (std::is_same_v<T, DriftBanditConfig>) return std::make_unique<DriftBandit>(p, rng);
            else return std::make_unique<CostlyMaze>(p, rng);
        },
        cfg.env.params);
}

inline MetricsContext metrics_context(const ExperimentConfig& cfg, int state_count) {
    MetricsContext ctx;
    ctx.bounds = cfg.bounds;
    ctx.perturbations = cfg.perturbations();
    ctx.state_count = state_count;
    ctx.lambda_h = cfg.homeostat.lambda_h; // nominal, so ig_per_cost is comparable across masks
    ctx.cost_floor = cfg.enact.cost_floor;
    ctx.cfg = cfg.metrics;
    return ctx;
}

struct RunOutput {
    std::vector<std::string> dim_names;
    std::vector<RunRecord> records;
    MetricMap metrics;
    std::unique_ptr<DirichletModel> model;
    std::unique_ptr<QTable> q;
    double max_abs_shaped_reward = 0.0;
};

namespace detail {

inline int argmax(std::span<const double> x) {
    return static_cast<int>(std::max_element(x.begin(), x.end()) - x.begin());
}

} // namespace detail

/// One full run: every episode of the configured environment under cfg.mask, seeded by `seed`.
///
/// Each step: build augmented states -> g from rollouts (A) -> allostatic and enactive channels ->
/// arbitration weights -> action selection (shield, abstention) -> env step and internal dynamics
/// -> model and TD updates -> one RunRecord.
inline RunOutput simulate(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const AblationMask mask = cfg.mask;
    const ViabilityBounds& b = cfg.bounds;
    const std::size_t dims = cfg.internal.names.size();

    HomeostatConfig hcfg = cfg.homeostat;
    LearnerConfig lcfg = cfg.learner;
    if (!mask.h) {
        hcfg.lambda_h = 0.0;
        lcfg.v_bins = 1;
    }
    const AllostatConfig& acfg = cfg.allostat;
    const EnactConfig& ecfg = cfg.enact;

    auto env = make_environment(cfg, seed);
    if (env->internal_dims() != dims) {
        throw ConfigError("internal.names has " + std::to_string(dims) + " dims but " + std::string(env->kind()) +
                          " drives " + std::to_string(env->internal_dims()));
    }
    const int n_actions = env->action_count();
    const auto defer = env->defer_action();

    RunOutput out;
    out.dim_names = cfg.internal.names;
    out.model = std::make_unique<DirichletModel>(env->state_count(), n_actions, dims, cfg.world_model);
    out.q = std::make_unique<QTable>(env->state_count(), n_actions, dims, lcfg);
    DirichletModel& model = *out.model;
    QTable& q = *out.q;

    RngStream rng_noise(seed, "noise");
    RngStream rng_allo(seed, "allostat");
    RngStream rng_arb(seed, "arbiter");
    RngStream rng_base(seed, "baseline");

    auto tau_of = [&](std::span<const double> v) { return mask.h ? temperature(v, b, hcfg) : hcfg.tau_mid(); };
    const std::vector<bool> all_actions(static_cast<std::size_t>(n_actions), true);
    // Rollout policy: the unmodulated softmax over normalized task values.
    auto rollout_policy = [&](int s_hat, std::span<const double> v_hat) {
        const auto row = q.row(augment(s_hat, v_hat, b, lcfg.v_bins));
        return softmax_probabilities(normalize_channel(row, all_actions), tau_of(v_hat));
    };

    const int len = env->episode_len();
    out.records.reserve(static_cast<std::size_t>(cfg.episodes) * static_cast<std::size_t>(len));
    long long step = 0;
    std::vector<double> r_a(static_cast<std::size_t>(n_actions)), r_e(r_a.size()), risk(r_a.size());
    std::vector<IntrinsicValue> iv(r_a.size());

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        int s = env->reset();
        ViabilityVector v(cfg.internal.initial, cfg.internal.names);
        for (int t = 0; t < len; ++t, ++step) {
            const auto vv = v.values();
            const AugmentedState x_l = augment(s, vv, b, lcfg.v_bins);
            const AugmentedState x_m = augment(s, vv, b, model.config().v_bins);
            const double tau_base = tau_of(vv);

            AllostaticSignal sig;
            if (mask.a) sig = estimate_g(s, vv, rollout_policy, model, b, acfg, rng_allo);
            const AllostatOutput mod = modulate(sig, acfg);

            double uncertainty = 0.0;
            for (int a = 0; a < n_actions; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                r_a[ua] = 0.0;
                risk[ua] = 0.0;
                if (mask.a) {
                    const double threat = one_step_threat(vv, x_m, a, model, b, acfg);
                    r_a[ua] = -threat;
                    risk[ua] = mod.risk_penalty(threat);
                }
                iv[ua] = intrinsic_value(x_m, a, model, ecfg);
                r_e[ua] = mask.e ? exploration_score(iv[ua].value,
                                                     predicted_internal_cost(vv, x_m, a, model, b, hcfg.lambda_h), ecfg)
                                 : 0.0;
                uncertainty += model.normalized_entropy(x_m, a);
            }
            uncertainty /= n_actions;

            // Ablated channels keep their arbitration mass but score every action alike.
            const ArbitrationWeights w = compute_weights(vv, b, sig.g, uncertainty, cfg.arbiter, mod.info_seek_bonus);
            SelectionRequest req;
            req.r_h = q.row(x_l);
            req.r_a = r_a;
            req.r_e = r_e;
            if (mask.a) req.risk_penalty = risk;
            req.weights = w;
            req.tau = std::max(tau_base * mod.tau_multiplier, hcfg.tau_min);
            req.tau_min = hcfg.tau_min;
            req.recovery_actions = env->recovery_actions(s);
            const Selection sel = select_action(req, rng_arb);

            int action = sel.action;
            bool abstained = false;
            if (cfg.baseline == Baseline::Random) {
                const auto& pool = w.shielded ? req.recovery_actions : std::vector<int>{};
                action = pool.empty() ? rng_base.uniform_int(n_actions)
                                      : pool[static_cast<std::size_t>(rng_base.uniform_int(static_cast<int>(pool.size())))];
            } else if (mod.abstain) {
                abstained = true;
                if (defer && !w.shielded) action = *defer;
            }

            RunRecord rec;
            rec.step = step;
            rec.episode = ep;
            rec.t = t;
            rec.state = s;
            rec.action = action;
            rec.v.assign(vv.begin(), vv.end());
            rec.c_h = homeostatic_cost(vv, b);
            rec.margin = viability_margin(vv, b);
            rec.g = sig.g;
            rec.w_h = w.w_h;
            rec.w_a = w.w_a;
            rec.w_e = w.w_e;
            rec.shielded = w.shielded;
            rec.abstained = abstained;
            rec.ig_ext = iv[static_cast<std::size_t>(action)].ig_ext;
            rec.ig_int = iv[static_cast<std::size_t>(action)].ig_int;
            rec.r_e = r_e[static_cast<std::size_t>(action)];
            rec.g_feat_boundary = sig.per_feature[kBoundary];
            rec.g_feat_entropy = sig.per_feature[kEntropy];
            rec.g_feat_pe = sig.per_feature[kPredictionError];
            rec.g_feat_violation = sig.per_feature[kViolation];
            rec.tau_effective = sel.tau_effective;
            rec.shield_fault = sel.shield_fault;
            rec.region = env->region(s);

            // Predictions made before the outcome is seen.
            const Prediction pred = model.predict(x_m, action);
            const int top = detail::argmax(pred.probs);
            rec.p_top = pred.probs[static_cast<std::size_t>(top)];
            std::vector<int> drift_top(dims);
            rec.int_conf.resize(dims);
            rec.int_hit.resize(dims);
            for (std::size_t d = 0; d < dims; ++d) {
                const auto alpha = model.drift_outcome_concentration(x_m, action, d);
                double total = 0.0;
                for (double x : alpha) total += x;
                drift_top[d] = detail::argmax(alpha);
                rec.int_conf[d] = alpha[static_cast<std::size_t>(drift_top[d])] / total;
            }

            NoiseSpec noise = cfg.internal.noise;
            if (const double extra = env->extra_noise(); extra > 0.0) {
                for (double& sd : noise.sigma) sd += extra;
            }
            const StepResult res = env->step(action, vv);
            ViabilityVector v_next = apply_internal_dynamics(v, res.drift, noise, b, rng_noise);
            std::vector<double> observed(dims);
            for (std::size_t d = 0; d < dims; ++d) observed[d] = v_next[d] - v[d];

            const double r_shaped = shaped_reward(res.r_task, v_next.values(), b, hcfg);
            rec.r_task = res.r_task;
            rec.r_shaped = r_shaped;
            rec.action_cost = res.action_cost;
            rec.ev_perturbed = res.flags.perturbed;
            rec.ev_change_point = res.flags.change_point;
            rec.ev_shift_window = res.flags.shift_window;
            rec.p_realized = pred.probs[static_cast<std::size_t>(res.next_state)];
            rec.top_hit = res.next_state == top;
            for (std::size_t d = 0; d < dims; ++d) rec.int_hit[d] = model.drift_bin(observed[d]) == drift_top[d];

            if (const auto bad = rec.first_non_finite(); !bad.empty()) throw NumericError(step, bad);
            rec.quantize_all();

            model.observe(x_m, action, res.next_state, observed);
            q.td_update(x_l, action, r_shaped, augment(res.next_state, v_next.values(), b, lcfg.v_bins));
            out.max_abs_shaped_reward = std::max(out.max_abs_shaped_reward, std::abs(r_shaped));

            out.records.push_back(std::move(rec));
            s = res.next_state;
            v = std::move(v_next);
        }
        spdlog::debug("episode {} done: step {}, |Q|max {:.4g}", ep, step, q.max_abs());
    }

    out.metrics = compute_metrics(out.records, out.dim_names, metrics_context(cfg, env->state_count()));
    return out;
}

struct WriteOptions {
    bool dump_model = false;
    bool dump_q = false;
};

/// Writes config.json, records.csv and metrics.json (plus optional model/Q dumps) into `dir`.
inline void write_run(const RunOutput& run, const ExperimentConfig& cfg, std::uint64_t seed,
                      const std::filesystem::path& dir, WriteOptions opt = {}) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("config.json");
        f << config_to_json(cfg, seed).dump(2) << '\n';
    }
    {
        auto f = open("records.csv");
        write_records_csv(f, run.records, run.dim_names);
    }
    {
        auto f = open("metrics.json");
        f << metrics_to_json(run.metrics);
    }
    if (opt.dump_model) {
        auto f = open("model.json");
        f << run.model->snapshot().dump(1) << '\n';
    }
    if (opt.dump_q) {
        auto f = open("q.json");
        f << run.q->to_json().dump(1) << '\n';
    }
}

/// simulate + write_run.
inline RunOutput run_to_dir(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir,
                            WriteOptions opt = {}) {
    spdlog::info("run {} mask {} seed {} -> {}", cfg.name, cfg.mask.name(), seed, dir.string());
    auto out = simulate(cfg, seed);
    write_run(out, cfg, seed, dir, opt);
    return out;
}

} // namespace intero
