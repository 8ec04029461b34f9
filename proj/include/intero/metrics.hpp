#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "intero/core_state.hpp"
#include "intero/envs.hpp"
#include "intero/errors.hpp"
#include "intero/record.hpp"

namespace intero {

struct MetricsConfig {
    int n_bins = 10;
    int recovery_window = 10;
    double safety_penalty = 1.0;
    double goal_threshold = 1.0;

    void validate() const {
        if (n_bins < 1) throw ConfigError("metrics.n_bins must be >= 1");
        if (recovery_window < 1) throw ConfigError("metrics.recovery_window must be >= 1");
        if (!(safety_penalty >= 0.0)) throw ConfigError("metrics.safety_penalty must be >= 0");
    }
};

inline bool record_violates(const RunRecord& r, const ViabilityBounds& b) { return outside_soft(r.v, b); }

struct ViolationStats {
    double rate = 0.0;
    double mean_severity = 0.0;
};

/// Fraction of steps with any component outside its soft range, and mean c_H over those steps.
inline ViolationStats violation_stats(std::span<const RunRecord> records, const ViabilityBounds& b) {
    if (records.empty()) throw UsageError("violation_stats: no records");
    std::size_t violating = 0;
    double severity = 0.0;
    for (const auto& r : records) {
        if (record_violates(r, b)) {
            ++violating;
            severity += r.c_h;
        }
    }
    ViolationStats s;
    s.rate = static_cast<double>(violating) / static_cast<double>(records.size());
    s.mean_severity = violating ? severity / static_cast<double>(violating) : 0.0;
    return s;
}

/// Records grouped by episode, in order.
inline std::vector<std::span<const RunRecord>> split_episodes(std::span<const RunRecord> records) {
    std::vector<std::span<const RunRecord>> out;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= records.size(); ++i) {
        if (i == records.size() || records[i].episode != records[begin].episode) {
            out.push_back(records.subspan(begin, i - begin));
            begin = i;
        }
    }
    return out;
}

/// Steps from each perturbation onset until the first step that starts `window` consecutive
/// in-bounds steps, per episode and event. If that never happens before the episode ends the
/// count runs to the episode end (censored).
inline std::vector<int> recovery_time(std::span<const RunRecord> records, const PerturbationSchedule& schedule,
                                      const ViabilityBounds& b, int window = 10) {
    std::vector<int> out;
    for (const auto episode : split_episodes(records)) {
        const int len = static_cast<int>(episode.size());
        for (const auto& ev : schedule.events) {
            if (ev.step >= len) continue;
            int run = 0;
            int recovered = -1;
            for (int t = ev.step; t < len; ++t) {
                if (record_violates(episode[static_cast<std::size_t>(t)], b)) {
                    run = 0;
                } else if (++run == window) {
                    recovered = t - window + 1;
                    break;
                }
            }
            out.push_back(recovered >= 0 ? recovered - ev.step : len - ev.step);
        }
    }
    return out;
}

/// Population (n-divisor) variance of each internal dimension.
inline std::vector<double> internal_variance(std::span<const RunRecord> records) {
    if (records.empty()) throw UsageError("internal_variance: no records");
    const std::size_t n = records.front().v.size();
    std::vector<double> mean(n, 0.0), m2(n, 0.0);
    long long count = 0;
    for (const auto& r : records) {
        ++count;
        for (std::size_t d = 0; d < n; ++d) {
            const double delta = r.v[d] - mean[d];
            mean[d] += delta / static_cast<double>(count);
            m2[d] += delta * (r.v[d] - mean[d]);
        }
    }
    for (auto& x : m2) x = std::max(0.0, x / static_cast<double>(count));
    return m2;
}

struct CalibrationBin {
    long long count = 0;
    double confidence = 0.0; // mean confidence in the bin
    double accuracy = 0.0;   // hit frequency in the bin
};

struct Calibration {
    double ece = 0.0;
    double mce = 0.0;
    std::vector<CalibrationBin> bins;
};

/// Equal-width confidence binning. Absent when there are no predictions.
inline std::optional<Calibration> calibration(std::span<const double> confidence, const std::vector<bool>& hit,
                                              int n_bins = 10) {
    if (confidence.size() != hit.size()) throw UsageError("calibration: length mismatch");
    if (confidence.empty()) return std::nullopt;
    Calibration c;
    c.bins.assign(static_cast<std::size_t>(n_bins), {});
    std::vector<double> conf_sum(static_cast<std::size_t>(n_bins), 0.0), hit_sum(static_cast<std::size_t>(n_bins), 0.0);
    for (std::size_t i = 0; i < confidence.size(); ++i) {
        const double p = std::clamp(confidence[i], 0.0, 1.0);
        const auto k = static_cast<std::size_t>(std::min(static_cast<int>(p * n_bins), n_bins - 1));
        ++c.bins[k].count;
        conf_sum[k] += p;
        hit_sum[k] += hit[i] ? 1.0 : 0.0;
    }
    const double total = static_cast<double>(confidence.size());
    for (std::size_t k = 0; k < c.bins.size(); ++k) {
        auto& bin = c.bins[k];
        if (bin.count == 0) continue;
        bin.confidence = conf_sum[k] / static_cast<double>(bin.count);
        bin.accuracy = hit_sum[k] / static_cast<double>(bin.count);
        const double gap = std::abs(bin.accuracy - bin.confidence);
        c.ece += static_cast<double>(bin.count) / total * gap;
        c.mce = std::max(c.mce, gap);
    }
    return c;
}

/// External-model calibration: confidence = top predictive probability, hit = top outcome occurred.
inline std::optional<Calibration> calibration(std::span<const RunRecord> records, int n_bins = 10) {
    std::vector<double> conf;
    std::vector<bool> hit;
    conf.reserve(records.size());
    for (const auto& r : records) {
        conf.push_back(r.p_top);
        hit.push_back(r.top_hit);
    }
    return calibration(conf, hit, n_bins);
}

/// Drift-outcome model calibration, pooled over internal dimensions.
inline std::optional<Calibration> drift_calibration(std::span<const RunRecord> records, int n_bins = 10) {
    std::vector<double> conf;
    std::vector<bool> hit;
    for (const auto& r : records) {
        for (std::size_t d = 0; d < r.int_conf.size(); ++d) {
            conf.push_back(r.int_conf[d]);
            hit.push_back(r.int_hit[d]);
        }
    }
    return calibration(conf, hit, n_bins);
}

struct AbstentionScores {
    std::optional<double> precision;         // absent when the agent never abstains
    std::optional<double> recall;            // absent when there are no shift windows
    std::optional<double> detection_latency; // mean steps from window start to first abstention
    long long windows = 0;
};

/// Abstentions scored against ground-truth shift windows (maximal runs of flagged steps).
inline AbstentionScores abstention_scores(std::span<const RunRecord> records) {
    AbstentionScores s;
    long long abstained = 0, inside = 0, detected = 0;
    double latency = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.abstained) {
            ++abstained;
            if (r.ev_shift_window) ++inside;
        }
        const bool starts = r.ev_shift_window && (i == 0 || !records[i - 1].ev_shift_window);
        if (!starts) continue;
        ++s.windows;
        for (std::size_t j = i; j < records.size() && records[j].ev_shift_window; ++j) {
            if (records[j].abstained) {
                ++detected;
                latency += static_cast<double>(j - i);
                break;
            }
        }
    }
    if (abstained > 0) s.precision = static_cast<double>(inside) / static_cast<double>(abstained);
    if (s.windows > 0) s.recall = static_cast<double>(detected) / static_cast<double>(s.windows);
    if (detected > 0) s.detection_latency = latency / static_cast<double>(detected);
    return s;
}

struct ExplorationStats {
    double coverage = 0.0;
    double ig_per_cost = 0.0;
    long long steps_to_goal = -1; // -1 when the goal was never reached
};

inline ExplorationStats exploration_stats(std::span<const RunRecord> records, int state_count, double lambda_h,
                                          double cost_floor, double goal_threshold) {
    if (records.empty()) throw UsageError("exploration_stats: no records");
    ExplorationStats s;
    std::set<int> visited;
    double ig = 0.0, cost = 0.0;
    for (const auto& r : records) {
        visited.insert(r.state);
        ig += r.ig_ext + r.ig_int;
        cost += std::max(r.c_h * lambda_h + r.action_cost, cost_floor);
        if (s.steps_to_goal < 0 && r.r_task >= goal_threshold) s.steps_to_goal = r.step;
    }
    s.coverage = static_cast<double>(visited.size()) / static_cast<double>(state_count);
    s.ig_per_cost = cost > 0.0 ? ig / cost : 0.0;
    return s;
}

/// Task return minus `penalty` per soft-bound-violating step.
inline double safety_adjusted_return(std::span<const RunRecord> records, const ViabilityBounds& b, double penalty) {
    if (!(penalty >= 0.0)) throw UsageError("safety_adjusted_return: penalty must be >= 0");
    double ret = 0.0;
    long long violations = 0;
    for (const auto& r : records) {
        ret += r.r_task;
        if (record_violates(r, b)) ++violations;
    }
    return ret - penalty * static_cast<double>(violations);
}

inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

/// Everything needed besides the log to evaluate a run.
struct MetricsContext {
    ViabilityBounds bounds;
    PerturbationSchedule perturbations;
    int state_count = 1;
    double lambda_h = 0.0;
    double cost_floor = 0.01;
    MetricsConfig cfg;
};

/// Ordered flat metric map; absent values are omitted.
using MetricMap = std::vector<std::pair<std::string, double>>;

inline MetricMap compute_metrics(std::span<const RunRecord> records, const std::vector<std::string>& dim_names,
                                 const MetricsContext& ctx) {
    if (records.empty()) throw UsageError("compute_metrics: no records");
    MetricMap m;
    auto put = [&](std::string name, std::optional<double> v) {
        if (v) m.emplace_back(std::move(name), *v);
    };

    const auto vs = violation_stats(records, ctx.bounds);
    put("violation_rate", vs.rate);
    put("violation_mean_severity", vs.mean_severity);

    const auto rec = recovery_time(records, ctx.perturbations, ctx.bounds, ctx.cfg.recovery_window);
    if (!rec.empty()) {
        double sum = 0.0;
        for (int x : rec) sum += x;
        put("recovery_time_mean", sum / static_cast<double>(rec.size()));
        put("recovery_time_max", *std::max_element(rec.begin(), rec.end()));
        put("recovery_events", static_cast<double>(rec.size()));
    }

    const auto var = internal_variance(records);
    for (std::size_t d = 0; d < var.size(); ++d) put("internal_variance_" + dim_names[d], var[d]);

    if (const auto cal = calibration(records, ctx.cfg.n_bins)) {
        put("ece", cal->ece);
        put("mce", cal->mce);
        for (std::size_t k = 0; k < cal->bins.size(); ++k) {
            const std::string p = "calib_bin_" + std::to_string(k) + "_";
            put(p + "count", static_cast<double>(cal->bins[k].count));
            put(p + "confidence", cal->bins[k].confidence);
            put(p + "accuracy", cal->bins[k].accuracy);
        }
    }
    // Stationary segment: everything before the first change point (only emitted when one occurs).
    const auto first_cp = std::find_if(records.begin(), records.end(), [](const RunRecord& r) { return r.ev_change_point; });
    if (first_cp != records.end() && first_cp != records.begin()) {
        const auto pre = records.subspan(0, static_cast<std::size_t>(first_cp - records.begin()));
        if (const auto cal = calibration(pre, ctx.cfg.n_bins)) put("pre_drift_ece", cal->ece);
    }
    if (const auto cal = drift_calibration(records, ctx.cfg.n_bins)) {
        put("drift_ece", cal->ece);
        put("drift_mce", cal->mce);
    }

    const auto ab = abstention_scores(records);
    put("abstention_precision", ab.precision);
    put("abstention_recall", ab.recall);
    put("detection_latency", ab.detection_latency);

    const auto ex = exploration_stats(records, ctx.state_count, ctx.lambda_h, ctx.cost_floor, ctx.cfg.goal_threshold);
    put("coverage", ex.coverage);
    put("ig_per_cost", ex.ig_per_cost);
    put("steps_to_goal", static_cast<double>(ex.steps_to_goal));

    double ret = 0.0;
    long long shielded = 0, abstained = 0, region_b = 0;
    std::vector<double> g, tau;
    for (const auto& r : records) {
        ret += r.r_task;
        shielded += r.shielded;
        abstained += r.abstained;
        region_b += r.region == 1;
        g.push_back(r.g);
        tau.push_back(r.tau_effective);
    }
    const double n = static_cast<double>(records.size());
    put("total_return", ret);
    put("safety_adjusted_return", safety_adjusted_return(records, ctx.bounds, ctx.cfg.safety_penalty));
    put("shield_rate", static_cast<double>(shielded) / n);
    put("abstention_rate", static_cast<double>(abstained) / n);
    put("region_b_fraction", static_cast<double>(region_b) / n);
    put("g_tau_correlation", pearson(g, tau));
    put("steps", n);
    return m;
}

inline std::string metrics_to_json(const MetricMap& m) {
    std::string out = "{\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += "  \"" + m[i].first + "\": " + format_number(m[i].second) + (i + 1 < m.size() ? ",\n" : "\n");
    }
    out += "}\n";
    return out;
}

inline std::map<std::string, double> read_metrics_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    const auto j = nlohmann::json::parse(in);
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) out[k] = v.get<double>();
    return out;
}

} // namespace intero
