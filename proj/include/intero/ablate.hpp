#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "intero/config.hpp"
#include "intero/harness.hpp"
#include "intero/metrics.hpp"
#include "intero/record.hpp"

namespace intero {

struct AblationJob {
    ExperimentConfig cfg; // mask already applied
    std::uint64_t seed = 0;
    std::filesystem::path dir;
};

struct AblationRun {
    std::filesystem::path dir;
    std::string env;  // experiment name
    std::string mask;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::map<std::string, double> metrics;
};

/// Seeds used by `ablate --seeds n`: n consecutive seeds from the config's first seed.
inline std::vector<std::uint64_t> ablation_seeds(const ExperimentConfig& cfg, int n) {
    if (n < 2) throw ConfigError("ablate needs at least 2 seeds");
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < n; ++i) seeds.push_back(cfg.seeds.front() + static_cast<std::uint64_t>(i));
    return seeds;
}

inline std::filesystem::path run_dir(const std::filesystem::path& root, const std::string& env, const AblationMask& m,
                                     std::uint64_t seed) {
    return root / env / m.name() / ("seed_" + std::to_string(seed));
}

/// All 8 masks x seeds x configs, in a fixed order.
inline std::vector<AblationJob> ablation_jobs(const std::vector<ExperimentConfig>& configs,
                                              const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out) {
    std::vector<AblationJob> jobs;
    for (const auto& base : configs) {
        for (const auto& m : AblationMask::all()) {
            for (auto seed : seeds) {
                AblationJob j{base, seed, run_dir(out, base.name, m, seed)};
                j.cfg.mask = m;
                jobs.push_back(std::move(j));
            }
        }
    }
    return jobs;
}

/// Executes jobs on up to `n_jobs` threads. Runs are shared-nothing; failures are captured per run.
inline std::vector<AblationRun> execute_jobs(const std::vector<AblationJob>& jobs, int n_jobs) {
    std::vector<AblationRun> runs(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const auto& job = jobs[i];
            auto& r = runs[i];
            r.dir = job.dir;
            r.env = job.cfg.name;
            r.mask = job.cfg.mask.name();
            r.seed = job.seed;
            try {
                const auto out = run_to_dir(job.cfg, job.seed, job.dir);
                for (const auto& [k, v] : out.metrics) r.metrics[k] = quantize(v); // as persisted
                r.ok = true;
            } catch (const std::exception& e) {
                r.error = e.what();
                spdlog::error("{} {} seed {} failed: {}", r.env, r.mask, r.seed, r.error);
                std::error_code ec;
                std::filesystem::create_directories(job.dir, ec);
                std::ofstream(job.dir / "error.txt") << r.error << '\n';
            }
        }
    };
    const int n = std::max(1, std::min<int>(n_jobs, static_cast<int>(jobs.size())));
    std::vector<std::thread> threads;
    for (int t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    return runs;
}

struct SummaryCell {
    std::optional<double> mean;
    std::optional<double> std; // sample (n-1) standard deviation; 0 for one value
};

struct SummaryRow {
    std::string env;
    std::string mask;
    int ok = 0;
    int failed = 0;
    std::map<std::string, SummaryCell> cells;
};

struct DominanceRow {
    std::string env;
    std::string reduced_mask;
    double full_mean = 0.0;
    double reduced_mean = 0.0;
    double win_fraction = 0.0; // seed-paired fraction with full > reduced
    int pairs = 0;
    bool dominates = false;    // full_mean > reduced_mean
};

struct AblationSummary {
    std::vector<std::string> metric_names; // sorted union over successful runs
    std::vector<SummaryRow> rows;
    std::vector<DominanceRow> dominance;
};

inline SummaryCell summarize(const std::vector<double>& xs) {
    SummaryCell c;
    if (xs.empty()) return c;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    c.mean = mean;
    c.std = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    return c;
}

/// Seed-paired comparison of the full mask against each reduced mask on `metric`.
inline std::vector<DominanceRow> dominance_table(const std::vector<AblationRun>& runs,
                                                 const std::string& metric = "safety_adjusted_return") {
    std::vector<std::string> envs;
    for (const auto& r : runs) {
        if (std::find(envs.begin(), envs.end(), r.env) == envs.end()) envs.push_back(r.env);
    }
    std::vector<DominanceRow> out;
    for (const auto& env : envs) {
        std::map<std::uint64_t, double> full;
        for (const auto& r : runs) {
            if (r.env == env && r.mask == "HAE" && r.ok && r.metrics.count(metric)) full[r.seed] = r.metrics.at(metric);
        }
        for (const auto& m : AblationMask::all()) {
            if (m.full()) continue;
            DominanceRow row;
            row.env = env;
            row.reduced_mask = m.name();
            std::vector<double> fv, rv;
            int wins = 0;
            for (const auto& r : runs) {
                if (r.env != env || r.mask != row.reduced_mask || !r.ok || !r.metrics.count(metric)) continue;
                const auto it = full.find(r.seed);
                if (it == full.end()) continue;
                fv.push_back(it->second);
                rv.push_back(r.metrics.at(metric));
                wins += it->second > r.metrics.at(metric);
            }
            row.pairs = static_cast<int>(fv.size());
            if (row.pairs > 0) {
                row.full_mean = *summarize(fv).mean;
                row.reduced_mean = *summarize(rv).mean;
                row.win_fraction = static_cast<double>(wins) / row.pairs;
                row.dominates = row.full_mean > row.reduced_mean;
            }
            out.push_back(row);
        }
    }
    return out;
}

inline AblationSummary summarize_runs(const std::vector<AblationRun>& runs) {
    AblationSummary s;
    // Columns: every metric name any successful run produced, sorted.
    for (const auto& r : runs) {
        if (!r.ok) continue;
        for (const auto& [k, v] : r.metrics) {
            if (std::find(s.metric_names.begin(), s.metric_names.end(), k) == s.metric_names.end()) s.metric_names.push_back(k);
        }
    }
    std::sort(s.metric_names.begin(), s.metric_names.end());
    for (const auto& r : runs) {
        auto it = std::find_if(s.rows.begin(), s.rows.end(),
                               [&](const SummaryRow& row) { return row.env == r.env && row.mask == r.mask; });
        if (it == s.rows.end()) {
            s.rows.push_back({r.env, r.mask, 0, 0, {}});
            it = s.rows.end() - 1;
        }
        (r.ok ? it->ok : it->failed) += 1;
    }
    for (auto& row : s.rows) {
        for (const auto& name : s.metric_names) {
            std::vector<double> xs;
            for (const auto& r : runs) {
                if (r.env == row.env && r.mask == row.mask && r.ok && r.metrics.count(name)) xs.push_back(r.metrics.at(name));
            }
            row.cells[name] = summarize(xs);
        }
    }
    s.dominance = dominance_table(runs);
    return s;
}

/// summary.csv: one row per (env, mask); NA marks cells with no successful value.
inline void write_summary_csv(std::ostream& out, const AblationSummary& s) {
    out << "env,mask,runs_ok,runs_failed";
    for (const auto& n : s.metric_names) out << ',' << n << "_mean," << n << "_std";
    out << '\n';
    for (const auto& row : s.rows) {
        out << row.env << ',' << row.mask << ',' << row.ok << ',' << row.failed;
        for (const auto& n : s.metric_names) {
            const auto& c = row.cells.at(n);
            out << ',' << (c.mean ? format_number(*c.mean) : "NA") << ',' << (c.std ? format_number(*c.std) : "NA");
        }
        out << '\n';
    }
}

inline void write_dominance_csv(std::ostream& out, const std::vector<DominanceRow>& rows) {
    out << "env,full_mask,reduced_mask,metric,full_mean,reduced_mean,mean_diff,win_fraction,pairs,dominates\n";
    for (const auto& r : rows) {
        out << r.env << ",HAE," << r.reduced_mask << ",safety_adjusted_return,";
        if (r.pairs > 0) {
            out << format_number(r.full_mean) << ',' << format_number(r.reduced_mean) << ','
                << format_number(r.full_mean - r.reduced_mean) << ',' << format_number(r.win_fraction);
        } else {
            out << "NA,NA,NA,NA";
        }
        out << ',' << r.pairs << ',' << (r.pairs > 0 && r.dominates ? 1 : 0) << '\n';
    }
}

/// Loads every run under `root` (directories holding metrics.json next to config.json).
inline std::vector<AblationRun> collect_runs(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> dirs;
    if (std::filesystem::exists(root / "config.json")) dirs.push_back(root);
    if (std::filesystem::is_directory(root)) {
        for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
            if (e.is_directory() && std::filesystem::exists(e.path() / "config.json")) dirs.push_back(e.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<AblationRun> runs;
    for (const auto& d : dirs) {
        std::ifstream in(d / "config.json");
        const auto cfg = nlohmann::json::parse(in);
        AblationRun r;
        r.dir = d;
        r.env = cfg["experiment"]["name"].get<std::string>();
        r.mask = cfg["experiment"]["mask"].get<std::string>();
        r.seed = cfg["experiment"]["seed"].get<std::uint64_t>();
        if (std::filesystem::exists(d / "metrics.json")) {
            r.metrics = read_metrics_json((d / "metrics.json").string());
            r.ok = true;
        } else {
            r.error = "missing metrics.json";
        }
        runs.push_back(std::move(r));
    }
    return runs;
}

/// Full ablation: runs, then summary.csv and dominance.csv in `out`.
inline AblationSummary ablate(const std::vector<ExperimentConfig>& configs, int n_seeds, int n_jobs,
                              const std::filesystem::path& out) {
    if (configs.empty()) throw ConfigError("ablate: no configurations");
    const auto seeds = ablation_seeds(configs.front(), n_seeds);
    const auto jobs = ablation_jobs(configs, seeds, out);
    spdlog::info("ablate: {} runs on {} worker(s)", jobs.size(), n_jobs);
    const auto runs = execute_jobs(jobs, n_jobs);
    auto summary = summarize_runs(runs);
    std::filesystem::create_directories(out);
    {
        std::ofstream f(out / "summary.csv", std::ios::binary);
        write_summary_csv(f, summary);
    }
    {
        std::ofstream f(out / "dominance.csv", std::ios::binary);
        write_dominance_csv(f, summary.dominance);
    }
    return summary;
}

} // namespace intero
