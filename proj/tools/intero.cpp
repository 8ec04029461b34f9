#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "intero/intero.hpp"
#include "intero/log.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;

std::vector<intero::ExperimentConfig> load_with_includes(const std::string& path) {
    std::vector<intero::ExperimentConfig> configs{intero::load_config(path)};
    for (const auto& inc : configs.front().ablation_include) configs.push_back(intero::load_config(inc));
    for (std::size_t i = 0; i < configs.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (configs[i].name == configs[j].name) {
                throw intero::ConfigError("ablate: duplicate experiment name \"" + configs[i].name + "\"");
            }
        }
    }
    return configs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interoceptive agent experiments"};
    app.require_subcommand(1);

    std::string config, out, runs, baseline, mask;
    std::uint64_t seed = 0;
    int seeds = 2, jobs = 1;
    bool dump_model = false, dump_q = false;

    auto* run = app.add_subcommand("run", "Run one experiment and write config.json, records.csv, metrics.json");
    run->add_option("--config", config, "TOML experiment file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Run seed")->required();
    run->add_option("--out", out, "Output directory")->required();
    run->add_option("--baseline", baseline, "Policy baseline")->check(CLI::IsMember({"none", "random"}));
    run->add_option("--mask", mask, "Ablation mask override, e.g. HAE, H-E, ---");
    run->add_flag("--dump-model", dump_model, "Also write model.json");
    run->add_flag("--dump-q", dump_q, "Also write q.json");

    auto* ablate = app.add_subcommand("ablate", "All 8 module masks x seeds x configured environments");
    ablate->add_option("--config", config, "TOML experiment file")->required()->check(CLI::ExistingFile);
    ablate->add_option("--seeds", seeds, "Number of seeds (>= 2)")->required()->check(CLI::Range(2, 100000));
    ablate->add_option("--jobs", jobs, "Parallel runs")->check(CLI::Range(1, 1024));
    ablate->add_option("--out", out, "Output directory")->required();

    auto* report = app.add_subcommand("report", "Write report.md and plots for a runs directory");
    report->add_option("--runs", runs, "Runs directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        intero::init_logging();
        if (*run) {
            auto cfg = intero::load_config(config);
            if (!baseline.empty()) cfg.baseline = baseline == "random" ? intero::Baseline::Random : intero::Baseline::None;
            if (!mask.empty()) cfg.mask = intero::AblationMask::parse(mask);
            intero::run_to_dir(cfg, seed, out, {dump_model, dump_q});
        } else if (*ablate) {
            const auto summary = intero::ablate(load_with_includes(config), seeds, jobs, out);
            int failed = 0;
            for (const auto& row : summary.rows) failed += row.failed;
            if (failed > 0) spdlog::error("{} run(s) failed; see error.txt in their directories", failed);
            spdlog::info("wrote {}", (std::filesystem::path(out) / "summary.csv").string());
        } else if (*report) {
            if (!std::filesystem::is_directory(runs)) throw intero::ConfigError("report: no such directory " + runs);
            const auto path = intero::write_report(runs);
            spdlog::info("wrote {}", path.string());
        }
    } catch (const intero::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigExit;
    } catch (const intero::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
