#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "intero/intero.hpp"

namespace intero::test {

/// Two dimensions: [0, 2] hard / [0.4, 1.6] soft, and [-1, 1] hard / [-1, 0.4] soft.
inline ViabilityBounds two_dim_bounds() {
    ViabilityBounds b;
    b.hard_lo = {0.0, -1.0};
    b.hard_hi = {2.0, 1.0};
    b.soft_lo = {0.4, -1.0};
    b.soft_hi = {1.6, 0.4};
    b.weight_lo = {0.2, 0.2};
    b.weight_hi = {0.2, 0.2};
    b.rho = {1.0, 1.0};
    return b;
}

inline std::filesystem::path source_dir() { return INTERO_SOURCE_DIR; }
inline std::filesystem::path config_path(const std::string& name) { return source_dir() / "configs" / name; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh scratch directory unique to the running test.
inline std::filesystem::path scratch(const std::string& tag) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    auto dir = std::filesystem::temp_directory_path() / "intero_tests" /
               (std::string(info->test_suite_name()) + "." + info->name() + "." + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Shipped config shrunk to `episodes` episodes of `len` steps.
inline ExperimentConfig small_config(const std::string& file, int episodes, int len) {
    auto c = load_config(config_path(file));
    c.episodes = episodes;
    std::visit([&](auto& p) { p.episode_len = len; }, c.env.params);
    return c;
}

} // namespace intero::test
