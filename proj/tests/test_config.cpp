#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace intero;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "x.toml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Config, ShippedConfigsLoad) {
    for (const char* f : {"viability_grid.toml", "drift_bandit.toml", "costly_maze.toml", "combined.toml"}) {
        const auto c = load_config(test::config_path(f));
        EXPECT_NO_THROW(c.validate()) << f;
        EXPECT_TRUE(c.mask.full()) << f;
    }
    const auto combined = load_config(test::config_path("combined.toml"));
    ASSERT_EQ(combined.ablation_include.size(), 3u);
    for (const auto& inc : combined.ablation_include) EXPECT_TRUE(std::filesystem::exists(inc)) << inc;
}

TEST(Config, DefaultsAndOverrides) {
    const auto c = parse_config(R"(
[experiment]
name = "t"
episodes = 3
mask = "H-E"
[env]
kind = "costly_maze"
[enact]
lambda_e = 4.0
[homeostat]
mode = "active_search"
)");
    EXPECT_EQ(c.name, "t");
    EXPECT_EQ(c.episodes, 3);
    EXPECT_EQ(c.mask.name(), "H-E");
    EXPECT_EQ(c.enact.lambda_e, 4.0);
    EXPECT_EQ(c.homeostat.mode, RegulationMode::ActiveSearch);
    EXPECT_TRUE(std::holds_alternative<CostlyMazeConfig>(c.env.params));
    EXPECT_EQ(c.internal.names, (std::vector<std::string>{"energy", "strain"}));
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_of("[experiment]\nepisodes = \"ten\"\n").rfind("x.toml:2:", 0), 0u) << error_of("[experiment]\nepisodes = \"ten\"\n");
    EXPECT_NE(error_of("[experiment]\n\n\nbogus = 1\n").find("x.toml:4:"), std::string::npos);
    EXPECT_NE(error_of("[experiment]\n\n\nbogus = 1\n").find("unknown key \"experiment.bogus\""), std::string::npos);
    EXPECT_NE(error_of("[env]\nkind = \"viability_grid\"\nstart = [1]\n").find("x.toml:3:"), std::string::npos);
    EXPECT_NE(error_of("[experiment]\nmask = \"HXE\"\n").find("x.toml:2:"), std::string::npos);
    EXPECT_NE(error_of("[env]\nkind = \"swamp\"\n").find("x.toml:2:"), std::string::npos);
    EXPECT_NE(error_of("a = [\n").find("x.toml:"), std::string::npos); // syntax error
    EXPECT_NE(error_of("[bounds]\nsoft_lo = [0.5, -1.0]\nsoft_hi = [0.4, 0.4]\n").find("soft_lo"), std::string::npos);
}

TEST(Config, SingleCellParses) {
    const auto c = parse_config("[env]\nkind = \"viability_grid\"\nstart = [2, 4]\n");
    EXPECT_EQ(std::get<ViabilityGridConfig>(c.env.params).start, (Cell{2, 4}));
    EXPECT_FALSE(error_of("[env]\nstart = [2, 4, 1]\n").empty());
    EXPECT_FALSE(error_of("[env]\nstart = [2.5, 4]\n").empty());
}

TEST(Config, MaskParsing) {
    EXPECT_EQ(AblationMask::parse("---").name(), "---");
    EXPECT_THROW(AblationMask::parse("HA"), ConfigError);
    EXPECT_THROW(AblationMask::parse("hae"), ConfigError);
    const auto all = AblationMask::all();
    ASSERT_EQ(all.size(), 8u);
    EXPECT_TRUE(all.front().full());
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_NE(all[i].name(), all[j].name());
    }
}

TEST(Config, JsonEchoIsStable) {
    const auto c = load_config(test::config_path("combined.toml"));
    const auto j = config_to_json(c, 9);
    EXPECT_EQ(j["experiment"]["seed"], 9);
    EXPECT_EQ(j["env"]["shortcuts"].size(), 1u);
    EXPECT_EQ(j["env"]["drift"].size(), 2u);
    EXPECT_EQ(j.dump(), config_to_json(c, 9).dump());
}

TEST(Config, FuzzedTextEitherParsesOrThrowsConfigError) {
    const std::string base = test::slurp(test::config_path("combined.toml"));
    std::mt19937_64 gen(99);
    const std::string alphabet = "[]=\"#,.-0123456789abcxyz \n";
    int parsed = 0;
    for (int i = 0; i < 1500; ++i) {
        std::string text = base;
        const int edits = 1 + static_cast<int>(gen() % 4);
        for (int k = 0; k < edits; ++k) {
            const std::size_t pos = gen() % text.size();
            switch (gen() % 3) {
            case 0: text[pos] = alphabet[gen() % alphabet.size()]; break;
            case 1: text.erase(pos, 1 + gen() % 8); break;
            default: text.insert(pos, 1, alphabet[gen() % alphabet.size()]); break;
            }
        }
        try {
            parse_config(text, "fuzz.toml");
            ++parsed;
        } catch (const ConfigError&) {
        }
    }
    EXPECT_GT(parsed, 0);
}
