#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "intero/envs.hpp"
#include "intero/errors.hpp"
#include "intero/rng.hpp"

namespace intero {

using Cell = std::pair<int, int>; // (x, y)

struct ViabilityGridConfig {
    int width = 7;
    int height = 7;
    int episode_len = 300;
    Cell start{3, 5};
    std::vector<Cell> food{{0, 6}, {6, 6}};
    std::vector<Cell> hazards{{2, 3}, {3, 3}, {4, 3}};
    std::vector<Cell> goals{{3, 0}};
    std::vector<Cell> walls;
    std::vector<Cell> shortcuts; // passable at extra energy cost
    double energy_cost = 0.01;
    double eat_gain = 0.3;
    double satiety = 1.5;        // eating adds nothing once energy has reached this level
    double hazard_heat = 0.1;
    double cool_rate = 0.05;
    double shortcut_cost = 0.08;
    double goal_reward = 1.0;
    int shift_window = 50;
    PerturbationSchedule perturbations;
    DriftSchedule drift; // blocks are food cell lists [[x, y], ...]

    void validate() const {
        if (width < 3 || height < 3) throw ConfigError("viability_grid: grid must be at least 3x3");
        if (episode_len < 1) throw ConfigError("env.episode_len must be >= 1");
        if (shift_window < 1) throw ConfigError("env.shift_window must be >= 1");
        if (food.empty()) throw ConfigError("viability_grid: at least one food cell required");
        if (hazards.empty()) throw ConfigError("viability_grid: at least one hazard cell required");
        auto inside = [&](const Cell& c) { return c.first >= 0 && c.first < width && c.second >= 0 && c.second < height; };
        for (const auto* list : {&food, &hazards, &goals, &walls, &shortcuts}) {
            for (const auto& c : *list) {
                if (!inside(c)) throw ConfigError("viability_grid: cell outside grid");
            }
        }
        if (!inside(start)) throw ConfigError("viability_grid: start outside grid");
        if (std::find(walls.begin(), walls.end(), start) != walls.end()) throw ConfigError("viability_grid: start on a wall");
        if (std::find(goals.begin(), goals.end(), start) != goals.end()) throw ConfigError("viability_grid: start on a goal");
        perturbations.validate();
        drift.validate();
        for (const auto& cp : drift.change_points) {
            for (const auto& c : cp.block) {
                if (c.size() != 2 || !inside({static_cast<int>(c[0]), static_cast<int>(c[1])})) {
                    throw ConfigError("viability_grid: drift block must list in-grid [x, y] food cells");
                }
            }
        }
    }
};

/// Foraging gridworld with internal state (energy, thermal).
/// Actions: up, down, left, right, stay, eat.
class ViabilityGrid final : public Environment {
public:
    enum Action : int { kUp = 0, kDown, kLeft, kRight, kStay, kEat, kActionCount };

    ViabilityGrid(ViabilityGridConfig cfg, RngStream rng) : cfg_(std::move(cfg)), rng_(std::move(rng)) {
        cfg_.validate();
        const std::size_t n = static_cast<std::size_t>(cfg_.width * cfg_.height);
        wall_.assign(n, false);
        hazard_.assign(n, false);
        goal_.assign(n, false);
        shortcut_.assign(n, false);
        for (const auto& c : cfg_.walls) wall_[id(c)] = true;
        for (const auto& c : cfg_.hazards) hazard_[id(c)] = true;
        for (const auto& c : cfg_.goals) goal_[id(c)] = true;
        for (const auto& c : cfg_.shortcuts) shortcut_[id(c)] = true;
        set_food(cfg_.food);
        check_recovery_coverage();
    }

    std::string_view kind() const override { return "viability_grid"; }
    int state_count() const override { return cfg_.width * cfg_.height; }
    int action_count() const override { return kActionCount; }
    std::size_t internal_dims() const override { return 2; }
    int episode_len() const override { return cfg_.episode_len; }
    double extra_noise() const override { return cfg_.perturbations.active(PerturbationKind::SensorNoiseBurst, t_); }

    std::string action_name(int a) const override {
        static constexpr std::array<const char*, kActionCount> names{"up", "down", "left", "right", "stay", "eat"};
        return names.at(static_cast<std::size_t>(a));
    }

    int reset() override {
        pos_ = static_cast<int>(id(cfg_.start));
        t_ = 0;
        return pos_;
    }

    StepResult step(int action, std::span<const double> v) override {
        if (action < 0 || action >= kActionCount) throw UsageError("viability_grid: action out of range");
        if (v.size() != 2) throw UsageError("viability_grid: expects (energy, thermal)");
        StepResult r;
        apply_drift_schedule(r.flags);
        r.flags.perturbed = cfg_.perturbations.any_active(t_);

        int next = move(pos_, action);
        double energy = -cfg_.energy_cost;
        r.action_cost = cfg_.energy_cost;
        if (shortcut_[static_cast<std::size_t>(next)] && next != pos_) {
            energy -= cfg_.shortcut_cost;
            r.action_cost += cfg_.shortcut_cost;
        }
        const bool locked = cfg_.perturbations.active(PerturbationKind::ResourceLockout, t_) > 0.0;
        if (action == kEat && food_[static_cast<std::size_t>(pos_)] && !locked && v[0] < cfg_.satiety) {
            energy += cfg_.eat_gain;
        }
        energy -= cfg_.perturbations.active(PerturbationKind::EnergyDrainSpike, t_);

        const double thermal = hazard_[static_cast<std::size_t>(next)] ? cfg_.hazard_heat
                                                                       : -std::min(cfg_.cool_rate, std::max(v[1], 0.0));
        r.drift = {energy, thermal};
        if (goal_[static_cast<std::size_t>(next)]) {
            // Each visit pays once; the agent restarts from the start cell.
            r.r_task = cfg_.goal_reward;
            next = static_cast<int>(id(cfg_.start));
        }
        pos_ = next;
        r.next_state = pos_;
        ++t_;
        ++global_t_;
        return r;
    }

    std::vector<int> recovery_actions(int state) const override {
        std::vector<int> out;
        const int here = food_dist_[static_cast<std::size_t>(state)];
        for (int a = kUp; a <= kRight; ++a) {
            const int next = move(state, a);
            if (next == state) continue;
            const bool closer = food_dist_[static_cast<std::size_t>(next)] < here;
            const bool cools = hazard_[static_cast<std::size_t>(state)] && !hazard_[static_cast<std::size_t>(next)];
            if (closer || cools) out.push_back(a);
        }
        // Eating only restores energy on a food cell.
        if (food_[static_cast<std::size_t>(state)]) out.push_back(kEat);
        if (out.empty()) out.push_back(kStay); // unreachable food: nothing better than waiting
        return out;
    }

    bool is_food(int state) const { return food_[static_cast<std::size_t>(state)]; }
    bool is_hazard(int state) const { return hazard_[static_cast<std::size_t>(state)]; }
    bool is_goal(int state) const { return goal_[static_cast<std::size_t>(state)]; }
    int position() const { return pos_; }
    int state_of(Cell c) const { return static_cast<int>(id(c)); }
    const ViabilityGridConfig& config() const { return cfg_; }

private:
    std::size_t id(const Cell& c) const { return static_cast<std::size_t>(c.second * cfg_.width + c.first); }

    int move(int state, int action) const {
        int x = state % cfg_.width, y = state / cfg_.width;
        switch (action) {
        case kUp: --y; break;
        case kDown: ++y; break;
        case kLeft: --x; break;
        case kRight: ++x; break;
        default: return state;
        }
        if (x < 0 || y < 0 || x >= cfg_.width || y >= cfg_.height) return state;
        const int next = y * cfg_.width + x;
        return wall_[static_cast<std::size_t>(next)] ? state : next;
    }

    void set_food(const std::vector<Cell>& cells) {
        food_.assign(static_cast<std::size_t>(state_count()), false);
        for (const auto& c : cells) food_[id(c)] = true;
        // BFS distance to the nearest food cell over passable cells.
        constexpr int kFar = std::numeric_limits<int>::max() / 2;
        food_dist_.assign(static_cast<std::size_t>(state_count()), kFar);
        std::deque<int> queue;
        for (int s = 0; s < state_count(); ++s) {
            if (food_[static_cast<std::size_t>(s)]) {
                food_dist_[static_cast<std::size_t>(s)] = 0;
                queue.push_back(s);
            }
        }
        while (!queue.empty()) {
            const int s = queue.front();
            queue.pop_front();
            for (int a = kUp; a <= kRight; ++a) {
                const int n = move(s, a);
                if (food_dist_[static_cast<std::size_t>(n)] > food_dist_[static_cast<std::size_t>(s)] + 1) {
                    food_dist_[static_cast<std::size_t>(n)] = food_dist_[static_cast<std::size_t>(s)] + 1;
                    queue.push_back(n);
                }
            }
        }
    }

    void apply_drift_schedule(EventFlags& flags) {
        for (const auto& cp : cfg_.drift.change_points) {
            if (cp.step == global_t_) {
                flags.change_point = true;
                std::vector<Cell> cells;
                if (cp.block.empty()) {
                    // Re-randomize: same number of food cells at fresh non-wall, non-hazard positions.
                    while (cells.size() < cfg_.food.size()) {
                        const Cell c{rng_.uniform_int(cfg_.width), rng_.uniform_int(cfg_.height)};
                        if (wall_[id(c)] || hazard_[id(c)] || std::find(cells.begin(), cells.end(), c) != cells.end()) continue;
                        cells.push_back(c);
                    }
                } else {
                    for (const auto& c : cp.block) cells.emplace_back(static_cast<int>(c[0]), static_cast<int>(c[1]));
                }
                set_food(cells);
            }
            if (global_t_ >= cp.step && global_t_ < cp.step + cfg_.shift_window) flags.shift_window = true;
        }
    }

    ViabilityGridConfig cfg_;
    RngStream rng_;
    std::vector<bool> wall_, hazard_, goal_, shortcut_, food_;
    std::vector<int> food_dist_;
    int pos_ = 0;
    int t_ = 0;
    long long global_t_ = 0;
};

} // namespace intero
