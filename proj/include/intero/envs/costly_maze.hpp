#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "intero/envs.hpp"
#include "intero/errors.hpp"
#include "intero/rng.hpp"

namespace intero {

/// Map legend: '#' wall, '.' room A floor, 'b' room B floor, 'S' start (room A),
/// 'C' charger (room A), 'H' hidden passage (room B side, closed until probed),
/// 'G' hidden goal behind the passage.
struct CostlyMazeConfig {
    std::vector<std::string> map{
        "###########",
        "#S...#bbbb#",
        "#....#bbbb#",
        "#C...bbbbb#",
        "#....#bbbb#",
        "#....#bbbH#",
        "#########G#",
    };
    int episode_len = 300;
    double move_cost = 0.01;
    double probe_cost = 0.08;
    double charge_gain = 0.2;
    double satiety = 1.5;        // charging adds nothing once energy has reached this level
    double goal_reward = 5.0;
    double strain_noise = 0.06;  // room B: drift drawn from {-s, 0, +s}
    double strain_revert = 0.1;  // room B mean reversion rate
    double strain_relax = 0.02;  // room A deterministic relaxation toward 0
    PerturbationSchedule perturbations;

    void validate() const {
        if (map.size() < 3) throw ConfigError("costly_maze: map needs at least 3 rows");
        const std::size_t w = map.front().size();
        int starts = 0, chargers = 0, goals = 0, passages = 0;
        for (const auto& row : map) {
            if (row.size() != w) throw ConfigError("costly_maze: map rows must have equal width");
            for (char c : row) {
                switch (c) {
                case 'S': ++starts; break;
                case 'C': ++chargers; break;
                case 'G': ++goals; break;
                case 'H': ++passages; break;
                case '#': case '.': case 'b': break;
                default: throw ConfigError(std::string("costly_maze: unknown map symbol '") + c + "'");
                }
            }
        }
        if (starts != 1 || chargers < 1 || goals < 1 || passages < 1) {
            throw ConfigError("costly_maze: map needs one S and at least one C, G and H");
        }
        if (episode_len < 1) throw ConfigError("env.episode_len must be >= 1");
        if (!(strain_noise >= 0.0) || !(strain_revert >= 0.0) || !(strain_relax >= 0.0)) {
            throw ConfigError("costly_maze: strain parameters must be >= 0");
        }
        perturbations.validate();
    }
};

/// Two-room maze with internal state (energy, strain). Actions: up, down, left, right, stay, probe.
/// External state = walkable cell x passage-open flag.
class CostlyMaze final : public Environment {
public:
    enum Action : int { kUp = 0, kDown, kLeft, kRight, kStay, kProbe, kActionCount };

    CostlyMaze(CostlyMazeConfig cfg, RngStream rng) : cfg_(std::move(cfg)), rng_(std::move(rng)) {
        cfg_.validate();
        height_ = static_cast<int>(cfg_.map.size());
        width_ = static_cast<int>(cfg_.map.front().size());
        cell_of_.assign(static_cast<std::size_t>(width_ * height_), -1);
        for (int y = 0; y < height_; ++y) {
            for (int x = 0; x < width_; ++x) {
                const char c = symbol(x, y);
                if (c == '#') continue;
                cell_of_[static_cast<std::size_t>(y * width_ + x)] = static_cast<int>(cells_.size());
                cells_.push_back({x, y, c});
                if (c == 'S') start_ = static_cast<int>(cells_.size()) - 1;
            }
        }
        if (!solvable()) throw ConfigError("costly_maze: goal unreachable from start even with the passage open");
        compute_charger_distance();
        check_recovery_coverage();
    }

    std::string_view kind() const override { return "costly_maze"; }
    int state_count() const override { return 2 * cell_count(); }
    int action_count() const override { return kActionCount; }
    std::size_t internal_dims() const override { return 2; }
    int episode_len() const override { return cfg_.episode_len; }
    double extra_noise() const override { return cfg_.perturbations.active(PerturbationKind::SensorNoiseBurst, t_); }

    std::string action_name(int a) const override {
        static constexpr std::array<const char*, kActionCount> names{"up", "down", "left", "right", "stay", "probe"};
        return names.at(static_cast<std::size_t>(a));
    }

    int cell_count() const { return static_cast<int>(cells_.size()); }
    int state_id(int cell, bool open) const { return (open ? cell_count() : 0) + cell; }
    int cell_of_state(int state) const { return state % cell_count(); }
    bool open_in_state(int state) const { return state >= cell_count(); }
    char symbol_of_state(int state) const { return cells_[static_cast<std::size_t>(cell_of_state(state))].symbol; }

    int region(int state) const override {
        const char c = symbol_of_state(state);
        return (c == 'b' || c == 'H' || c == 'G') ? 1 : 0;
    }

    int reset() override {
        cell_ = start_;
        open_ = false;
        t_ = 0;
        return state_id(cell_, open_);
    }

    StepResult step(int action, std::span<const double> v) override {
        if (action < 0 || action >= kActionCount) throw UsageError("costly_maze: action out of range");
        if (v.size() != 2) throw UsageError("costly_maze: expects (energy, strain)");
        StepResult r;
        r.flags.perturbed = cfg_.perturbations.any_active(t_);
        double energy = -cfg_.move_cost;
        r.action_cost = cfg_.move_cost;

        int next = cell_;
        if (action == kProbe) {
            energy = -cfg_.probe_cost;
            r.action_cost = cfg_.probe_cost;
            if (adjacent_to_passage(cell_)) open_ = true;
        } else if (action == kStay) {
            const bool locked = cfg_.perturbations.active(PerturbationKind::ResourceLockout, t_) > 0.0;
            if (cells_[static_cast<std::size_t>(cell_)].symbol == 'C' && !locked && v[0] < cfg_.satiety) {
                energy += cfg_.charge_gain;
            }
        } else {
            next = move(cell_, action, open_);
        }
        energy -= cfg_.perturbations.active(PerturbationKind::EnergyDrainSpike, t_);

        const double strain = v[1];
        double strain_drift;
        if (region(next) == 1) {
            const double shock = (rng_.uniform_int(3) - 1) * cfg_.strain_noise;
            strain_drift = shock - cfg_.strain_revert * strain;
        } else {
            strain_drift = -std::clamp(strain, -cfg_.strain_relax, cfg_.strain_relax);
        }
        r.drift = {energy, strain_drift};

        if (cells_[static_cast<std::size_t>(next)].symbol == 'G') {
            r.r_task = cfg_.goal_reward;
            next = start_;
        }
        cell_ = next;
        r.next_state = state_id(cell_, open_);
        ++t_;
        return r;
    }

    std::vector<int> recovery_actions(int state) const override {
        const int cell = cell_of_state(state);
        const bool open = open_in_state(state);
        const auto& dist = charger_dist_[open ? 1 : 0];
        if (dist[static_cast<std::size_t>(cell)] == 0) return {kStay};
        std::vector<int> out;
        for (int a = kUp; a <= kRight; ++a) {
            const int n = move(cell, a, open);
            if (dist[static_cast<std::size_t>(n)] < dist[static_cast<std::size_t>(cell)]) out.push_back(a);
        }
        if (out.empty()) out.push_back(kStay); // isolated cell: nothing better than waiting
        return out;
    }

    bool is_room_b_cell(int state) const { return symbol_of_state(state) == 'b'; }

private:
    struct MazeCell {
        int x, y;
        char symbol;
    };

    char symbol(int x, int y) const { return cfg_.map[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)]; }

    int move(int cell, int action, bool open) const {
        int x = cells_[static_cast<std::size_t>(cell)].x, y = cells_[static_cast<std::size_t>(cell)].y;
        switch (action) {
        case kUp: --y; break;
        case kDown: ++y; break;
        case kLeft: --x; break;
        case kRight: ++x; break;
        default: return cell;
        }
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return cell;
        const int n = cell_of_[static_cast<std::size_t>(y * width_ + x)];
        if (n < 0) return cell;
        if (cells_[static_cast<std::size_t>(n)].symbol == 'H' && !open) return cell;
        return n;
    }

    bool adjacent_to_passage(int cell) const {
        for (int a = kUp; a <= kRight; ++a) {
            const int n = move(cell, a, true);
            if (n != cell && cells_[static_cast<std::size_t>(n)].symbol == 'H') return true;
        }
        return false;
    }

    std::vector<int> bfs(const std::vector<int>& sources, bool open) const {
        constexpr int kFar = std::numeric_limits<int>::max() / 2;
        std::vector<int> dist(cells_.size(), kFar);
        std::deque<int> queue;
        for (int s : sources) {
            dist[static_cast<std::size_t>(s)] = 0;
            queue.push_back(s);
        }
        while (!queue.empty()) {
            const int c = queue.front();
            queue.pop_front();
            for (int a = kUp; a <= kRight; ++a) {
                const int n = move(c, a, open);
                if (dist[static_cast<std::size_t>(n)] > dist[static_cast<std::size_t>(c)] + 1) {
                    dist[static_cast<std::size_t>(n)] = dist[static_cast<std::size_t>(c)] + 1;
                    queue.push_back(n);
                }
            }
        }
        return dist;
    }

    bool solvable() const {
        const auto dist = bfs({start_}, true);
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            if (cells_[c].symbol == 'G' && dist[c] < std::numeric_limits<int>::max() / 2) return true;
        }
        return false;
    }

    void compute_charger_distance() {
        std::vector<int> chargers;
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            if (cells_[c].symbol == 'C') chargers.push_back(static_cast<int>(c));
        }
        charger_dist_[0] = bfs(chargers, false);
        charger_dist_[1] = bfs(chargers, true);
    }

    CostlyMazeConfig cfg_;
    RngStream rng_;
    int width_ = 0, height_ = 0;
    std::vector<MazeCell> cells_;
    std::vector<int> cell_of_;
    std::array<std::vector<int>, 2> charger_dist_;
    int start_ = 0;
    int cell_ = 0;
    bool open_ = false;
    int t_ = 0;
};

} // namespace intero
