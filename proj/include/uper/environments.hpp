#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "uper/rng.hpp"

namespace uper {

// Multi-armed bandit with linearly increasing per-arm noise:
// sigma(a) = a * sigma_max / (n_arms - 1) + sigma_min.
class ConalBandit {
public:
    ConalBandit(std::vector<double> mean_rewards, double sigma_min, double sigma_max,
                RngStream rng);

    int n_arms() const { return static_cast<int>(means_.size()); }
    double mean_reward(int arm) const;
    double sigma(int arm) const;

    // One draw of mean(a) + eta * sigma(a), eta ~ N(0,1).
    double pull(int arm);

private:
    void check_arm(int arm) const;

    std::vector<double> means_;
    double sigma_min_, sigma_max_;
    RngStream rng_;
};

struct GridMap {
    int width = 0;
    int height = 0;
    int start = 0;
    int goal = 0;
    std::vector<std::uint8_t> noisy;  // per cell

    int cell(int row, int col) const { return row * width + col; }
    int row_of(int state) const { return state / width; }
    int col_of(int state) const { return state % width; }
    int n_states() const { return width * height; }
    bool is_noisy(int state) const { return noisy[state] != 0; }

    // Characters: S start, G goal, N noisy, . empty. Rejects ragged rows,
    // unknown characters, and missing or duplicated S/G.
    static GridMap parse(std::string_view text);
    std::string to_text() const;

    // 10x10, start top-left, goal bottom-right, 3x3 noisy block near the
    // start on the diagonal shortest path's early segment.
    static GridMap canonical();
};

enum GridAction { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNumGridActions = 4;

struct GridStepResult {
    int next_state;
    double reward;
    bool terminal;
};

// Deterministic transition dynamics; all randomness is in the rewards of
// noisy cells. Moves off-grid leave the agent in place. The goal is
// absorbing: stepping from it is an error.
class NoisyGridworld {
public:
    NoisyGridworld(GridMap map, double goal_reward, double step_reward, double noise_std,
                   int timeout, RngStream rng);

    const GridMap& map() const { return map_; }
    int start_state() const { return map_.start; }
    int n_states() const { return map_.n_states(); }
    int timeout() const { return timeout_; }
    double goal_reward() const { return goal_reward_; }
    double step_reward() const { return step_reward_; }
    double noise_std() const { return noise_std_; }

    GridStepResult step(int state, int action);

    // Same dynamics with a caller-provided stream (evaluation episodes).
    GridStepResult step_with(int state, int action, RngStream& rng) const;

private:
    GridMap map_;
    double goal_reward_, step_reward_, noise_std_;
    int timeout_;
    RngStream rng_;
};

}  // namespace uper
