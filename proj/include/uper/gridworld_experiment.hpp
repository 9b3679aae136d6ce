#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "uper/environments.hpp"
#include "uper/priority_buffer.hpp"
#include "uper/uncertainty.hpp"

namespace uper {

enum class ReplayVariant {
    kNone,  // direct learning only
    kEr,    // uniform replay
    kPer,   // priority |td error|
    kUper,  // information gain with the count proxy
};

ReplayVariant replay_variant_from_string(std::string_view name);
std::string_view replay_variant_name(ReplayVariant v);

// Epistemic proxy fed into the information gain for UPER planning.
enum class UperProxy {
    kTdSquaredOverCount,  // delta^2 / (1 + C)
    kInverseCount,        // 1 / (1 + C), ablation variant
};

// Priority given to a transition when it enters the buffer. kComputed uses
// the scheme's own priority from the direct step's TD error (free in the
// tabular setting); kMaxSoFar is the deep-RL convention.
enum class InsertPriority {
    kComputed,
    kMaxSoFar,
};

struct GridworldConfig {
    GridMap map = GridMap::canonical();
    double goal_reward = 100.0;
    double step_reward = -0.1;
    double noise_std = 2.0;
    int timeout = 1000;
    double lr = 0.1;
    double gamma = 0.9;
    // Epsilon defaults to 0.95, interpreted as the greedy probability (act
    // greedily 95% of the time). Set epsilon_is_greedy_prob = false for the
    // literal convention (greedy with probability 1 - epsilon).
    double epsilon = 0.95;
    bool epsilon_is_greedy_prob = true;
    std::size_t buffer_capacity = 10000;
    double alpha = 0.7;
    double beta_start = 0.5;
    double beta_end = 1.0;
    double beta_fraction = 0.4;
    double priority_floor = 1e-3;
    double aleatoric_floor = 1e-6;
    int direct_per_cycle = 10;
    int planning_per_cycle = 5;
    int episodes = 150;
    double var_rate = 0.1;  // variance-estimator rate, kept equal to lr
    UperProxy proxy = UperProxy::kTdSquaredOverCount;
    WeightNormalization weight_normalization = WeightNormalization::kBatch;
    InsertPriority insert_priority = InsertPriority::kComputed;
};

// Tabular Q-learner with visit counts, a direct variance estimator, and a
// prioritized replay buffer for Dyna-style planning updates.
class GridAgent {
public:
    GridAgent(const GridworldConfig& config, ReplayVariant variant, RngStream cell_stream);

    // One epsilon-greedy environment step with a Q-learning update; the
    // transition is inserted at the max priority seen so far. Starts a new
    // episode automatically when none is active.
    Transition direct_step();

    // One prioritized replay update; returns false (no-op) on empty buffer.
    bool planning_step();

    // One-step Q-learning update on one transition (terminal transitions
    // drop the bootstrap term); returns the TD error. Used by both the
    // direct and the planning path.
    double learn(const Transition& t, double weight);

    // One greedy episode on a fresh environment stream; undiscounted return.
    double evaluate(std::uint64_t tag) const;

    bool episode_active() const { return episode_active_; }
    int current_episode() const { return episode_; }
    void finish_episode();  // advances the episode counter (after timeout/goal)

    int greedy_action(int state) const;
    double q(int state, int action) const { return q_[index(state, action)]; }
    void set_q(int state, int action, double v) { q_[index(state, action)] = v; }
    std::uint64_t visit_count(int state, int action) const { return counts_[index(state, action)]; }
    const VarianceEstimator& variance() const { return var_; }

    const std::vector<std::uint64_t>& heatmap() const { return heatmap_; }
    std::uint64_t total_direct_steps() const { return total_direct_steps_; }
    std::uint64_t total_planning_samples() const { return total_planning_samples_; }
    std::uint64_t count_table_sum() const;
    const PriorityBuffer& buffer() const { return buffer_; }

private:
    std::size_t index(int state, int action) const {
        return static_cast<std::size_t>(state) * kNumGridActions + action;
    }
    double max_q(int state) const;
    double raw_priority_for(int state, int action, double td_error) const;

    GridworldConfig cfg_;
    ReplayVariant variant_;
    NoisyGridworld env_;
    RngStream policy_stream_;
    RngStream buffer_stream_;
    RngStream eval_key_;

    std::vector<double> q_;
    std::vector<std::uint64_t> counts_;
    VarianceEstimator var_;
    PriorityBuffer buffer_;

    std::vector<std::uint64_t> heatmap_;
    int episode_ = 0;
    int state_;
    int steps_in_episode_ = 0;
    bool episode_active_ = false;
    std::uint64_t total_direct_steps_ = 0;
    std::uint64_t total_planning_samples_ = 0;
};

struct GridworldRunResult {
    std::vector<double> test_returns;     // one greedy evaluation per episode
    std::vector<std::uint64_t> heatmap;   // planning samples by source state
    std::uint64_t total_direct_steps = 0;
    std::uint64_t total_planning_samples = 0;
};

// Full training run: episodes of direct interaction with planning_per_cycle
// replay updates after every direct_per_cycle direct steps, evaluating after
// each episode.
GridworldRunResult run_gridworld(const GridworldConfig& config, ReplayVariant variant,
                                 RngStream cell_stream);

// BFS move count from start to goal (throws if unreachable).
int shortest_path_length(const GridMap& map);

// Return of the noise-free shortest path: goal_reward + (L - 1) * step_reward.
double optimal_return(const GridworldConfig& config);

// 1-based episode index of the first evaluation >= threshold; episodes + 1
// if the threshold is never reached.
int episodes_to_threshold(const std::vector<double>& returns, double threshold);

// Fraction of heatmap mass on noisy cells and their 4-neighbors.
double noisy_region_mass_fraction(const GridMap& map, const std::vector<std::uint64_t>& heatmap);

}  // namespace uper
