#include "uper/gridworld_experiment.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace uper {

ReplayVariant replay_variant_from_string(std::string_view name) {
    if (name == "none") return ReplayVariant::kNone;
    if (name == "er") return ReplayVariant::kEr;
    if (name == "per") return ReplayVariant::kPer;
    if (name == "uper") return ReplayVariant::kUper;
    throw std::invalid_argument(std::string("unknown replay variant '") + std::string(name) + "'");
}

std::string_view replay_variant_name(ReplayVariant v) {
    switch (v) {
        case ReplayVariant::kNone: return "none";
        case ReplayVariant::kEr: return "er";
        case ReplayVariant::kPer: return "per";
        case ReplayVariant::kUper: return "uper";
    }
    return "?";
}

GridAgent::GridAgent(const GridworldConfig& cfg, ReplayVariant variant, RngStream cell_stream)
    : cfg_(cfg),
      variant_(variant),
      env_(cfg.map, cfg.goal_reward, cfg.step_reward, cfg.noise_std, cfg.timeout,
           cell_stream.split("env")),
      policy_stream_(cell_stream.split("policy")),
      buffer_stream_(cell_stream.split("replay")),
      eval_key_(cell_stream.split("eval")),
      q_(static_cast<std::size_t>(cfg.map.n_states()) * kNumGridActions, 0.0),
      counts_(q_.size(), 0),
      var_(cfg.map.n_states(), kNumGridActions, cfg.var_rate),
      buffer_(cfg.buffer_capacity, cfg.alpha, cfg.priority_floor,
              BetaSchedule{cfg.beta_start, cfg.beta_end, cfg.beta_fraction,
                           static_cast<std::uint64_t>(cfg.episodes)}),
      heatmap_(cfg.map.n_states(), 0),
      state_(cfg.map.start) {}

double GridAgent::max_q(int state) const {
    double best = q_[index(state, 0)];
    for (int a = 1; a < kNumGridActions; ++a) best = std::max(best, q_[index(state, a)]);
    return best;
}

int GridAgent::greedy_action(int state) const {
    int best = 0;
    double best_q = q_[index(state, 0)];
    for (int a = 1; a < kNumGridActions; ++a) {
        const double v = q_[index(state, a)];
        if (v > best_q) {  // ties keep the lowest action index
            best_q = v;
            best = a;
        }
    }
    return best;
}

void GridAgent::finish_episode() {
    episode_active_ = false;
    ++episode_;
}

double GridAgent::learn(const Transition& t, double weight) {
    const double td_error = t.reward +
                            (t.terminal ? 0.0 : cfg_.gamma * max_q(t.next_state)) -
                            q_[index(t.state, t.action)];
    q_[index(t.state, t.action)] += cfg_.lr * weight * td_error;
    return td_error;
}

Transition GridAgent::direct_step() {
    if (!episode_active_) {
        state_ = env_.start_state();
        steps_in_episode_ = 0;
        episode_active_ = true;
    }

    const double greedy_prob = cfg_.epsilon_is_greedy_prob ? cfg_.epsilon : 1.0 - cfg_.epsilon;
    const int action = policy_stream_.bernoulli(greedy_prob)
                           ? greedy_action(state_)
                           : static_cast<int>(policy_stream_.uniform_int(kNumGridActions));

    const auto step = env_.step(state_, action);

    Transition t;
    t.state = state_;
    t.action = action;
    t.reward = step.reward;
    t.next_state = step.next_state;
    t.terminal = step.terminal;

    const double td_error = learn(t, 1.0);
    ++counts_[index(state_, action)];
    var_.update(state_, action, step.next_state,
                step.terminal ? 0 : greedy_action(step.next_state), td_error, cfg_.gamma,
                step.terminal);

    double insert_priority = 1.0;
    if (variant_ == ReplayVariant::kPer || variant_ == ReplayVariant::kUper)
        insert_priority = cfg_.insert_priority == InsertPriority::kComputed
                              ? raw_priority_for(state_, action, td_error)
                              : buffer_.max_raw_priority();
    buffer_.insert(t, insert_priority);

    ++total_direct_steps_;
    ++steps_in_episode_;
    state_ = step.next_state;
    if (step.terminal || steps_in_episode_ >= cfg_.timeout) finish_episode();
    return t;
}

double GridAgent::raw_priority_for(int state, int action, double td_error) const {
    switch (variant_) {
        case ReplayVariant::kNone:
        case ReplayVariant::kEr:
            return 1.0;
        case ReplayVariant::kPer:
            return std::fabs(td_error);
        case ReplayVariant::kUper: {
            const auto count = static_cast<double>(counts_[index(state, action)]);
            const double proxy = cfg_.proxy == UperProxy::kTdSquaredOverCount
                                     ? td_error * td_error / (1.0 + count)
                                     : 1.0 / (1.0 + count);
            return info_gain(proxy, var_.value(state, action), cfg_.aleatoric_floor);
        }
    }
    throw std::logic_error("raw_priority_for: unhandled variant");
}

bool GridAgent::planning_step() {
    if (buffer_.size() == 0) return false;  // nothing to replay yet

    const auto batch = buffer_.sample(1, buffer_stream_, static_cast<std::uint64_t>(episode_));
    const auto& s = batch.front();
    const Transition& t = s.transition;

    const double weight =
        cfg_.weight_normalization == WeightNormalization::kBuffer ? s.weight : 1.0;
    const double td_error = learn(t, weight);

    if (variant_ == ReplayVariant::kPer || variant_ == ReplayVariant::kUper)
        buffer_.update_priority(s.id, raw_priority_for(t.state, t.action, td_error));

    ++heatmap_[t.state];
    ++total_planning_samples_;
    return true;
}

double GridAgent::evaluate(std::uint64_t tag) const {
    auto eval_stream = eval_key_.split(tag);
    int state = env_.start_state();
    double ret = 0.0;
    for (int step = 0; step < cfg_.timeout; ++step) {
        const auto r = env_.step_with(state, greedy_action(state), eval_stream);
        ret += r.reward;
        if (r.terminal) break;
        state = r.next_state;
    }
    return ret;
}

std::uint64_t GridAgent::count_table_sum() const {
    std::uint64_t acc = 0;
    for (auto c : counts_) acc += c;
    return acc;
}

GridworldRunResult run_gridworld(const GridworldConfig& cfg, ReplayVariant variant,
                                 RngStream cell_stream) {
    GridAgent agent(cfg, variant, cell_stream);
    GridworldRunResult result;
    result.test_returns.reserve(cfg.episodes);

    for (int episode = 0; episode < cfg.episodes; ++episode) {
        do {
            agent.direct_step();
            if (agent.total_direct_steps() % cfg.direct_per_cycle == 0 &&
                variant != ReplayVariant::kNone) {
                for (int k = 0; k < cfg.planning_per_cycle; ++k) agent.planning_step();
            }
        } while (agent.episode_active());
        result.test_returns.push_back(agent.evaluate(static_cast<std::uint64_t>(episode)));
    }

    result.heatmap = agent.heatmap();
    result.total_direct_steps = agent.total_direct_steps();
    result.total_planning_samples = agent.total_planning_samples();
    return result;
}

int shortest_path_length(const GridMap& map) {
    std::vector<int> dist(map.n_states(), -1);
    std::deque<int> queue;
    dist[map.start] = 0;
    queue.push_back(map.start);
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        if (s == map.goal) return dist[s];
        const int r = map.row_of(s), c = map.col_of(s);
        const int neighbors[4] = {map.cell(std::max(0, r - 1), c),
                                  map.cell(std::min(map.height - 1, r + 1), c),
                                  map.cell(r, std::max(0, c - 1)),
                                  map.cell(r, std::min(map.width - 1, c + 1))};
        for (int n : neighbors) {
            if (dist[n] < 0) {
                dist[n] = dist[s] + 1;
                queue.push_back(n);
            }
        }
    }
    throw std::runtime_error("shortest_path_length: goal unreachable from start");
}

double optimal_return(const GridworldConfig& cfg) {
    const int len = shortest_path_length(cfg.map);
    return cfg.goal_reward + (len - 1) * cfg.step_reward;
}

int episodes_to_threshold(const std::vector<double>& returns, double threshold) {
    for (std::size_t i = 0; i < returns.size(); ++i)
        if (returns[i] >= threshold) return static_cast<int>(i) + 1;
    return static_cast<int>(returns.size()) + 1;
}

double noisy_region_mass_fraction(const GridMap& map, const std::vector<std::uint64_t>& heatmap) {
    std::vector<std::uint8_t> region(map.n_states(), 0);
    for (int s = 0; s < map.n_states(); ++s) {
        if (!map.is_noisy(s)) continue;
        region[s] = 1;
        const int r = map.row_of(s), c = map.col_of(s);
        region[map.cell(std::max(0, r - 1), c)] = 1;
        region[map.cell(std::min(map.height - 1, r + 1), c)] = 1;
        region[map.cell(r, std::max(0, c - 1))] = 1;
        region[map.cell(r, std::min(map.width - 1, c + 1))] = 1;
    }
    std::uint64_t total = 0, in_region = 0;
    for (int s = 0; s < map.n_states(); ++s) {
        total += heatmap[s];
        if (region[s]) in_region += heatmap[s];
    }
    if (total == 0) return 0.0;
    return static_cast<double>(in_region) / static_cast<double>(total);
}

}  // namespace uper
