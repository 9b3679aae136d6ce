#include "uper/environments.hpp"

#include <sstream>
#include <stdexcept>

namespace uper {

ConalBandit::ConalBandit(std::vector<double> mean_rewards, double sigma_min, double sigma_max,
                         RngStream rng)
    : means_(std::move(mean_rewards)), sigma_min_(sigma_min), sigma_max_(sigma_max), rng_(rng) {
    if (means_.empty()) throw std::invalid_argument("ConalBandit: need at least one arm");
    if (sigma_min < 0.0 || sigma_max < 0.0)
        throw std::invalid_argument("ConalBandit: sigmas must be nonnegative");
}

void ConalBandit::check_arm(int arm) const {
    if (arm < 0 || arm >= n_arms()) throw std::out_of_range("ConalBandit: arm out of range");
}

double ConalBandit::mean_reward(int arm) const {
    check_arm(arm);
    return means_[arm];
}

double ConalBandit::sigma(int arm) const {
    check_arm(arm);
    if (n_arms() == 1) return sigma_min_;
    return arm * sigma_max_ / (n_arms() - 1) + sigma_min_;
}

double ConalBandit::pull(int arm) {
    check_arm(arm);
    return means_[arm] + rng_.normal() * sigma(arm);
}

GridMap GridMap::parse(std::string_view text) {
    GridMap map;
    std::vector<std::string> rows;
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(line);
    }
    if (rows.empty()) throw std::invalid_argument("GridMap: empty map");
    map.height = static_cast<int>(rows.size());
    map.width = static_cast<int>(rows[0].size());
    map.noisy.assign(static_cast<std::size_t>(map.width) * map.height, 0);
    int starts = 0, goals = 0;
    for (int r = 0; r < map.height; ++r) {
        if (static_cast<int>(rows[r].size()) != map.width)
            throw std::invalid_argument("GridMap: map is not rectangular");
        for (int c = 0; c < map.width; ++c) {
            const int s = map.cell(r, c);
            switch (rows[r][c]) {
                case 'S':
                    map.start = s;
                    ++starts;
                    break;
                case 'G':
                    map.goal = s;
                    ++goals;
                    break;
                case 'N':
                    map.noisy[s] = 1;
                    break;
                case '.':
                    break;
                default:
                    throw std::invalid_argument(std::string("GridMap: unknown character '") +
                                                rows[r][c] + "'");
            }
        }
    }
    if (starts != 1) throw std::invalid_argument("GridMap: map must contain exactly one S");
    if (goals != 1) throw std::invalid_argument("GridMap: map must contain exactly one G");
    return map;
}

std::string GridMap::to_text() const {
    std::string out;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const int s = cell(r, c);
            char ch = '.';
            if (s == start)
                ch = 'S';
            else if (s == goal)
                ch = 'G';
            else if (noisy[s])
                ch = 'N';
            out += ch;
        }
        out += '\n';
    }
    return out;
}

GridMap GridMap::canonical() {
    return parse(
        "S.........\n"
        ".NNN......\n"
        ".NNN......\n"
        ".NNN......\n"
        "..........\n"
        "..........\n"
        "..........\n"
        "..........\n"
        "..........\n"
        ".........G\n");
}

NoisyGridworld::NoisyGridworld(GridMap map, double goal_reward, double step_reward,
                               double noise_std, int timeout, RngStream rng)
    : map_(std::move(map)),
      goal_reward_(goal_reward),
      step_reward_(step_reward),
      noise_std_(noise_std),
      timeout_(timeout),
      rng_(rng) {
    if (timeout < 1) throw std::invalid_argument("NoisyGridworld: timeout must be positive");
    if (noise_std < 0.0) throw std::invalid_argument("NoisyGridworld: noise_std must be >= 0");
}

GridStepResult NoisyGridworld::step(int state, int action) { return step_with(state, action, rng_); }

GridStepResult NoisyGridworld::step_with(int state, int action, RngStream& rng) const {
    if (state < 0 || state >= map_.n_states())
        throw std::out_of_range("NoisyGridworld: state out of range");
    if (state == map_.goal)
        throw std::logic_error("NoisyGridworld: stepping from the terminal state");
    if (action < 0 || action >= kNumGridActions)
        throw std::out_of_range("NoisyGridworld: action out of range");

    int r = map_.row_of(state);
    int c = map_.col_of(state);
    switch (action) {
        case kUp: r = std::max(0, r - 1); break;
        case kDown: r = std::min(map_.height - 1, r + 1); break;
        case kLeft: c = std::max(0, c - 1); break;
        case kRight: c = std::min(map_.width - 1, c + 1); break;
    }
    const int next = map_.cell(r, c);

    GridStepResult out;
    out.next_state = next;
    out.terminal = next == map_.goal;
    if (out.terminal)
        out.reward = goal_reward_;
    else if (map_.is_noisy(next))
        out.reward = rng.normal(0.0, noise_std_);
    else
        out.reward = step_reward_;
    return out;
}

}  // namespace uper
