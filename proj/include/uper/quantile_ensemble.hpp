#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "uper/rng.hpp"

namespace uper {

// rate(t) = base * 2^(-t / half_life)
struct LearningSchedule {
    double base_rate = 0.005;
    double half_life = 40000.0;

    double at(double t) const { return base_rate * std::exp2(-t / half_life); }
};

enum class InitStyle {
    kSortedUniform,  // i.i.d. U(-1,1), sorted ascending per (member, state, action)
    kEvenlySpaced,   // theta_i at the tau_i-quantiles of U(-1,1)
};

// Ensemble of tabular quantile-regression return estimators: one value
// theta per (member, state, action, quantile). Quantile targets are the
// midpoints tau_i = (2i-1)/(2 n_q). Quantiles may cross during training;
// nothing downstream assumes sortedness.
class QuantileTable {
public:
    QuantileTable(int n_ens, int n_states, int n_actions, int n_q, InitStyle style,
                  RngStream& rng);

    int n_ens() const { return n_ens_; }
    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    int n_q() const { return n_q_; }
    const std::vector<double>& tau() const { return tau_; }

    double theta(int member, int state, int action, int q) const {
        return theta_[index(member, state, action, q)];
    }
    void set_theta(int member, int state, int action, int q, double value) {
        theta_[index(member, state, action, q)] = value;
    }
    std::span<const double> quantiles(int member, int state, int action) const {
        return {theta_.data() + index(member, state, action, 0), static_cast<std::size_t>(n_q_)};
    }

    // Stochastic subgradient step of the pinball loss toward target z:
    // theta_i += rate * (tau_i - 1{z < theta_i}).
    void qr_update(int member, int state, int action, double z, double rate);

    // qr_update for every member whose mask bit is set.
    void masked_update(std::span<const std::uint8_t> mask, int state, int action, double z,
                       double rate);

    // Mean over members and quantiles.
    double q_value(int state, int action) const;
    // Mean over quantiles for one member.
    double member_q_value(int member, int state, int action) const;

    // Shift one member's quantiles so their mean equals `mean` exactly.
    void set_member_mean(int member, int state, int action, double mean);

private:
    std::size_t index(int member, int state, int action, int q) const {
        return ((static_cast<std::size_t>(member) * n_states_ + state) * n_actions_ + action) *
                   n_q_ +
               q;
    }
    void check_indices(int member, int state, int action) const;

    int n_ens_, n_states_, n_actions_, n_q_;
    std::vector<double> tau_;
    std::vector<double> theta_;
};

std::vector<std::uint8_t> bernoulli_mask(int n, double p, RngStream& rng);

}  // namespace uper
