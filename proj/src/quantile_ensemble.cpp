#include "uper/quantile_ensemble.hpp"

#include <algorithm>
#include <stdexcept>

namespace uper {

QuantileTable::QuantileTable(int n_ens, int n_states, int n_actions, int n_q, InitStyle style,
                             RngStream& rng)
    : n_ens_(n_ens), n_states_(n_states), n_actions_(n_actions), n_q_(n_q) {
    if (n_ens < 1 || n_states < 1 || n_actions < 1 || n_q < 1)
        throw std::invalid_argument("QuantileTable: all counts must be positive");

    tau_.resize(n_q_);
    for (int i = 0; i < n_q_; ++i) tau_[i] = (2.0 * i + 1.0) / (2.0 * n_q_);

    theta_.resize(static_cast<std::size_t>(n_ens_) * n_states_ * n_actions_ * n_q_);
    for (int m = 0; m < n_ens_; ++m) {
        for (int s = 0; s < n_states_; ++s) {
            for (int a = 0; a < n_actions_; ++a) {
                double* q = theta_.data() + index(m, s, a, 0);
                if (style == InitStyle::kSortedUniform) {
                    for (int i = 0; i < n_q_; ++i) q[i] = rng.uniform(-1.0, 1.0);
                    std::sort(q, q + n_q_);
                } else {
                    for (int i = 0; i < n_q_; ++i) q[i] = -1.0 + 2.0 * tau_[i];
                }
            }
        }
    }
}

void QuantileTable::check_indices(int member, int state, int action) const {
    if (member < 0 || member >= n_ens_ || state < 0 || state >= n_states_ || action < 0 ||
        action >= n_actions_)
        throw std::out_of_range("QuantileTable: index out of range");
}

void QuantileTable::qr_update(int member, int state, int action, double z, double rate) {
    check_indices(member, state, action);
    if (!std::isfinite(z))
        throw std::invalid_argument("QuantileTable::qr_update: target must be finite");
    double* q = theta_.data() + index(member, state, action, 0);
    for (int i = 0; i < n_q_; ++i) {
        const double indicator = z < q[i] ? 1.0 : 0.0;
        q[i] += rate * (tau_[i] - indicator);
    }
}

void QuantileTable::masked_update(std::span<const std::uint8_t> mask, int state, int action,
                                  double z, double rate) {
    if (mask.size() != static_cast<std::size_t>(n_ens_))
        throw std::invalid_argument("QuantileTable::masked_update: mask length != ensemble size");
    for (int m = 0; m < n_ens_; ++m)
        if (mask[m]) qr_update(m, state, action, z, rate);
}

double QuantileTable::q_value(int state, int action) const {
    double sum = 0.0;
    for (int m = 0; m < n_ens_; ++m) {
        const double* q = theta_.data() + index(m, state, action, 0);
        for (int i = 0; i < n_q_; ++i) sum += q[i];
    }
    return sum / (static_cast<double>(n_ens_) * n_q_);
}

double QuantileTable::member_q_value(int member, int state, int action) const {
    check_indices(member, state, action);
    const double* q = theta_.data() + index(member, state, action, 0);
    double sum = 0.0;
    for (int i = 0; i < n_q_; ++i) sum += q[i];
    return sum / n_q_;
}

void QuantileTable::set_member_mean(int member, int state, int action, double mean) {
    const double shift = mean - member_q_value(member, state, action);
    double* q = theta_.data() + index(member, state, action, 0);
    for (int i = 0; i < n_q_; ++i) q[i] += shift;
}

std::vector<std::uint8_t> bernoulli_mask(int n, double p, RngStream& rng) {
    std::vector<std::uint8_t> mask(n);
    for (int i = 0; i < n; ++i) mask[i] = rng.bernoulli(p) ? 1 : 0;
    return mask;
}

}  // namespace uper
