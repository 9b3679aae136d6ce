#include "uper/sum_tree.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uper {

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

SumTree::SumTree(std::size_t capacity) : cap_(capacity) {
    if (capacity == 0) throw std::invalid_argument("SumTree: capacity must be positive");
    base_ = next_pow2(capacity);
    node_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t i, double value) {
    if (i >= cap_) throw std::out_of_range("SumTree::set: index out of range");
    std::size_t n = base_ + i;
    node_[n] = value;
    for (n >>= 1; n >= 1; n >>= 1) node_[n] = node_[2 * n] + node_[2 * n + 1];
}

double SumTree::get(std::size_t i) const {
    if (i >= cap_) throw std::out_of_range("SumTree::get: index out of range");
    return node_[base_ + i];
}

double SumTree::total() const { return node_[1]; }

std::size_t SumTree::sample(double u) const {
    std::size_t n = 1;
    while (n < base_) {
        const double left = node_[2 * n];
        if (u < left) {
            n = 2 * n;
        } else {
            u -= left;
            n = 2 * n + 1;
        }
    }
    std::size_t i = n - base_;
    // Boundary rounding can land on a zero-mass leaf; step to the next live one.
    while (i < cap_ && node_[base_ + i] == 0.0) ++i;
    if (i >= cap_) {
        for (i = cap_; i-- > 0;)
            if (node_[base_ + i] > 0.0) return i;
        throw std::logic_error("SumTree::sample: tree has no mass");
    }
    return i;
}

double SumTree::max_relative_node_error() const {
    const double t = total();
    if (t == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t n = 1; n < base_; ++n) {
        const double err = std::fabs(node_[n] - (node_[2 * n] + node_[2 * n + 1]));
        worst = std::max(worst, err);
    }
    return worst / t;
}

MinTree::MinTree(std::size_t capacity) : cap_(capacity) {
    if (capacity == 0) throw std::invalid_argument("MinTree: capacity must be positive");
    base_ = next_pow2(capacity);
    node_.assign(2 * base_, std::numeric_limits<double>::infinity());
}

void MinTree::set(std::size_t i, double value) {
    if (i >= cap_) throw std::out_of_range("MinTree::set: index out of range");
    std::size_t n = base_ + i;
    node_[n] = value;
    for (n >>= 1; n >= 1; n >>= 1) node_[n] = std::min(node_[2 * n], node_[2 * n + 1]);
}

void MinTree::clear(std::size_t i) { set(i, std::numeric_limits<double>::infinity()); }

double MinTree::min() const { return node_[1]; }

}  // namespace uper
