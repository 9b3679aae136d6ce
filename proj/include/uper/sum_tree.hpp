#pragma once

#include <cstddef>
#include <vector>

namespace uper {

// Array-backed binary sum tree over a fixed number of leaves. Parents are
// recomputed from both children on every update, so each internal node is
// exactly the rounded sum of its children at all times.
class SumTree {
public:
    explicit SumTree(std::size_t capacity);

    void set(std::size_t i, double value);
    double get(std::size_t i) const;
    double total() const;
    std::size_t capacity() const { return cap_; }

    // Leaf index whose cumulative-sum bucket contains u, for u in [0, total).
    // Zero-mass leaves are skipped if a boundary value lands on one.
    std::size_t sample(double u) const;

    // Max |node - (left + right)| over internal nodes, relative to total().
    // Test hook for the tree-consistency invariant.
    double max_relative_node_error() const;

private:
    std::size_t cap_;
    std::size_t base_;               // leaves occupy [base_, base_ + cap_)
    std::vector<double> node_;
};

// Same layout, tracking the minimum over leaves; unset leaves are +inf.
// Needed for the max importance weight over the buffer.
class MinTree {
public:
    explicit MinTree(std::size_t capacity);

    void set(std::size_t i, double value);
    void clear(std::size_t i);       // back to +inf
    double min() const;

private:
    std::size_t cap_;
    std::size_t base_;
    std::vector<double> node_;
};

}  // namespace uper
