#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "uper/rng.hpp"
#include "uper/sum_tree.hpp"

namespace uper {

// One stored experience. The mask selects which ensemble members train on
// this transition (one bit per member, drawn Bernoulli(0.5) at insertion).
// Non-ensemble learners store an empty mask.
struct Transition {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
    bool terminal = false;
    std::vector<std::uint8_t> mask;
};

// How the importance weight applied to a learning rate is normalized.
// kBatch normalizes within the sampled batch (weight 1 for a batch of one);
// kBuffer divides by the maximum weight over the whole buffer, the
// PriorityBuffer::Sample convention.
enum class WeightNormalization {
    kBatch,
    kBuffer,
};

// Linear anneal of the importance exponent from `start` to `end` over the
// first `fraction` of `total_steps`, held at `end` afterwards.
struct BetaSchedule {
    double start = 0.5;
    double end = 1.0;
    double fraction = 0.4;
    std::uint64_t total_steps = 1;

    double at(std::uint64_t step) const {
        const double horizon = fraction * static_cast<double>(total_steps);
        if (horizon <= 0.0) return end;
        const double f = std::min(1.0, static_cast<double>(step) / horizon);
        return start + (end - start) * f;
    }
};

// Sum-tree-backed replay store. Stored priority of an entry with raw
// priority p is (p + epsilon_floor)^alpha; sampling probability is the
// stored priority over the tree total. Eviction is strictly FIFO.
class PriorityBuffer {
public:
    struct Sample {
        std::uint64_t id;
        Transition transition;
        double weight;       // (N P(i))^-beta, normalized so the max over the buffer is 1
        double probability;  // P(i) at draw time
    };

    PriorityBuffer(std::size_t capacity, double alpha, double epsilon_floor,
                   BetaSchedule beta = {});

    std::uint64_t insert(Transition t, double raw_priority);
    void update_priority(std::uint64_t id, double raw_priority);

    // Each entry is drawn independently (with replacement) with probability
    // proportional to its stored priority; `step` selects beta.
    std::vector<Sample> sample(std::size_t batch, RngStream& rng, std::uint64_t step = 0) const;

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    bool alive(std::uint64_t id) const;

    double probability_of(std::uint64_t id) const;
    double stored_priority_of(std::uint64_t id) const;
    double raw_priority_of(std::uint64_t id) const;
    const Transition& entry(std::uint64_t id) const;
    Transition& entry(std::uint64_t id);

    double total_mass() const { return tree_.total(); }
    double max_raw_priority() const { return max_raw_priority_; }
    double beta_at(std::uint64_t step) const { return beta_.at(step); }
    double alpha() const { return alpha_; }
    double epsilon_floor() const { return epsilon_floor_; }

    // Test hook for the tree-consistency invariant.
    double tree_relative_error() const { return tree_.max_relative_node_error(); }

    // Diagnostics dump, one row per live entry (CSV, oldest first).
    void dump_csv(std::ostream& out) const;

private:
    std::size_t slot_of(std::uint64_t id) const;
    double stored_from_raw(double raw) const;

    std::size_t capacity_;
    double alpha_;
    double epsilon_floor_;
    BetaSchedule beta_;

    SumTree tree_;
    MinTree min_tree_;
    std::vector<Transition> entries_;
    std::vector<double> raw_;
    std::uint64_t next_id_ = 0;
    std::size_t size_ = 0;
    double max_raw_priority_ = 1.0;
};

}  // namespace uper
