#include "uper/priority_buffer.hpp"

#include <cmath>
#include <stdexcept>

#include "uper/csv.hpp"

namespace uper {

PriorityBuffer::PriorityBuffer(std::size_t capacity, double alpha, double epsilon_floor,
                               BetaSchedule beta)
    : capacity_(capacity),
      alpha_(alpha),
      epsilon_floor_(epsilon_floor),
      beta_(beta),
      tree_(capacity),
      min_tree_(capacity),
      entries_(capacity),
      raw_(capacity, 0.0) {
    if (capacity == 0) throw std::invalid_argument("PriorityBuffer: capacity must be positive");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("PriorityBuffer: alpha must lie in [0, 1]");
    if (epsilon_floor < 0.0)
        throw std::invalid_argument("PriorityBuffer: epsilon_floor must be nonnegative");
}

double PriorityBuffer::stored_from_raw(double raw) const {
    return std::pow(raw + epsilon_floor_, alpha_);
}

std::size_t PriorityBuffer::slot_of(std::uint64_t id) const {
    if (!alive(id)) throw std::out_of_range("PriorityBuffer: entry id is stale or unknown");
    return static_cast<std::size_t>(id % capacity_);
}

bool PriorityBuffer::alive(std::uint64_t id) const {
    return id < next_id_ && id + size_ >= next_id_;
}

std::uint64_t PriorityBuffer::insert(Transition t, double raw_priority) {
    if (!std::isfinite(raw_priority) || raw_priority < 0.0)
        throw std::invalid_argument("PriorityBuffer::insert: priority must be finite and >= 0");
    const std::uint64_t id = next_id_++;
    const auto slot = static_cast<std::size_t>(id % capacity_);
    entries_[slot] = std::move(t);
    raw_[slot] = raw_priority;
    const double stored = stored_from_raw(raw_priority);
    tree_.set(slot, stored);
    min_tree_.set(slot, stored);
    if (size_ < capacity_) ++size_;
    max_raw_priority_ = std::max(max_raw_priority_, raw_priority);
    return id;
}

void PriorityBuffer::update_priority(std::uint64_t id, double raw_priority) {
    if (!std::isfinite(raw_priority) || raw_priority < 0.0)
        throw std::invalid_argument(
            "PriorityBuffer::update_priority: priority must be finite and >= 0");
    const auto slot = slot_of(id);
    raw_[slot] = raw_priority;
    const double stored = stored_from_raw(raw_priority);
    tree_.set(slot, stored);
    min_tree_.set(slot, stored);
    max_raw_priority_ = std::max(max_raw_priority_, raw_priority);
}

std::vector<PriorityBuffer::Sample> PriorityBuffer::sample(std::size_t batch, RngStream& rng,
                                                           std::uint64_t step) const {
    if (size_ == 0) throw std::runtime_error("PriorityBuffer::sample: buffer is empty");
    const double total = tree_.total();
    if (total <= 0.0) throw std::runtime_error("PriorityBuffer::sample: total priority mass is zero");

    const double beta = beta_.at(step);
    // w_i = (N P(i))^-beta / max_j w_j reduces to (p_min / p_i)^beta on the
    // stored (exponentiated) priorities, since N and the total cancel.
    const double min_stored = min_tree_.min();

    std::vector<Sample> out;
    out.reserve(batch);
    for (std::size_t k = 0; k < batch; ++k) {
        const double u = rng.uniform() * total;
        const std::size_t slot = tree_.sample(u);
        const double stored = tree_.get(slot);
        Sample s;
        // Recover the id of the entry currently occupying this slot.
        const std::uint64_t first_live = next_id_ - size_;
        std::uint64_t id = first_live + ((slot + capacity_ - first_live % capacity_) % capacity_);
        s.id = id;
        s.transition = entries_[slot];
        s.probability = stored / total;
        s.weight = std::pow(min_stored / stored, beta);
        out.push_back(std::move(s));
    }
    return out;
}

double PriorityBuffer::probability_of(std::uint64_t id) const {
    return tree_.get(slot_of(id)) / tree_.total();
}

double PriorityBuffer::stored_priority_of(std::uint64_t id) const { return tree_.get(slot_of(id)); }

double PriorityBuffer::raw_priority_of(std::uint64_t id) const { return raw_[slot_of(id)]; }

const Transition& PriorityBuffer::entry(std::uint64_t id) const { return entries_[slot_of(id)]; }

Transition& PriorityBuffer::entry(std::uint64_t id) { return entries_[slot_of(id)]; }

void PriorityBuffer::dump_csv(std::ostream& out) const {
    CsvWriter csv(out, {"entry_id", "state", "action", "reward", "next_state", "terminal",
                        "raw_priority", "stored_priority", "probability"});
    const std::uint64_t first_live = next_id_ - size_;
    for (std::uint64_t id = first_live; id < next_id_; ++id) {
        const auto slot = static_cast<std::size_t>(id % capacity_);
        const Transition& t = entries_[slot];
        csv.field(id)
            .field(t.state)
            .field(t.action)
            .field(t.reward)
            .field(t.next_state)
            .field(std::int64_t{t.terminal ? 1 : 0})
            .field(raw_[slot])
            .field(tree_.get(slot))
            .field(tree_.get(slot) / tree_.total());
        csv.end_row();
    }
}

}  // namespace uper
