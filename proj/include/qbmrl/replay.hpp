#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "network.hpp"
#include "rng.hpp"

namespace qbmrl {

struct Transition {
    BitVec state;
    std::size_t action = 0;
    double reward = 0.0;
    BitVec next_state;
    bool done = false;
};

// Bounded FIFO of transitions. Once full, pushing evicts the oldest entry.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay buffer: capacity must be >= 1");
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    void push(Transition t) {
        if (t.state.size() != t.next_state.size())
            throw std::invalid_argument("replay buffer: state/next_state length mismatch");
        if (items_.size() == capacity_) items_.pop_front();
        items_.push_back(std::move(t));
    }

    const Transition& at(std::size_t i) const { return items_[i]; }

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
};

// k transitions drawn uniformly without replacement (within one call).
inline std::vector<Transition> sample_minibatch(const ReplayBuffer& buf, std::size_t k,
                                                Rng& rng) {
    if (k == 0) throw std::invalid_argument("sample_minibatch: k must be >= 1");
    if (k > buf.size())
        throw std::invalid_argument("sample_minibatch: k exceeds buffer size");
    std::vector<std::size_t> picked;
    picked.reserve(k);
    std::vector<Transition> out;
    out.reserve(k);
    while (out.size() < k) {
        const std::size_t idx = rand_index(rng, buf.size());
        bool dup = false;
        for (std::size_t p : picked)
            if (p == idx) {
                dup = true;
                break;
            }
        if (dup) continue;
        picked.push_back(idx);
        out.push_back(buf.at(idx));
    }
    return out;
}

inline BitVec one_hot(std::size_t index, std::size_t n) {
    if (index >= n) throw std::invalid_argument("one_hot: index out of range");
    BitVec v(n, 0);
    v[index] = 1;
    return v;
}

}  // namespace qbmrl
