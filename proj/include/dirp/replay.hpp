#pragma once

#include <deque>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "dirp/mlp.hpp"

namespace dirp {

struct Transition {
  Vec state;
  Vec action;
  double reward = 0.0;
  Vec next_state;
  long t = -1;
  int source_cell = -1;
};

// Bounded FIFO experience store with uniform sampling without replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : cap_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay: zero capacity");
  }

  void push(Transition tr) {
    if (buf_.size() == cap_) buf_.pop_front();
    buf_.push_back(std::move(tr));
  }

  std::vector<Transition> sample(std::mt19937_64& rng, int batch) const {
    if (batch <= 0) throw std::logic_error("replay: nonpositive batch");
    if (static_cast<std::size_t>(batch) > buf_.size())
      throw std::logic_error("replay: not enough stored transitions to sample");
    std::vector<std::size_t> idx(buf_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<Transition> out;
    out.reserve(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                      idx.size() - 1);
      std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
      out.push_back(buf_[idx[static_cast<std::size_t>(i)]]);
    }
    return out;
  }

  std::size_t size() const { return buf_.size(); }
  std::size_t capacity() const { return cap_; }
  const Transition& operator[](std::size_t i) const { return buf_[i]; }
  void clear() { buf_.clear(); }

 private:
  std::size_t cap_;
  std::deque<Transition> buf_;
};

}  // namespace dirp
