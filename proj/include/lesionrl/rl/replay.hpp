#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "lesionrl/env/environment.hpp"
#include "lesionrl/env/renderer.hpp"

namespace lesionrl::rl {

using Rng = std::mt19937_64;

// (s_t, a_t, r_t, s_{t+1}) with states stored as descriptors; pixels are
// re-rendered on demand.
struct Transition {
  env::StateRef state;
  env::Action action = env::Action::kStill;
  double reward = 0.0;
  env::StateRef next_state;

  bool operator==(const Transition&) const = default;
};

// Bounded FIFO of transitions: once full, each push evicts the oldest entry.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(const Transition& t);

  // Element i in insertion order; 0 is the oldest stored transition.
  const Transition& operator[](std::size_t i) const;
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return storage_.size(); }
  bool empty() const { return size_ == 0; }
  std::uint64_t total_pushed() const { return pushed_; }
  std::vector<Transition> contents() const;

  // Uniform sample of n stored transitions: without replacement when
  // size() >= n, with replacement otherwise. Throws SamplingError when empty.
  std::vector<Transition> sample_batch(std::size_t n, Rng& rng) const;

  // One row per transition, oldest first.
  void dump_csv(std::ostream& out) const;

 private:
  std::vector<Transition> storage_;
  std::size_t head_ = 0;  // index of the oldest entry
  std::size_t size_ = 0;
  std::uint64_t pushed_ = 0;
};

}  // namespace lesionrl::rl
