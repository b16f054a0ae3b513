#include "lesionrl/rl/replay.hpp"

#include <algorithm>
#include <ostream>

#include "lesionrl/error.hpp"

namespace lesionrl::rl {

ReplayMemory::ReplayMemory(std::size_t capacity) : storage_(capacity) {
  if (capacity == 0) throw ConfigError("replay memory capacity must be positive");
}

void ReplayMemory::push(const Transition& t) {
  const std::size_t cap = storage_.size();
  if (size_ < cap) {
    storage_[(head_ + size_) % cap] = t;
    ++size_;
  } else {
    storage_[head_] = t;
    head_ = (head_ + 1) % cap;
  }
  ++pushed_;
}

const Transition& ReplayMemory::operator[](std::size_t i) const {
  if (i >= size_) throw StateError("replay index out of range");
  return storage_[(head_ + i) % storage_.size()];
}

std::vector<Transition> ReplayMemory::contents() const {
  std::vector<Transition> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back((*this)[i]);
  return out;
}

std::vector<Transition> ReplayMemory::sample_batch(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw SamplingError("cannot sample from an empty replay memory");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  if (size_ >= n) {
    while (chosen.size() < n) {
      const std::size_t i = pick(rng);
      if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) chosen.push_back(pick(rng));
  }
  std::vector<Transition> batch;
  batch.reserve(n);
  for (std::size_t i : chosen) batch.push_back((*this)[i]);
  return batch;
}

void ReplayMemory::dump_csv(std::ostream& out) const {
  out << "case_index,gaze_index,action,reward,next_case_index,next_gaze_index\n";
  for (std::size_t i = 0; i < size_; ++i) {
    const auto& t = (*this)[i];
    out << t.state.case_index << ',' << t.state.gaze_index << ',' << env::to_string(t.action)
        << ',' << t.reward << ',' << t.next_state.case_index << ',' << t.next_state.gaze_index
        << '\n';
  }
}

}  // namespace lesionrl::rl
