#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "lesionrl/env/environment.hpp"

namespace lesionrl::oracle {

// Deterministic gaze-chain MDP: states are gaze indices 0..N-1, moves are
// clamped at both ends, and rewards follow env::reward_for through a
// per-state lesion flag.
struct ChainMdp {
  std::vector<bool> in_lesion;
  double gamma = 0.9;

  int size() const { return static_cast<int>(in_lesion.size()); }

  struct Outcome {
    int next = 0;
    double reward = 0.0;
  };
  Outcome transition(int state, env::Action a) const;

  static ChainMdp from_case(const env::GazeCase& c, double gamma);
  // Chain of `n` states with the given (0-based) lesion states.
  static ChainMdp chain(int n, const std::vector<int>& lesion_states, double gamma);
};

using QRow = std::array<double, env::kNumActions>;
using QTable = std::vector<QRow>;

// Synchronous sweeps Q <- r + gamma * max Q(s', .) from zero until the
// sup-norm change drops below tol. Throws DivergenceError for gamma >= 1.
QTable value_iteration(const ChainMdp& mdp, double tol, int* sweeps = nullptr);

struct QLearningOptions {
  double alpha = 0.5;
  int episodes = 1000;
  int episode_length = 0;  // 0: one step per state, as in the gaze environment
  std::function<double(int episode)> epsilon = [](int) { return 1.0; };
  std::uint64_t seed = 1;
};

// Tabular Q-learning with the update
//   Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
// over epsilon-greedy episodes that start at state 0. Q starts at zero.
QTable q_learning_tabular(const ChainMdp& mdp, const QLearningOptions& options);

double sup_norm_distance(const QTable& a, const QTable& b);

// argmax per state, ties to the lowest action index.
std::vector<env::Action> greedy_policy(const QTable& q);

void write_qtable_csv(std::ostream& out, const QTable& q);

}  // namespace lesionrl::oracle
