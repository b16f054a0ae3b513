#include "lesionrl/oracle/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "lesionrl/error.hpp"

namespace lesionrl::oracle {

ChainMdp::Outcome ChainMdp::transition(int state, env::Action a) const {
  int next = state;
  env::Action effective = a;
  if (a == env::Action::kAnterograde) next = state + 1;
  if (a == env::Action::kRetrograde) next = state - 1;
  if (next < 0 || next >= size()) {
    next = state;
    effective = env::Action::kStill;
  }
  return {next, env::reward_for(in_lesion[state], effective)};
}

ChainMdp ChainMdp::from_case(const env::GazeCase& c, double gamma) {
  ChainMdp mdp;
  mdp.gamma = gamma;
  for (int i = 0; i < c.gaze_count(); ++i) mdp.in_lesion.push_back(env::in_lesion(c, i));
  return mdp;
}

ChainMdp ChainMdp::chain(int n, const std::vector<int>& lesion_states, double gamma) {
  ChainMdp mdp;
  mdp.gamma = gamma;
  mdp.in_lesion.assign(n, false);
  for (int s : lesion_states) mdp.in_lesion.at(s) = true;
  return mdp;
}

namespace {

double max_of(const QRow& row) { return *std::max_element(row.begin(), row.end()); }

}  // namespace

QTable value_iteration(const ChainMdp& mdp, double tol, int* sweeps) {
  if (!(mdp.gamma < 1.0)) throw DivergenceError("value iteration requires gamma < 1");
  if (!(tol > 0.0)) throw ConfigError("value iteration tolerance must be positive");
  if (mdp.size() == 0) throw InputError("empty MDP");
  QTable q(mdp.size(), QRow{0.0, 0.0, 0.0});
  int n = 0;
  while (true) {
    QTable next = q;
    double change = 0.0;
    for (int s = 0; s < mdp.size(); ++s) {
      for (auto a : env::kAllActions) {
        const auto o = mdp.transition(s, a);
        const double v = o.reward + mdp.gamma * max_of(q[o.next]);
        change = std::max(change, std::abs(v - q[s][env::index_of(a)]));
        next[s][env::index_of(a)] = v;
      }
    }
    q = std::move(next);
    ++n;
    if (change < tol) break;
  }
  if (sweeps) *sweeps = n;
  return q;
}

QTable q_learning_tabular(const ChainMdp& mdp, const QLearningOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha <= 1.0)) {
    throw ConfigError("q-learning alpha must lie in (0, 1]");
  }
  QTable q(mdp.size(), QRow{0.0, 0.0, 0.0});
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, env::kNumActions - 1);
  const int length = options.episode_length > 0 ? options.episode_length : mdp.size();
  for (int e = 0; e < options.episodes; ++e) {
    const double epsilon = options.epsilon(e);
    int s = 0;
    for (int t = 0; t < length; ++t) {
      int a = 0;
      if (coin(rng) < epsilon) {
        a = pick(rng);
      } else {
        a = static_cast<int>(std::max_element(q[s].begin(), q[s].end()) - q[s].begin());
      }
      const auto o = mdp.transition(s, static_cast<env::Action>(a));
      q[s][a] += options.alpha * (o.reward + mdp.gamma * max_of(q[o.next]) - q[s][a]);
      s = o.next;
    }
  }
  return q;
}

double sup_norm_distance(const QTable& a, const QTable& b) {
  if (a.size() != b.size()) throw_dimension_mismatch("q-table rows", a.size(), b.size());
  double d = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (int k = 0; k < env::kNumActions; ++k) d = std::max(d, std::abs(a[s][k] - b[s][k]));
  }
  return d;
}

std::vector<env::Action> greedy_policy(const QTable& q) {
  std::vector<env::Action> policy;
  for (const auto& row : q) {
    policy.push_back(
        static_cast<env::Action>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return policy;
}

void write_qtable_csv(std::ostream& out, const QTable& q) {
  out << "state,anterograde,still,retrograde\n";
  out << std::setprecision(10);
  for (std::size_t s = 0; s < q.size(); ++s) {
    out << s << ',' << q[s][0] << ',' << q[s][1] << ',' << q[s][2] << '\n';
  }
}

}  // namespace lesionrl::oracle
