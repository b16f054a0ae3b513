#include "lesionrl/rl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "lesionrl/env/renderer.hpp"
#include "lesionrl/error.hpp"
#include "lesionrl/nn/network.hpp"

namespace lesionrl::rl {

std::vector<double> softmax(std::span<const double> q) {
  if (q.empty()) return {};
  const double m = *std::max_element(q.begin(), q.end());
  std::vector<double> p(q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = std::exp(q[i] - m);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

int argmax(std::span<const float> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

double episode_score(std::span<const double> rewards, int n_gaze) {
  if (n_gaze <= 0 || static_cast<int>(rewards.size()) != n_gaze) {
    throw_dimension_mismatch("episode_score reward count", n_gaze, rewards.size());
  }
  return std::accumulate(rewards.begin(), rewards.end(), 0.0) / n_gaze;
}

std::vector<RolloutResult> greedy_rollouts(const nn::ParameterStore& params,
                                           const nn::NetworkConfig& cfg,
                                           std::span<const env::GazeCase> cases,
                                           const env::OverlayConfig& overlay) {
  if (cases.empty()) return {};
  env::StateRenderer renderer(cases, overlay);
  const int n = static_cast<int>(cases.size());
  std::vector<int> index(n, 0);
  std::vector<std::vector<double>> rewards(n);
  std::vector<RolloutResult> results(n);
  int max_len = 0;
  for (const auto& c : cases) max_len = std::max(max_len, env::episode_length(c));

  for (int t = 0; t < max_len; ++t) {
    std::vector<int> active;
    std::vector<env::StateRef> states;
    for (int i = 0; i < n; ++i) {
      if (t < env::episode_length(cases[i])) {
        active.push_back(i);
        states.push_back({i, index[i]});
      }
    }
    std::vector<float> pixels;
    pixels.reserve(renderer.state_size() * states.size());
    renderer.render_batch(states, pixels);
    const auto q = nn::predict_batch(params, cfg, std::move(pixels), static_cast<int>(states.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      const int i = active[k];
      std::vector<double> qd(q.begin() + static_cast<std::ptrdiff_t>(k * env::kNumActions),
                             q.begin() + static_cast<std::ptrdiff_t>((k + 1) * env::kNumActions));
      const auto action = static_cast<env::Action>(argmax(softmax(qd)));
      const auto r = env::step(cases[i], index[i], action);
      results[i].actions.push_back(action);
      rewards[i].push_back(r.reward);
      index[i] = r.next_index;
    }
  }
  for (int i = 0; i < n; ++i) {
    results[i].final_index = index[i];
    results[i].in_lesion = env::in_lesion(cases[i], index[i]);
    results[i].score = episode_score(rewards[i], env::episode_length(cases[i]));
  }
  return results;
}

RolloutResult greedy_rollout(const nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                             const env::GazeCase& c, const env::OverlayConfig& overlay) {
  return greedy_rollouts(params, cfg, std::span<const env::GazeCase>(&c, 1), overlay).front();
}

EvaluationReport summarize(std::vector<CaseOutcome> outcomes) {
  if (outcomes.empty()) throw InputError("evaluation needs at least one case");
  EvaluationReport report;
  report.cases = std::move(outcomes);
  double score_sum = 0.0;
  for (const auto& o : report.cases) {
    report.true_positives += o.in_lesion ? 1 : 0;
    score_sum += o.score;
  }
  const auto n = static_cast<double>(report.cases.size());
  report.accuracy = report.true_positives / n;
  report.mean_score = score_sum / n;
  return report;
}

EvaluationReport test_accuracy(const nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                               std::span<const env::GazeCase> cases,
                               const env::OverlayConfig& overlay) {
  if (cases.empty()) throw InputError("test_accuracy needs at least one case");
  const auto rollouts = greedy_rollouts(params, cfg, cases, overlay);
  std::vector<CaseOutcome> outcomes;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    outcomes.push_back({cases[i].case_id, rollouts[i].final_index, rollouts[i].in_lesion,
                        rollouts[i].score});
  }
  return summarize(std::move(outcomes));
}

void EvaluationReport::write_csv(std::ostream& out) const {
  out << "case_id,final_index,in_lesion,score\n";
  out << std::setprecision(6) << std::fixed;
  for (const auto& c : cases) {
    out << c.case_id << ',' << c.final_index << ',' << (c.in_lesion ? 1 : 0) << ',' << c.score
        << '\n';
  }
}

void EvaluationReport::write_text(std::ostream& out) const {
  out << "cases:          " << cases.size() << '\n'
      << "true positives: " << true_positives << '\n'
      << "accuracy:       " << std::setprecision(4) << std::fixed << accuracy << '\n'
      << "mean score:     " << mean_score << '\n';
}

ComparisonResult compare_methods(int rl_tp, int sdl_tp, int n) {
  if (n <= 0) throw InputError("compare_methods: n must be positive");
  if (rl_tp < 0 || rl_tp > n || sdl_tp < 0 || sdl_tp > n) {
    throw InputError("compare_methods: true-positive counts must lie in [0, n]");
  }
  ComparisonResult r;
  r.test_name = "two-proportion z-test (pooled, two-sided)";
  r.rl_accuracy = static_cast<double>(rl_tp) / n;
  r.sdl_accuracy = static_cast<double>(sdl_tp) / n;
  const double pooled = static_cast<double>(rl_tp + sdl_tp) / (2.0 * n);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (2.0 / n));
  if (se == 0.0 || rl_tp == sdl_tp) {
    r.z = 0.0;
    r.p_value = 1.0;
    return r;
  }
  r.z = (r.rl_accuracy - r.sdl_accuracy) / se;
  r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  return r;
}

}  // namespace lesionrl::rl
