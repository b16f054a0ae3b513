#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lesionrl/env/environment.hpp"
#include "lesionrl/nn/config.hpp"
#include "lesionrl/nn/params.hpp"

namespace lesionrl::rl {

// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> q);

// Index of the largest entry; ties resolve to the lowest index.
int argmax(std::span<const double> values);
int argmax(std::span<const float> values);

// Mean reward of an episode. Throws DimensionError unless
// rewards.size() == n_gaze.
double episode_score(std::span<const double> rewards, int n_gaze);

struct RolloutResult {
  int final_index = 0;
  bool in_lesion = false;
  double score = 0.0;
  std::vector<env::Action> actions;
};

// On-policy rollout from the first gaze point for episode_length(c) steps,
// taking argmax(softmax(Q)) each step.
RolloutResult greedy_rollout(const nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                             const env::GazeCase& c, const env::OverlayConfig& overlay = {});

// The same rollout for many cases at once; every step is one batched forward
// pass over the cases still running.
std::vector<RolloutResult> greedy_rollouts(const nn::ParameterStore& params,
                                           const nn::NetworkConfig& cfg,
                                           std::span<const env::GazeCase> cases,
                                           const env::OverlayConfig& overlay = {});

struct CaseOutcome {
  std::string case_id;
  int final_index = 0;
  bool in_lesion = false;
  double score = 0.0;
};

struct EvaluationReport {
  std::vector<CaseOutcome> cases;
  int true_positives = 0;
  double accuracy = 0.0;  // true_positives / cases.size()
  double mean_score = 0.0;

  void write_csv(std::ostream& out) const;
  void write_text(std::ostream& out) const;
};

EvaluationReport test_accuracy(const nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                               std::span<const env::GazeCase> cases,
                               const env::OverlayConfig& overlay = {});

// Builds a report from already-known outcomes.
EvaluationReport summarize(std::vector<CaseOutcome> outcomes);

struct ComparisonResult {
  double rl_accuracy = 0.0;
  double sdl_accuracy = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  std::string test_name;
};

// Pooled two-proportion z-test on rl_tp / n vs sdl_tp / n, two-sided.
ComparisonResult compare_methods(int rl_tp, int sdl_tp, int n);

}  // namespace lesionrl::rl
