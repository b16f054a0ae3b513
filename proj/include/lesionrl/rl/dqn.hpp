#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesionrl/env/environment.hpp"
#include "lesionrl/env/renderer.hpp"
#include "lesionrl/nn/adam.hpp"
#include "lesionrl/nn/config.hpp"
#include "lesionrl/nn/params.hpp"
#include "lesionrl/rl/replay.hpp"

namespace lesionrl::rl {

struct Hyperparameters {
  double gamma = 0.99;
  double epsilon_start = 0.5;
  double epsilon_decay = 1e-4;  // subtracted once per episode
  double epsilon_min = 1e-4;
  double learning_rate = 1e-4;
  std::size_t memory = 12000;
  int batch = 64;
  int episodes = 300;
  std::uint64_t seed = 7;

  // Throws ConfigError when a value is out of range.
  void validate() const;
};

// max(epsilon_min, epsilon_start - episode * epsilon_decay).
double epsilon_at(int episode, const Hyperparameters& h);

// Epsilon-greedy: a uniform draw below epsilon picks a uniformly random
// action, otherwise argmax(q) with ties to the lowest index. Throws
// NumericError on non-finite q.
env::Action select_action(std::span<const float> q, double epsilon, Rng& rng);

// reward + gamma * max(next_q).
double bellman_target(double reward, double gamma, std::span<const float> next_q);

// Mean absolute error between targets and the predicted Q of the taken
// actions. Throws DimensionError on length mismatch or empty input.
double batch_loss(std::span<const double> targets, std::span<const double> predicted);

// dL/dQ for batch_loss, n x 3 row-major. Only the taken action of each row
// is non-zero: sign(predicted - target) / n.
std::vector<float> loss_output_gradient(std::span<const double> targets,
                                        std::span<const double> predicted,
                                        std::span<const env::Action> actions);

struct LearnStep {
  double loss = 0.0;
  bool applied = false;  // false when the optimizer skipped a non-finite gradient
};

// One gradient step on a sampled batch. Targets come from the same (online)
// network before the update and are held constant.
LearnStep learn_from_batch(nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                           nn::Adam& optimizer, const env::StateRenderer& renderer,
                           std::span<const Transition> batch, double gamma);

struct EpisodeRecord {
  int episode = 0;  // 1-based
  int case_index = 0;
  double score = 0.0;
  double epsilon = 0.0;
  double mean_batch_loss = 0.0;
  bool final_in_lesion = false;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
};

struct TrainingLog {
  std::vector<EpisodeRecord> records;

  // Columns: episode,score,epsilon,mean_batch_loss,train_acc,test_acc.
  // Accuracy cells are empty on episodes where they were not sampled.
  void write_csv(std::ostream& out) const;

  std::vector<double> test_accuracy_samples() const;
  std::vector<double> train_accuracy_samples() const;
};

struct TrainOptions {
  env::OverlayConfig overlay;
  int eval_every = 10;
  // Network topology; defaults to the Q-network for the case image size.
  std::optional<nn::NetworkConfig> network;
  std::function<void(const EpisodeRecord&)> on_episode;
  int checkpoint_every = 0;
  std::function<void(int episode, const nn::ParameterStore&)> on_checkpoint;
};

struct TrainResult {
  nn::NetworkConfig config;
  nn::ParameterStore params;
  TrainingLog log;
  std::int64_t gradient_steps = 0;
  std::int64_t skipped_steps = 0;
};

// Interleaved sample-and-learn loop: each episode picks a training case at
// random, starts at the first gaze point and runs episode_length steps of
// epsilon-greedy play; every step pushes a transition and takes one gradient
// step on a replay batch. Epsilon decays after each episode. Every
// eval_every episodes the train accuracy (last eval_every final states) and
// the greedy test accuracy are recorded.
TrainResult train(std::span<const env::GazeCase> train_set, const Hyperparameters& h,
                  std::span<const env::GazeCase> test_set, const TrainOptions& options = {});

}  // namespace lesionrl::rl
