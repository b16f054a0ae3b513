#include "lesionrl/rl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

#include "lesionrl/error.hpp"
#include "lesionrl/nn/network.hpp"
#include "lesionrl/rl/eval.hpp"

namespace lesionrl::rl {

void Hyperparameters::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon_start && epsilon_start <= 1.0)) {
    throw ConfigError("require 0 <= epsilon_min <= epsilon_start <= 1");
  }
  if (!(epsilon_decay >= 0.0)) throw ConfigError("epsilon_decay must be non-negative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (memory == 0) throw ConfigError("memory must be positive");
  if (batch <= 0) throw ConfigError("batch must be positive");
  if (episodes <= 0) throw ConfigError("episodes must be positive");
}

double epsilon_at(int episode, const Hyperparameters& h) {
  return std::max(h.epsilon_min, h.epsilon_start - episode * h.epsilon_decay);
}

env::Action select_action(std::span<const float> q, double epsilon, Rng& rng) {
  if (q.size() != env::kNumActions) throw_dimension_mismatch("Q-vector size", env::kNumActions, q.size());
  for (float v : q) {
    if (!std::isfinite(v)) throw NumericError("non-finite Q-value in action selection");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, env::kNumActions - 1);
    return static_cast<env::Action>(pick(rng));
  }
  return static_cast<env::Action>(argmax(q));
}

double bellman_target(double reward, double gamma, std::span<const float> next_q) {
  if (next_q.empty()) throw DimensionError("bellman_target: empty next_q");
  const float best = *std::max_element(next_q.begin(), next_q.end());
  return reward + gamma * static_cast<double>(best);
}

double batch_loss(std::span<const double> targets, std::span<const double> predicted) {
  if (targets.size() != predicted.size() || targets.empty()) {
    throw_dimension_mismatch("batch_loss lengths", targets.size(), predicted.size());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) sum += std::abs(targets[i] - predicted[i]);
  return sum / static_cast<double>(targets.size());
}

std::vector<float> loss_output_gradient(std::span<const double> targets,
                                        std::span<const double> predicted,
                                        std::span<const env::Action> actions) {
  if (targets.size() != predicted.size() || targets.size() != actions.size() || targets.empty()) {
    throw_dimension_mismatch("loss gradient lengths", targets.size(), predicted.size());
  }
  const double n = static_cast<double>(targets.size());
  std::vector<float> grad(targets.size() * env::kNumActions, 0.0f);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double diff = predicted[i] - targets[i];
    const double sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    grad[i * env::kNumActions + env::index_of(actions[i])] = static_cast<float>(sign / n);
  }
  return grad;
}

LearnStep learn_from_batch(nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                           nn::Adam& optimizer, const env::StateRenderer& renderer,
                           std::span<const Transition> batch, double gamma) {
  if (batch.empty()) throw SamplingError("learn_from_batch: empty batch");

  // Distinct current states get a forward pass with activations kept;
  // next states not already among them get an output-only pass.
  std::map<env::StateRef, int> current_row;
  std::vector<env::StateRef> current;
  for (const auto& t : batch) {
    if (current_row.emplace(t.state, static_cast<int>(current.size())).second) {
      current.push_back(t.state);
    }
  }
  std::map<env::StateRef, int> extra_row;
  std::vector<env::StateRef> extra;
  for (const auto& t : batch) {
    if (current_row.count(t.next_state) == 0 &&
        extra_row.emplace(t.next_state, static_cast<int>(extra.size())).second) {
      extra.push_back(t.next_state);
    }
  }

  std::vector<float> pixels;
  pixels.reserve(renderer.state_size() * current.size());
  renderer.render_batch(current, pixels);
  const auto ctx = nn::forward_batch(params, cfg, std::move(pixels), static_cast<int>(current.size()));
  std::vector<float> extra_q;
  if (!extra.empty()) {
    std::vector<float> extra_pixels;
    extra_pixels.reserve(renderer.state_size() * extra.size());
    renderer.render_batch(extra, extra_pixels);
    extra_q = nn::predict_batch(params, cfg, std::move(extra_pixels), static_cast<int>(extra.size()));
  }
  auto q_of = [&](const env::StateRef& s) -> std::span<const float> {
    if (auto it = current_row.find(s); it != current_row.end()) return ctx.output_of(it->second);
    const int row = extra_row.at(s);
    return std::span<const float>(extra_q).subspan(static_cast<std::size_t>(row) * env::kNumActions,
                                                   env::kNumActions);
  };

  std::vector<double> targets, predicted;
  std::vector<env::Action> actions;
  for (const auto& t : batch) {
    targets.push_back(bellman_target(t.reward, gamma, q_of(t.next_state)));
    predicted.push_back(q_of(t.state)[env::index_of(t.action)]);
    actions.push_back(t.action);
  }
  LearnStep result;
  result.loss = batch_loss(targets, predicted);
  if (!std::isfinite(result.loss)) return result;

  // Fold per-transition gradients onto the distinct forward rows.
  const auto per_transition = loss_output_gradient(targets, predicted, actions);
  std::vector<float> output_grad(current.size() * env::kNumActions, 0.0f);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int row = current_row.at(batch[i].state);
    for (int a = 0; a < env::kNumActions; ++a) {
      output_grad[static_cast<std::size_t>(row) * env::kNumActions + a] +=
          per_transition[i * env::kNumActions + a];
    }
  }
  const auto grads = nn::backward(params, ctx, output_grad);
  result.applied = optimizer.step(params, grads);
  return result;
}

void TrainingLog::write_csv(std::ostream& out) const {
  out << "episode,score,epsilon,mean_batch_loss,train_acc,test_acc\n";
  out << std::fixed;
  for (const auto& r : records) {
    out << r.episode << ',' << std::setprecision(6) << r.score << ',' << std::setprecision(6)
        << r.epsilon << ',' << std::setprecision(6) << r.mean_batch_loss << ',';
    if (r.train_accuracy) out << std::setprecision(4) << *r.train_accuracy;
    out << ',';
    if (r.test_accuracy) out << std::setprecision(4) << *r.test_accuracy;
    out << '\n';
  }
}

std::vector<double> TrainingLog::test_accuracy_samples() const {
  std::vector<double> v;
  for (const auto& r : records) {
    if (r.test_accuracy) v.push_back(*r.test_accuracy);
  }
  return v;
}

std::vector<double> TrainingLog::train_accuracy_samples() const {
  std::vector<double> v;
  for (const auto& r : records) {
    if (r.train_accuracy) v.push_back(*r.train_accuracy);
  }
  return v;
}

TrainResult train(std::span<const env::GazeCase> train_set, const Hyperparameters& h,
                  std::span<const env::GazeCase> test_set, const TrainOptions& options) {
  h.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  for (const auto& c : train_set) env::validate_case(c);
  for (const auto& c : test_set) env::validate_case(c);
  if (options.eval_every <= 0) throw ConfigError("eval_every must be positive");

  const env::StateRenderer renderer(train_set, options.overlay);
  TrainResult result;
  result.config = options.network.value_or(
      nn::NetworkConfig::q_network(renderer.height(), renderer.width()));
  if (result.config.head != nn::Head::kQValues) throw ConfigError("DQN needs a Q-value head");
  result.params = nn::glorot_init(result.config, h.seed);

  nn::Adam optimizer({.learning_rate = h.learning_rate});
  ReplayMemory memory(h.memory);
  // Separate stream from the weight initialization.
  Rng rng(h.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> pick_case(0, static_cast<int>(train_set.size()) - 1);
  std::vector<bool> finals;

  for (int episode = 0; episode < h.episodes; ++episode) {
    const double epsilon = epsilon_at(episode, h);
    const int ci = pick_case(rng);
    const auto& c = train_set[ci];
    const int steps = env::episode_length(c);
    int index = 0;
    std::vector<double> rewards;
    double loss_sum = 0.0;

    for (int t = 0; t < steps; ++t) {
      const env::StateRef s{ci, index};
      const auto q = nn::forward(result.params, result.config, renderer.render(s));
      const auto action = select_action(q, epsilon, rng);
      const auto outcome = env::step(c, index, action);
      rewards.push_back(outcome.reward);
      memory.push({s, action, outcome.reward, {ci, outcome.next_index}});

      const auto batch = memory.sample_batch(static_cast<std::size_t>(h.batch), rng);
      const auto learned =
          learn_from_batch(result.params, result.config, optimizer, renderer, batch, h.gamma);
      if (!std::isfinite(learned.loss)) {
        throw NumericError("non-finite batch loss at episode " + std::to_string(episode + 1) +
                           ", step " + std::to_string(t + 1));
      }
      loss_sum += learned.loss;
      ++result.gradient_steps;
      if (!learned.applied) ++result.skipped_steps;
      index = outcome.next_index;
    }

    EpisodeRecord record;
    record.episode = episode + 1;
    record.case_index = ci;
    record.score = episode_score(rewards, steps);
    record.epsilon = epsilon;
    record.mean_batch_loss = loss_sum / steps;
    record.final_in_lesion = env::in_lesion(c, index);
    finals.push_back(record.final_in_lesion);

    if (record.episode % options.eval_every == 0) {
      const auto window = static_cast<std::ptrdiff_t>(options.eval_every);
      record.train_accuracy =
          static_cast<double>(std::count(finals.end() - window, finals.end(), true)) /
          options.eval_every;
      if (!test_set.empty()) {
        record.test_accuracy =
            test_accuracy(result.params, result.config, test_set, options.overlay).accuracy;
      }
    }
    result.log.records.push_back(record);
    if (options.on_episode) options.on_episode(record);
    if (options.checkpoint_every > 0 && options.on_checkpoint &&
        record.episode % options.checkpoint_every == 0) {
      options.on_checkpoint(record.episode, result.params);
    }
  }
  return result;
}

}  // namespace lesionrl::rl
