#include "lesionrl/sdl/keypoint.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "lesionrl/error.hpp"
#include "lesionrl/nn/adam.hpp"
#include "lesionrl/nn/network.hpp"

namespace lesionrl::sdl {

Point2 bbox_center(const Mask& mask) {
  int x0 = mask.width, x1 = -1, y0 = mask.height, y1 = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw InputError("bbox_center: mask has no set pixels");
  return {(x0 + x1) / 2.0, (y0 + y1) / 2.0};
}

Point2 keypoint_target(const Mask& mask) {
  const auto c = bbox_center(mask);
  return {c.x / mask.width, c.y / mask.height};
}

Image keypoint_input(const env::GazeCase& c) { return replicate_channels(c.image, 3); }

KeypointPrediction to_pixel(double u, double v, const env::GazeCase& c) {
  KeypointPrediction p;
  p.u = u;
  p.v = v;
  const int w = c.image.width, h = c.image.height;
  p.x = std::clamp(static_cast<int>(std::lround(u * w)), 0, w - 1);
  p.y = std::clamp(static_cast<int>(std::lround(v * h)), 0, h - 1);
  p.in_lesion = c.lesion_mask.at(p.y, p.x);
  return p;
}

namespace {

std::vector<float> stack_inputs(std::span<const env::GazeCase> cases,
                                std::span<const std::size_t> order) {
  std::vector<float> pixels;
  for (std::size_t i : order) {
    const auto img = keypoint_input(cases[i]);
    pixels.insert(pixels.end(), img.data.begin(), img.data.end());
  }
  return pixels;
}

std::vector<float> stack_targets(std::span<const env::GazeCase> cases,
                                 std::span<const std::size_t> order) {
  std::vector<float> t;
  for (std::size_t i : order) {
    const auto k = keypoint_target(cases[i].lesion_mask);
    t.push_back(static_cast<float>(k.x));
    t.push_back(static_cast<float>(k.y));
  }
  return t;
}

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

// Forward passes in chunks so a large test set does not need one huge batch.
std::vector<float> predict_all(const nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                               std::span<const env::GazeCase> cases) {
  constexpr std::size_t kChunk = 32;
  std::vector<float> out;
  const auto order = identity_order(cases.size());
  for (std::size_t start = 0; start < cases.size(); start += kChunk) {
    const std::size_t end = std::min(cases.size(), start + kChunk);
    std::span<const std::size_t> part(order.data() + start, end - start);
    const auto y = nn::predict_batch(params, cfg, stack_inputs(cases, part),
                                     static_cast<int>(part.size()));
    out.insert(out.end(), y.begin(), y.end());
  }
  return out;
}

}  // namespace

std::vector<KeypointPrediction> predict_keypoints(const nn::ParameterStore& params,
                                                  const nn::NetworkConfig& cfg,
                                                  std::span<const env::GazeCase> cases) {
  if (cfg.head != nn::Head::kKeypoint) throw ConfigError("keypoint prediction needs a keypoint head");
  const auto y = predict_all(params, cfg, cases);
  std::vector<KeypointPrediction> preds;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    preds.push_back(to_pixel(y[2 * i], y[2 * i + 1], cases[i]));
  }
  return preds;
}

KeypointPrediction predict_keypoint(const nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                                    const env::GazeCase& c) {
  return predict_keypoints(params, cfg, std::span<const env::GazeCase>(&c, 1)).front();
}

double keypoint_loss(std::span<const float> predicted, std::span<const float> target) {
  if (predicted.size() != target.size() || predicted.empty()) {
    throw_dimension_mismatch("keypoint_loss lengths", target.size(), predicted.size());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    sum += std::abs(static_cast<double>(predicted[i]) - target[i]);
  }
  return sum / static_cast<double>(predicted.size());
}

void SdlOptions::validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch <= 0) throw ConfigError("batch must be positive");
  if (eval_every <= 0) throw ConfigError("eval_every must be positive");
}

void SdlLog::write_loss_csv(std::ostream& out) const {
  out << "epoch,train_loss,test_loss\n" << std::fixed << std::setprecision(6);
  for (const auto& e : epochs) out << e.epoch << ',' << e.train_loss << ',' << e.test_loss << '\n';
}

void SdlLog::write_accuracy_csv(std::ostream& out) const {
  out << "epoch,test_acc\n" << std::fixed << std::setprecision(4);
  for (const auto& e : epochs) {
    if (e.test_accuracy) out << e.epoch << ',' << *e.test_accuracy << '\n';
  }
}

std::vector<double> SdlLog::test_accuracy_samples() const {
  std::vector<double> v;
  for (const auto& e : epochs) {
    if (e.test_accuracy) v.push_back(*e.test_accuracy);
  }
  return v;
}

std::optional<int> detect_divergence(std::span<const double> train_loss,
                                     std::span<const double> test_loss, double ratio) {
  if (train_loss.size() != test_loss.size()) {
    throw_dimension_mismatch("loss curve lengths", train_loss.size(), test_loss.size());
  }
  if (!(ratio >= 1.0)) throw ConfigError("divergence ratio must be at least 1");
  if (test_loss.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t e = 1; e < test_loss.size(); ++e) {
    if (test_loss[e] > ratio * test_loss[best] && train_loss[e] < train_loss[best]) {
      return static_cast<int>(e) + 1;
    }
    if (test_loss[e] < test_loss[best]) best = e;
  }
  return std::nullopt;
}

std::optional<int> detect_divergence(const SdlLog& log, double ratio) {
  std::vector<double> train, test;
  for (const auto& e : log.epochs) {
    train.push_back(e.train_loss);
    test.push_back(e.test_loss);
  }
  return detect_divergence(train, test, ratio);
}

SdlResult train_supervised(std::span<const env::GazeCase> train_set,
                           std::span<const env::GazeCase> test_set, const SdlOptions& options) {
  options.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  const int h = train_set.front().image.height, w = train_set.front().image.width;
  for (const auto& c : train_set) {
    if (c.image.height != h || c.image.width != w) {
      throw ValidationError("case '" + c.case_id + "' differs in size from the training set");
    }
  }
  for (const auto& c : test_set) {
    if (c.image.height != h || c.image.width != w) {
      throw ValidationError("case '" + c.case_id + "' differs in size from the training set");
    }
  }

  SdlResult result;
  result.config = options.network.value_or(nn::NetworkConfig::keypoint_network(h, w));
  if (result.config.head != nn::Head::kKeypoint) throw ConfigError("SDL baseline needs a keypoint head");
  result.params = nn::glorot_init(result.config, options.seed);
  nn::Adam optimizer({.learning_rate = options.learning_rate});
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);

  auto order = identity_order(train_set.size());
  const auto test_order = identity_order(test_set.size());
  const auto test_targets = stack_targets(test_set, test_order);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(options.batch));
      std::span<const std::size_t> part(order.data() + start, end - start);
      const int n = static_cast<int>(part.size());
      const auto target = stack_targets(train_set, part);
      const auto ctx = nn::forward_batch(result.params, result.config, stack_inputs(train_set, part), n);
      const double loss = keypoint_loss(ctx.output, target);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite keypoint loss at epoch " + std::to_string(epoch));
      }
      weighted += loss * n;
      std::vector<float> grad(ctx.output.size());
      const double scale = 1.0 / static_cast<double>(grad.size());
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double d = static_cast<double>(ctx.output[i]) - target[i];
        grad[i] = static_cast<float>(d > 0 ? scale : (d < 0 ? -scale : 0.0));
      }
      if (!optimizer.step(result.params, nn::backward(result.params, ctx, grad))) {
        ++result.skipped_steps;
      }
    }

    SdlEpoch record;
    record.epoch = epoch;
    record.train_loss = weighted / static_cast<double>(order.size());
    if (!test_set.empty()) {
      const auto y = predict_all(result.params, result.config, test_set);
      record.test_loss = keypoint_loss(y, test_targets);
      if (!std::isfinite(record.test_loss)) {
        throw NumericError("non-finite test loss at epoch " + std::to_string(epoch));
      }
      if (epoch % options.eval_every == 0) {
        int tp = 0;
        for (std::size_t i = 0; i < test_set.size(); ++i) {
          tp += to_pixel(y[2 * i], y[2 * i + 1], test_set[i]).in_lesion ? 1 : 0;
        }
        record.test_accuracy = static_cast<double>(tp) / static_cast<double>(test_set.size());
      }
    }
    result.log.epochs.push_back(record);
  }
  if (!test_set.empty()) result.divergence_epoch = detect_divergence(result.log);
  return result;
}

}  // namespace lesionrl::sdl
