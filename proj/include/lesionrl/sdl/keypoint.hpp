#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lesionrl/env/environment.hpp"
#include "lesionrl/image.hpp"
#include "lesionrl/nn/config.hpp"
#include "lesionrl/nn/params.hpp"

namespace lesionrl::sdl {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Center of the bounding box of the set pixels; may be fractional. Throws
// InputError on an empty mask.
Point2 bbox_center(const Mask& mask);

// bbox_center divided by (width, height).
Point2 keypoint_target(const Mask& mask);

// Plain grayscale replicated to three channels, no gaze or agent overlay.
Image keypoint_input(const env::GazeCase& c);

struct KeypointPrediction {
  double u = 0.0;
  double v = 0.0;
  int x = 0;
  int y = 0;
  bool in_lesion = false;
};

// (u * width, v * height) rounded to the nearest pixel and clamped onto the
// image.
KeypointPrediction to_pixel(double u, double v, const env::GazeCase& c);

KeypointPrediction predict_keypoint(const nn::ParameterStore& params, const nn::NetworkConfig& cfg,
                                    const env::GazeCase& c);
std::vector<KeypointPrediction> predict_keypoints(const nn::ParameterStore& params,
                                                  const nn::NetworkConfig& cfg,
                                                  std::span<const env::GazeCase> cases);

// Mean absolute error over the batch and both coordinates.
double keypoint_loss(std::span<const float> predicted, std::span<const float> target);

struct SdlOptions {
  int epochs = 300;
  double learning_rate = 1e-4;
  int batch = 64;
  std::uint64_t seed = 7;
  int eval_every = 10;
  // Topology; defaults to the keypoint network for the case image size.
  std::optional<nn::NetworkConfig> network;

  void validate() const;
};

struct SdlEpoch {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_loss = 0.0;
  std::optional<double> test_accuracy;
};

struct SdlLog {
  std::vector<SdlEpoch> epochs;

  // epoch,train_loss,test_loss
  void write_loss_csv(std::ostream& out) const;
  // epoch,test_acc for the sampled epochs only.
  void write_accuracy_csv(std::ostream& out) const;
  std::vector<double> test_accuracy_samples() const;
};

// First 1-based epoch e where test_loss[e] > ratio * min(test_loss[1..e-1])
// while train_loss[e] is below the train loss at that minimum.
std::optional<int> detect_divergence(std::span<const double> train_loss,
                                     std::span<const double> test_loss, double ratio = 1.2);
std::optional<int> detect_divergence(const SdlLog& log, double ratio = 1.2);

struct SdlResult {
  nn::NetworkConfig config;
  nn::ParameterStore params;
  SdlLog log;
  std::optional<int> divergence_epoch;
  std::int64_t skipped_steps = 0;
};

// Mini-batch Adam on the keypoint MAE. The test set only feeds the loss log
// and accuracy samples; it never influences the weights. Throws NumericError
// on a non-finite loss.
SdlResult train_supervised(std::span<const env::GazeCase> train_set,
                           std::span<const env::GazeCase> test_set, const SdlOptions& options = {});

}  // namespace lesionrl::sdl
