#pragma once

#include <cstdint>
#include <vector>

#include "lesionrl/nn/params.hpp"

namespace lesionrl::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moment estimates persist across step() calls.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update. Returns false, leaving parameters and moments
  // untouched, when any gradient is non-finite.
  bool step(ParameterStore& params, const GradientStore& grads);

  std::int64_t steps_taken() const { return t_; }
  std::int64_t steps_skipped() const { return skipped_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::int64_t skipped_ = 0;
  std::vector<float> m_;
  std::vector<float> v_;
};

}  // namespace lesionrl::nn
