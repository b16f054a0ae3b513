#pragma once

#include <span>
#include <vector>

#include "lesionrl/image.hpp"
#include "lesionrl/nn/config.hpp"
#include "lesionrl/nn/params.hpp"

namespace lesionrl::nn {

// Activations of one batched forward pass, kept for the backward pass.
struct ForwardContext {
  NetworkConfig config;
  int batch = 0;
  std::vector<float> input;              // batch x input_size
  std::vector<std::vector<float>> conv;  // per conv layer: batch x shape
  std::vector<float> hidden;             // batch x hidden_units
  std::vector<float> output;             // batch x output_units

  bool empty() const { return batch == 0; }
  std::span<const float> output_of(int sample) const;
};

// Batched forward pass; `inputs` holds `batch` HWC images back to back and is
// moved into the returned context.
ForwardContext forward_batch(const ParameterStore& params, const NetworkConfig& cfg,
                             std::vector<float> inputs, int batch);

// Outputs only, batch x output_units.
std::vector<float> predict_batch(const ParameterStore& params, const NetworkConfig& cfg,
                                 std::vector<float> inputs, int batch);

// Single-input forward pass: Q-values (linear head) or (u, v) (sigmoid head).
std::vector<float> forward(const ParameterStore& params, const NetworkConfig& cfg,
                           const Image& input);

// Exact gradient of a scalar loss given dL/d(output) for every sample in
// the context (batch x output_units). Gradients are summed over the batch.
// Throws UsageError on an empty context.
GradientStore backward(const ParameterStore& params, const ForwardContext& ctx,
                       std::span<const float> output_grad);

}  // namespace lesionrl::nn
