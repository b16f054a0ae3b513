#pragma once

#include <cstdint>
#include <vector>

#include "lesionrl/nn/config.hpp"

namespace lesionrl::nn {

// Weights and bias of one layer.
//
// Conv weights are laid out [ky][kx][in_channel][out_channel]; dense weights
// are [input][output]. Inputs to the first dense layer are the last conv
// activation flattened in HWC order.
template <typename T>
struct LayerParams {
  std::vector<T> weight;
  std::vector<T> bias;
  int fan_in = 0;
  int fan_out = 0;

  bool operator==(const LayerParams&) const = default;
};

// Ordered parameter set: conv_layers conv layers, the hidden dense layer, then
// the output layer. The ordering is also the serialization order.
template <typename T>
struct BasicParameterStore {
  std::vector<LayerParams<T>> layers;

  std::size_t parameter_count() const;
  bool all_finite() const;

  // Visits every scalar in serialization order.
  template <typename F>
  void for_each(F&& f) {
    for (auto& layer : layers) {
      for (auto& w : layer.weight) f(w);
      for (auto& b : layer.bias) f(b);
    }
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& layer : layers) {
      for (const auto& w : layer.weight) f(w);
      for (const auto& b : layer.bias) f(b);
    }
  }

  template <typename U>
  BasicParameterStore<U> cast() const {
    BasicParameterStore<U> out;
    out.layers.reserve(layers.size());
    for (const auto& l : layers) {
      out.layers.push_back({std::vector<U>(l.weight.begin(), l.weight.end()),
                            std::vector<U>(l.bias.begin(), l.bias.end()), l.fan_in, l.fan_out});
    }
    return out;
  }

  bool operator==(const BasicParameterStore&) const = default;
};

using ParameterStore = BasicParameterStore<float>;
// Gradients share the parameter layout.
using GradientStore = BasicParameterStore<float>;

// All-zero store shaped for `cfg`.
template <typename T>
BasicParameterStore<T> zero_parameters(const NetworkConfig& cfg);

// Throws DimensionError unless every layer matches `cfg`.
template <typename T>
void check_shapes(const BasicParameterStore<T>& params, const NetworkConfig& cfg);

// Glorot-uniform weights in [-L, L], L = sqrt(6 / (fan_in + fan_out)), and
// zero biases. Conv fans count the receptive field: k*k*in and k*k*out.
ParameterStore glorot_init(const NetworkConfig& cfg, std::uint64_t seed);

double glorot_limit(int fan_in, int fan_out);

// Number of trunk parameters (conv stack + hidden dense layer).
std::size_t trunk_parameter_count(const NetworkConfig& cfg);

}  // namespace lesionrl::nn
