#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lesionrl::nn {

// Output head. The trunk (conv stack + hidden dense layer) is shared.
enum class Head {
  kQValues,   // 3 linear outputs, one Q-value per action
  kKeypoint,  // 2 sigmoid outputs, normalized (u, v) coordinates
};

std::string to_string(Head head);
Head head_from_string(const std::string& name);

struct SpatialShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  long long size() const { return static_cast<long long>(height) * width * channels; }
  bool operator==(const SpatialShape&) const = default;
};

// Topology of the convolutional network: `conv_layers` blocks of
// kernel_size x kernel_size convolutions with "same" padding and the given
// stride, ELU after each, then one ELU dense layer and the head.
struct NetworkConfig {
  int input_height = 128;
  int input_width = 128;
  int input_channels = 3;
  int conv_layers = 4;
  int kernel_size = 3;
  int stride = 2;
  int filters = 32;
  int hidden_units = 512;
  Head head = Head::kQValues;

  int output_units() const { return head == Head::kQValues ? 3 : 2; }

  // Throws ConfigError on zero/negative dimensions.
  void validate() const;

  // Input shape followed by the output shape of every conv layer.
  std::vector<SpatialShape> conv_shapes() const;
  long long flattened_size() const;
  long long input_size() const {
    return static_cast<long long>(input_height) * input_width * input_channels;
  }

  static NetworkConfig q_network(int height, int width);
  static NetworkConfig keypoint_network(int height, int width);

  bool operator==(const NetworkConfig&) const = default;
};

// Spatial output length of a strided "same" convolution: ceil(in / stride).
constexpr int same_output_size(int in, int stride) { return (in + stride - 1) / stride; }

// Padding applied before the first row/column for a "same" convolution.
// Total padding is split with the extra pixel at the end.
constexpr int same_padding_before(int in, int kernel, int stride) {
  const int out = same_output_size(in, stride);
  const int total = (out - 1) * stride + kernel - in;
  return total > 0 ? total / 2 : 0;
}

}  // namespace lesionrl::nn
