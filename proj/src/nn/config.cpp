#include "lesionrl/nn/config.hpp"

#include "lesionrl/error.hpp"

namespace lesionrl::nn {

std::string to_string(Head head) {
  return head == Head::kQValues ? "q_values" : "keypoint";
}

Head head_from_string(const std::string& name) {
  if (name == "q_values") return Head::kQValues;
  if (name == "keypoint") return Head::kKeypoint;
  throw ConfigError("unknown network head '" + name + "'");
}

void NetworkConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw ConfigError(std::string("network config: ") + what + " must be positive");
  };
  positive(input_height, "input_height");
  positive(input_width, "input_width");
  positive(input_channels, "input_channels");
  positive(conv_layers, "conv_layers");
  positive(kernel_size, "kernel_size");
  positive(stride, "stride");
  positive(filters, "filters");
  positive(hidden_units, "hidden_units");
}

std::vector<SpatialShape> NetworkConfig::conv_shapes() const {
  std::vector<SpatialShape> shapes;
  shapes.reserve(conv_layers + 1);
  shapes.push_back({input_height, input_width, input_channels});
  for (int l = 0; l < conv_layers; ++l) {
    const auto& prev = shapes.back();
    shapes.push_back({same_output_size(prev.height, stride),
                      same_output_size(prev.width, stride), filters});
  }
  return shapes;
}

long long NetworkConfig::flattened_size() const { return conv_shapes().back().size(); }

NetworkConfig NetworkConfig::q_network(int height, int width) {
  NetworkConfig cfg;
  cfg.input_height = height;
  cfg.input_width = width;
  cfg.head = Head::kQValues;
  return cfg;
}

NetworkConfig NetworkConfig::keypoint_network(int height, int width) {
  NetworkConfig cfg = q_network(height, width);
  cfg.head = Head::kKeypoint;
  return cfg;
}

}  // namespace lesionrl::nn
