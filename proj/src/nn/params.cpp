#include "lesionrl/nn/params.hpp"

#include <cmath>
#include <random>

#include "lesionrl/error.hpp"

namespace lesionrl::nn {

template <typename T>
std::size_t BasicParameterStore<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

template <typename T>
bool BasicParameterStore<T>::all_finite() const {
  bool ok = true;
  for_each([&](T v) { ok = ok && std::isfinite(v); });
  return ok;
}

template <typename T>
BasicParameterStore<T> zero_parameters(const NetworkConfig& cfg) {
  cfg.validate();
  BasicParameterStore<T> p;
  const auto shapes = cfg.conv_shapes();
  const int k2 = cfg.kernel_size * cfg.kernel_size;
  for (int l = 0; l < cfg.conv_layers; ++l) {
    const int cin = shapes[l].channels;
    const int cout = shapes[l + 1].channels;
    p.layers.push_back({std::vector<T>(static_cast<std::size_t>(k2) * cin * cout),
                        std::vector<T>(cout), k2 * cin, k2 * cout});
  }
  const auto flat = static_cast<int>(cfg.flattened_size());
  p.layers.push_back({std::vector<T>(static_cast<std::size_t>(flat) * cfg.hidden_units),
                      std::vector<T>(cfg.hidden_units), flat, cfg.hidden_units});
  p.layers.push_back(
      {std::vector<T>(static_cast<std::size_t>(cfg.hidden_units) * cfg.output_units()),
       std::vector<T>(cfg.output_units()), cfg.hidden_units, cfg.output_units()});
  return p;
}

template <typename T>
void check_shapes(const BasicParameterStore<T>& params, const NetworkConfig& cfg) {
  const auto expected = zero_parameters<T>(cfg);
  if (params.layers.size() != expected.layers.size()) {
    throw_dimension_mismatch("parameter layer count", expected.layers.size(), params.layers.size());
  }
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& got = params.layers[i];
    const auto& want = expected.layers[i];
    if (got.weight.size() != want.weight.size()) {
      throw_dimension_mismatch("layer " + std::to_string(i) + " weight size", want.weight.size(),
                               got.weight.size());
    }
    if (got.bias.size() != want.bias.size()) {
      throw_dimension_mismatch("layer " + std::to_string(i) + " bias size", want.bias.size(),
                               got.bias.size());
    }
  }
}

double glorot_limit(int fan_in, int fan_out) {
  if (fan_in <= 0 || fan_out <= 0) throw ConfigError("glorot_limit: fans must be positive");
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

ParameterStore glorot_init(const NetworkConfig& cfg, std::uint64_t seed) {
  ParameterStore p = zero_parameters<float>(cfg);
  std::mt19937_64 rng(seed);
  for (auto& layer : p.layers) {
    const double limit = glorot_limit(layer.fan_in, layer.fan_out);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& w : layer.weight) w = static_cast<float>(dist(rng));
  }
  return p;
}

std::size_t trunk_parameter_count(const NetworkConfig& cfg) {
  const auto p = zero_parameters<float>(cfg);
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < p.layers.size(); ++i) {
    n += p.layers[i].weight.size() + p.layers[i].bias.size();
  }
  return n;
}

template struct BasicParameterStore<float>;
template struct BasicParameterStore<double>;
template BasicParameterStore<float> zero_parameters<float>(const NetworkConfig&);
template BasicParameterStore<double> zero_parameters<double>(const NetworkConfig&);
template void check_shapes<float>(const BasicParameterStore<float>&, const NetworkConfig&);
template void check_shapes<double>(const BasicParameterStore<double>&, const NetworkConfig&);

}  // namespace lesionrl::nn
