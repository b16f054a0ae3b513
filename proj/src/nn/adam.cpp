#include "lesionrl/nn/adam.hpp"

#include <cmath>

#include "lesionrl/error.hpp"

namespace lesionrl::nn {

bool Adam::step(ParameterStore& params, const GradientStore& grads) {
  if (params.layers.size() != grads.layers.size()) {
    throw_dimension_mismatch("adam: gradient layer count", params.layers.size(),
                             grads.layers.size());
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    if (params.layers[l].weight.size() != grads.layers[l].weight.size() ||
        params.layers[l].bias.size() != grads.layers[l].bias.size()) {
      throw DimensionError("adam: gradient shape differs from parameters at layer " +
                           std::to_string(l));
    }
  }
  if (!grads.all_finite()) {
    ++skipped_;
    return false;
  }
  const std::size_t n = params.parameter_count();
  if (m_.empty()) {
    m_.assign(n, 0.0f);
    v_.assign(n, 0.0f);
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;

  std::size_t i = 0;
  auto update = [&](float& p, float g) {
    const double m = b1 * m_[i] + (1.0 - b1) * g;
    const double v = b2 * v_[i] + (1.0 - b2) * static_cast<double>(g) * g;
    m_[i] = static_cast<float>(m);
    v_[i] = static_cast<float>(v);
    p = static_cast<float>(p - lr * (m / correction1) / (std::sqrt(v / correction2) + eps));
    ++i;
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& pl = params.layers[l];
    const auto& gl = grads.layers[l];
    for (std::size_t k = 0; k < pl.weight.size(); ++k) update(pl.weight[k], gl.weight[k]);
    for (std::size_t k = 0; k < pl.bias.size(); ++k) update(pl.bias[k], gl.bias[k]);
  }
  return true;
}

}  // namespace lesionrl::nn
