#include "lesionrl/nn/kernels_reference.hpp"

#include <type_traits>

#include "lesionrl/error.hpp"
#include "lesionrl/nn/activations.hpp"

namespace lesionrl::nn::reference {
namespace {

// Accumulate float math in double; double stays double.
template <typename T>
using Acc = std::conditional_t<std::is_same_v<T, float>, double, T>;

std::size_t hwc(const SpatialShape& s, int y, int x, int c) {
  return (static_cast<std::size_t>(y) * s.width + x) * s.channels + c;
}

}  // namespace

template <typename T>
std::vector<T> conv2d(std::span<const T> input, const SpatialShape& in_shape,
                      const LayerParams<T>& layer, const SpatialShape& out_shape, int kernel,
                      int stride) {
  const int pad_y = same_padding_before(in_shape.height, kernel, stride);
  const int pad_x = same_padding_before(in_shape.width, kernel, stride);
  const int cin = in_shape.channels;
  const int cout = out_shape.channels;
  std::vector<T> out(static_cast<std::size_t>(out_shape.size()));
  for (int oy = 0; oy < out_shape.height; ++oy) {
    for (int ox = 0; ox < out_shape.width; ++ox) {
      for (int co = 0; co < cout; ++co) {
        Acc<T> acc = layer.bias[co];
        for (int ky = 0; ky < kernel; ++ky) {
          const int iy = oy * stride + ky - pad_y;
          if (iy < 0 || iy >= in_shape.height) continue;
          for (int kx = 0; kx < kernel; ++kx) {
            const int ix = ox * stride + kx - pad_x;
            if (ix < 0 || ix >= in_shape.width) continue;
            for (int ci = 0; ci < cin; ++ci) {
              const std::size_t w = ((static_cast<std::size_t>(ky) * kernel + kx) * cin + ci) * cout + co;
              acc += static_cast<Acc<T>>(input[hwc(in_shape, iy, ix, ci)]) * layer.weight[w];
            }
          }
        }
        out[hwc(out_shape, oy, ox, co)] = static_cast<T>(acc);
      }
    }
  }
  return out;
}

template <typename T>
Activations<T> forward(const BasicParameterStore<T>& params, const NetworkConfig& cfg,
                       std::span<const T> input) {
  check_shapes(params, cfg);
  if (static_cast<long long>(input.size()) != cfg.input_size()) {
    throw_dimension_mismatch("network input size", cfg.input_size(), input.size());
  }
  const auto shapes = cfg.conv_shapes();
  Activations<T> acts;
  acts.input.assign(input.begin(), input.end());

  std::span<const T> current = acts.input;
  for (int l = 0; l < cfg.conv_layers; ++l) {
    auto out = conv2d<T>(current, shapes[l], params.layers[l], shapes[l + 1], cfg.kernel_size,
                         cfg.stride);
    for (auto& v : out) v = elu(v);
    acts.conv.push_back(std::move(out));
    current = acts.conv.back();
  }

  const auto& fc = params.layers[cfg.conv_layers];
  const std::size_t flat = current.size();
  acts.hidden.resize(cfg.hidden_units);
  for (int h = 0; h < cfg.hidden_units; ++h) {
    Acc<T> acc = fc.bias[h];
    for (std::size_t i = 0; i < flat; ++i) {
      acc += static_cast<Acc<T>>(current[i]) * fc.weight[i * cfg.hidden_units + h];
    }
    acts.hidden[h] = elu(static_cast<T>(acc));
  }

  const auto& head = params.layers[cfg.conv_layers + 1];
  const int outputs = cfg.output_units();
  acts.output.resize(outputs);
  for (int o = 0; o < outputs; ++o) {
    Acc<T> acc = head.bias[o];
    for (int h = 0; h < cfg.hidden_units; ++h) {
      acc += static_cast<Acc<T>>(acts.hidden[h]) * head.weight[static_cast<std::size_t>(h) * outputs + o];
    }
    const T z = static_cast<T>(acc);
    acts.output[o] = cfg.head == Head::kKeypoint ? sigmoid(z) : z;
  }
  return acts;
}

template <typename T>
BasicParameterStore<T> backward(const BasicParameterStore<T>& params, const NetworkConfig& cfg,
                                const Activations<T>& acts, std::span<const T> output_grad) {
  check_shapes(params, cfg);
  if (acts.output.empty() || static_cast<int>(acts.conv.size()) != cfg.conv_layers) {
    throw UsageError("backward called without a matching forward pass");
  }
  const int outputs = cfg.output_units();
  if (static_cast<int>(output_grad.size()) != outputs) {
    throw_dimension_mismatch("output gradient size", outputs, output_grad.size());
  }
  auto grads = zero_parameters<T>(cfg);
  const auto shapes = cfg.conv_shapes();

  // Head.
  std::vector<T> dz(outputs);
  for (int o = 0; o < outputs; ++o) {
    const T y = acts.output[o];
    dz[o] = cfg.head == Head::kKeypoint ? output_grad[o] * y * (T(1) - y) : output_grad[o];
  }
  auto& ghead = grads.layers[cfg.conv_layers + 1];
  const auto& head = params.layers[cfg.conv_layers + 1];
  std::vector<T> dhidden(cfg.hidden_units);
  for (int h = 0; h < cfg.hidden_units; ++h) {
    Acc<T> acc = 0;
    for (int o = 0; o < outputs; ++o) {
      const std::size_t w = static_cast<std::size_t>(h) * outputs + o;
      ghead.weight[w] = acts.hidden[h] * dz[o];
      acc += static_cast<Acc<T>>(head.weight[w]) * dz[o];
    }
    dhidden[h] = static_cast<T>(acc) * elu_grad_from_output(acts.hidden[h]);
  }
  for (int o = 0; o < outputs; ++o) ghead.bias[o] = dz[o];

  // Hidden dense layer.
  const auto& fc = params.layers[cfg.conv_layers];
  auto& gfc = grads.layers[cfg.conv_layers];
  const auto& flat_in = acts.conv.back();
  std::vector<T> dflat(flat_in.size());
  for (std::size_t i = 0; i < flat_in.size(); ++i) {
    Acc<T> acc = 0;
    for (int h = 0; h < cfg.hidden_units; ++h) {
      const std::size_t w = i * cfg.hidden_units + h;
      gfc.weight[w] = flat_in[i] * dhidden[h];
      acc += static_cast<Acc<T>>(fc.weight[w]) * dhidden[h];
    }
    dflat[i] = static_cast<T>(acc);
  }
  for (int h = 0; h < cfg.hidden_units; ++h) gfc.bias[h] = dhidden[h];

  // Conv stack, last to first. `dout` holds dL/d(post-activation output).
  std::vector<T> dout = std::move(dflat);
  const int k = cfg.kernel_size;
  for (int l = cfg.conv_layers - 1; l >= 0; --l) {
    const auto& in_shape = shapes[l];
    const auto& out_shape = shapes[l + 1];
    const auto& out_act = acts.conv[l];
    const std::vector<T>& in_act = l == 0 ? acts.input : acts.conv[l - 1];
    const auto& layer = params.layers[l];
    auto& glayer = grads.layers[l];
    const int pad_y = same_padding_before(in_shape.height, k, cfg.stride);
    const int pad_x = same_padding_before(in_shape.width, k, cfg.stride);
    const int cin = in_shape.channels;
    const int cout = out_shape.channels;

    std::vector<T> dpre(dout.size());
    for (std::size_t i = 0; i < dout.size(); ++i) dpre[i] = dout[i] * elu_grad_from_output(out_act[i]);

    std::vector<Acc<T>> gw(layer.weight.size(), 0), gb(cout, 0);
    std::vector<Acc<T>> din(l > 0 ? in_act.size() : 0, 0);
    for (int oy = 0; oy < out_shape.height; ++oy) {
      for (int ox = 0; ox < out_shape.width; ++ox) {
        for (int co = 0; co < cout; ++co) {
          const Acc<T> g = dpre[hwc(out_shape, oy, ox, co)];
          if (g == 0) continue;
          gb[co] += g;
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * cfg.stride + ky - pad_y;
            if (iy < 0 || iy >= in_shape.height) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * cfg.stride + kx - pad_x;
              if (ix < 0 || ix >= in_shape.width) continue;
              for (int ci = 0; ci < cin; ++ci) {
                const std::size_t w = ((static_cast<std::size_t>(ky) * k + kx) * cin + ci) * cout + co;
                const std::size_t in_idx = hwc(in_shape, iy, ix, ci);
                gw[w] += g * in_act[in_idx];
                if (l > 0) din[in_idx] += g * layer.weight[w];
              }
            }
          }
        }
      }
    }
    for (std::size_t i = 0; i < gw.size(); ++i) glayer.weight[i] = static_cast<T>(gw[i]);
    for (int co = 0; co < cout; ++co) glayer.bias[co] = static_cast<T>(gb[co]);
    if (l > 0) dout.assign(din.begin(), din.end());
  }
  return grads;
}

template std::vector<float> conv2d<float>(std::span<const float>, const SpatialShape&,
                                          const LayerParams<float>&, const SpatialShape&, int, int);
template std::vector<double> conv2d<double>(std::span<const double>, const SpatialShape&,
                                            const LayerParams<double>&, const SpatialShape&, int,
                                            int);
template Activations<float> forward<float>(const BasicParameterStore<float>&, const NetworkConfig&,
                                           std::span<const float>);
template Activations<double> forward<double>(const BasicParameterStore<double>&,
                                             const NetworkConfig&, std::span<const double>);
template BasicParameterStore<float> backward<float>(const BasicParameterStore<float>&,
                                                    const NetworkConfig&, const Activations<float>&,
                                                    std::span<const float>);
template BasicParameterStore<double> backward<double>(const BasicParameterStore<double>&,
                                                      const NetworkConfig&,
                                                      const Activations<double>&,
                                                      std::span<const double>);

}  // namespace lesionrl::nn::reference
