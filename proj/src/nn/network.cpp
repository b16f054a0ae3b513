#include "lesionrl/nn/network.hpp"

#include "lesionrl/error.hpp"
#include "lesionrl/nn/kernels_parallel.hpp"

namespace lesionrl::nn {

namespace {

kernels::Activation head_activation(const NetworkConfig& cfg) {
  return cfg.head == Head::kKeypoint ? kernels::Activation::kSigmoid : kernels::Activation::kLinear;
}

}  // namespace

std::span<const float> ForwardContext::output_of(int sample) const {
  const int n = config.output_units();
  return std::span<const float>(output).subspan(static_cast<std::size_t>(sample) * n, n);
}

ForwardContext forward_batch(const ParameterStore& params, const NetworkConfig& cfg,
                             std::vector<float> inputs, int batch) {
  check_shapes(params, cfg);
  if (batch <= 0) throw DimensionError("forward_batch: batch must be positive");
  if (static_cast<long long>(inputs.size()) != cfg.input_size() * batch) {
    throw_dimension_mismatch("forward_batch input size", cfg.input_size() * batch, inputs.size());
  }
  ForwardContext ctx;
  ctx.config = cfg;
  ctx.batch = batch;
  ctx.input = std::move(inputs);
  const auto shapes = cfg.conv_shapes();
  ctx.conv.resize(cfg.conv_layers);
  for (int l = 0; l < cfg.conv_layers; ++l) {
    ctx.conv[l].resize(static_cast<std::size_t>(shapes[l + 1].size()) * batch);
    std::span<const float> in = l == 0 ? std::span<const float>(ctx.input) : ctx.conv[l - 1];
    kernels::conv_elu_forward(in, shapes[l], params.layers[l], shapes[l + 1], cfg.kernel_size,
                              cfg.stride, batch, ctx.conv[l]);
  }
  ctx.hidden.resize(static_cast<std::size_t>(cfg.hidden_units) * batch);
  kernels::dense_forward(ctx.conv.back(), params.layers[cfg.conv_layers], batch,
                         kernels::Activation::kElu, ctx.hidden);
  ctx.output.resize(static_cast<std::size_t>(cfg.output_units()) * batch);
  kernels::dense_forward(ctx.hidden, params.layers[cfg.conv_layers + 1], batch,
                         head_activation(cfg), ctx.output);
  return ctx;
}

std::vector<float> predict_batch(const ParameterStore& params, const NetworkConfig& cfg,
                                 std::vector<float> inputs, int batch) {
  return forward_batch(params, cfg, std::move(inputs), batch).output;
}

std::vector<float> forward(const ParameterStore& params, const NetworkConfig& cfg,
                           const Image& input) {
  if (input.height != cfg.input_height || input.width != cfg.input_width ||
      input.channels != cfg.input_channels) {
    throw DimensionError("forward: input image " + std::to_string(input.height) + "x" +
                         std::to_string(input.width) + "x" + std::to_string(input.channels) +
                         " does not match network input " + std::to_string(cfg.input_height) +
                         "x" + std::to_string(cfg.input_width) + "x" +
                         std::to_string(cfg.input_channels));
  }
  return predict_batch(params, cfg, input.data, 1);
}

GradientStore backward(const ParameterStore& params, const ForwardContext& ctx,
                       std::span<const float> output_grad) {
  if (ctx.empty()) throw UsageError("backward called without a forward context");
  const NetworkConfig& cfg = ctx.config;
  check_shapes(params, cfg);
  const int batch = ctx.batch;
  if (static_cast<long long>(output_grad.size()) !=
      static_cast<long long>(cfg.output_units()) * batch) {
    throw_dimension_mismatch("output gradient size",
                             static_cast<long long>(cfg.output_units()) * batch,
                             output_grad.size());
  }
  GradientStore grads;
  grads.layers.resize(params.layers.size());

  std::vector<float> dhidden(ctx.hidden.size());
  kernels::dense_backward(ctx.hidden, params.layers[cfg.conv_layers + 1], ctx.output, output_grad,
                          batch, head_activation(cfg), grads.layers[cfg.conv_layers + 1], dhidden);
  std::vector<float> dflat(ctx.conv.back().size());
  kernels::dense_backward(ctx.conv.back(), params.layers[cfg.conv_layers], ctx.hidden, dhidden,
                          batch, kernels::Activation::kElu, grads.layers[cfg.conv_layers], dflat);

  const auto shapes = cfg.conv_shapes();
  std::vector<float> dout = std::move(dflat);
  for (int l = cfg.conv_layers - 1; l >= 0; --l) {
    std::span<const float> in = l == 0 ? std::span<const float>(ctx.input) : ctx.conv[l - 1];
    std::vector<float> din(l > 0 ? in.size() : 0);
    kernels::conv_elu_backward(in, shapes[l], params.layers[l], ctx.conv[l], dout, shapes[l + 1],
                               cfg.kernel_size, cfg.stride, batch, grads.layers[l], din);
    dout = std::move(din);
  }
  return grads;
}

}  // namespace lesionrl::nn
