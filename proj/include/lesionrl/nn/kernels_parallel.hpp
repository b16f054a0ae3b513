#pragma once

#include <span>

#include "lesionrl/nn/config.hpp"
#include "lesionrl/nn/params.hpp"

// Batched float kernels used for training and inference. Samples are
// processed in parallel with OpenMP; convolutions are lowered to
// im2col + GEMM per sample. Gradient reductions are split into fixed-size
// sample chunks that are summed in chunk order, so results do not depend on
// the number of threads.
namespace lesionrl::nn::kernels {

enum class Activation { kLinear, kElu, kSigmoid };

// Samples per gradient-accumulation chunk.
inline constexpr int kChunkSamples = 4;

// out[b] = elu(conv(in[b])) for every sample b. `in` is batch x in_shape,
// `out` is batch x out_shape.
void conv_elu_forward(std::span<const float> in, const SpatialShape& in_shape,
                      const LayerParams<float>& layer, const SpatialShape& out_shape, int kernel,
                      int stride, int batch, std::span<float> out);

// Backward through elu(conv(.)). `dout` is dL/d(out). Writes (overwrites)
// the layer's weight and bias gradients and, when `din` is non-empty,
// dL/d(in).
void conv_elu_backward(std::span<const float> in, const SpatialShape& in_shape,
                       const LayerParams<float>& layer, std::span<const float> out,
                       std::span<const float> dout, const SpatialShape& out_shape, int kernel,
                       int stride, int batch, LayerParams<float>& grad, std::span<float> din);

// out = act(in * W + b) with in: batch x fan_in, out: batch x fan_out.
void dense_forward(std::span<const float> in, const LayerParams<float>& layer, int batch,
                   Activation act, std::span<float> out);

// Backward through act(in * W + b). `out` are the forward outputs.
void dense_backward(std::span<const float> in, const LayerParams<float>& layer,
                    std::span<const float> out, std::span<const float> dout, int batch,
                    Activation act, LayerParams<float>& grad, std::span<float> din);

// Vectorized in-place ELU.
void elu_inplace(std::span<float> values);

}  // namespace lesionrl::nn::kernels
