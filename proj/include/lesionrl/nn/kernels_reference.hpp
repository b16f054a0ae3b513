#pragma once

#include <span>
#include <vector>

#include "lesionrl/nn/config.hpp"
#include "lesionrl/nn/params.hpp"

// Serial single-sample implementation with straightforward loops. It is the
// ground truth the parallel kernels are tested against, and in double
// precision it is the analytic side of the finite-difference gradient check.
namespace lesionrl::nn::reference {

template <typename T>
struct Activations {
  std::vector<T> input;
  std::vector<std::vector<T>> conv;  // post-ELU output of each conv layer (HWC)
  std::vector<T> hidden;             // post-ELU hidden dense layer
  std::vector<T> output;             // head output (linear or sigmoid)
};

// Single "same"-padded strided convolution, no activation.
template <typename T>
std::vector<T> conv2d(std::span<const T> input, const SpatialShape& in_shape,
                      const LayerParams<T>& layer, const SpatialShape& out_shape,
                      int kernel, int stride);

template <typename T>
Activations<T> forward(const BasicParameterStore<T>& params, const NetworkConfig& cfg,
                       std::span<const T> input);

// Gradient of a scalar loss whose derivative with respect to the network
// output is `output_grad`.
template <typename T>
BasicParameterStore<T> backward(const BasicParameterStore<T>& params, const NetworkConfig& cfg,
                                const Activations<T>& acts, std::span<const T> output_grad);

}  // namespace lesionrl::nn::reference
