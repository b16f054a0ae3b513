#pragma once

#include <cmath>

namespace lesionrl::nn {

// ELU with alpha = 1.
template <typename T>
inline T elu(T x) {
  return x > T(0) ? x : std::expm1(x);
}

// Derivative of ELU expressed through its output y = elu(x): 1 for x > 0,
// e^x = y + 1 otherwise.
template <typename T>
inline T elu_grad_from_output(T y) {
  return y > T(0) ? T(1) : y + T(1);
}

template <typename T>
inline T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace lesionrl::nn
