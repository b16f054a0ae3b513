#pragma once

#include <random>
#include <vector>

#include "lesionrl/env/environment.hpp"
#include "lesionrl/nn/config.hpp"

namespace testing {

// Small case: uniform gray image, square lesion [lx0, lx1] x [ly0, ly1],
// gaze points along row `row` at the given columns.
inline lesionrl::env::GazeCase make_case(int size, int lx0, int lx1, int ly0, int ly1,
                                         const std::vector<lesionrl::env::GazePoint>& gaze,
                                         float gray = 0.4f) {
  lesionrl::env::GazeCase c;
  c.case_id = "fixture";
  c.image = lesionrl::Image(size, size, 1, gray);
  c.lesion_mask = lesionrl::Mask(size, size);
  for (int y = ly0; y <= ly1; ++y) {
    for (int x = lx0; x <= lx1; ++x) c.lesion_mask.set(y, x);
  }
  c.gaze = gaze;
  return c;
}

inline lesionrl::nn::NetworkConfig tiny_config(int size, int conv_layers, int filters, int hidden,
                                               lesionrl::nn::Head head) {
  lesionrl::nn::NetworkConfig cfg;
  cfg.input_height = size;
  cfg.input_width = size;
  cfg.conv_layers = conv_layers;
  cfg.filters = filters;
  cfg.hidden_units = hidden;
  cfg.head = head;
  return cfg;
}

template <class T>
std::vector<T> random_vector(std::size_t n, std::uint64_t seed, T lo = 0, T hi = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(rng));
  return v;
}

}  // namespace testing
