#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lesionrl/env/environment.hpp"

namespace lesionrl::data {

using Rng = std::mt19937_64;

// Synthetic phantom: smooth low-frequency background, one bright elliptical
// lesion, and a gaze plot simulated as a bounded random walk that drifts
// toward the lesion, fixates inside it for a few points, then wanders off.
// Intensities are quantized to multiples of 1/255 so a case survives an
// 8-bit save/load unchanged.
struct SynthConfig {
  int height = 128;
  int width = 128;
  double axis_min = 6.0;  // lesion semi-axis range, pixels
  double axis_max = 20.0;
  double lesion_offset = 0.3;  // added to the background inside the lesion
  double background_min = 0.2;
  double background_max = 0.6;
  // Peak-to-peak span of the texture; each image places it at a random
  // level inside [background_min, background_max].
  double texture_amplitude = 0.4;
  double noise_sigma = 0.02;
  int gaze_length = 40;
  int step_min = 1;  // random-walk step length range, pixels
  int step_max = 8;
  int min_lesion_visits = 1;
  int dwell_min = 3;  // fixations inside the lesion once reached
  int dwell_max = 6;
  std::uint64_t seed = 7;

  // Throws ConfigError for impossible settings (lesion larger than image,
  // empty ranges, fewer than two gaze points).
  void validate() const;
};

struct Ellipse {
  double cx = 0, cy = 0;
  double a = 0, b = 0;  // semi-axes
  double angle = 0;     // radians

  bool contains(double x, double y) const;
};

env::GazeCase generate_case(const SynthConfig& cfg, Rng& rng, std::string case_id);

// Case i is generated from its own stream derived from (cfg.seed, i), so the
// set is identical however it is generated. Ids are "case_000", "case_001"...
std::vector<env::GazeCase> generate_dataset(const SynthConfig& cfg, int count);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lesionrl::data
