#include "lesionrl/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lesionrl/error.hpp"

namespace lesionrl::data {
namespace {

constexpr double kPi = std::numbers::pi;

float quantize(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<float>(std::lround(clamped * 255.0)) / 255.0f;
}

struct Point {
  double x, y;
};

env::GazePoint to_pixel(Point p, int width, int height) {
  return {std::clamp(static_cast<int>(std::lround(p.x)), 0, width - 1),
          std::clamp(static_cast<int>(std::lround(p.y)), 0, height - 1)};
}

Image make_background(const SynthConfig& cfg, Rng& rng) {
  constexpr int kWaves = 4;
  std::uniform_real_distribution<double> freq(-2.0, 2.0);  // cycles per image
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> amp(0.5, 1.0);
  struct Wave {
    double u, v, phi, a;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < kWaves; ++k) waves.push_back({freq(rng), freq(rng), phase(rng), amp(rng)});

  std::vector<double> field(static_cast<std::size_t>(cfg.height) * cfg.width);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      double v = 0.0;
      for (const auto& w : waves) {
        v += w.a * std::cos(2.0 * kPi * (w.u * x / cfg.width + w.v * y / cfg.height) + w.phi);
      }
      field[static_cast<std::size_t>(y) * cfg.width + x] = v;
    }
  }
  const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
  const double span = std::max(*hi - *lo, 1e-12);
  const double range = std::min(cfg.texture_amplitude, cfg.background_max - cfg.background_min);
  std::uniform_real_distribution<double> level(cfg.background_min, cfg.background_max - range);
  const double base = range < cfg.background_max - cfg.background_min ? level(rng) : cfg.background_min;
  Image img(cfg.height, cfg.width, 1);
  for (std::size_t i = 0; i < field.size(); ++i) {
    img.data[i] = static_cast<float>(base + (field[i] - *lo) / span * range);
  }
  return img;
}

Ellipse make_lesion(const SynthConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> axis(cfg.axis_min, cfg.axis_max);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  Ellipse e;
  e.a = axis(rng);
  e.b = axis(rng);
  e.angle = angle(rng);
  const double c = std::cos(e.angle), s = std::sin(e.angle);
  const double ex = std::sqrt(e.a * e.a * c * c + e.b * e.b * s * s);
  const double ey = std::sqrt(e.a * e.a * s * s + e.b * e.b * c * c);
  std::uniform_real_distribution<double> cx(ex + 1.0, cfg.width - 2.0 - ex);
  std::uniform_real_distribution<double> cy(ey + 1.0, cfg.height - 2.0 - ey);
  e.cx = std::round(cx(rng));
  e.cy = std::round(cy(rng));
  return e;
}

Point random_unit(Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  const double t = angle(rng);
  return {std::cos(t), std::sin(t)};
}

// One attempt at a gaze walk; may miss the lesion, in which case the caller
// resamples.
std::vector<env::GazePoint> walk(const SynthConfig& cfg, const Mask& mask, const Ellipse& lesion,
                                 Rng& rng) {
  enum class Phase { kApproach, kDwell, kWander };
  std::uniform_real_distribution<double> ux(0.0, cfg.width - 1.0);
  std::uniform_real_distribution<double> uy(0.0, cfg.height - 1.0);
  std::uniform_int_distribution<int> step_len(cfg.step_min, cfg.step_max);
  std::uniform_int_distribution<int> dwell_len(cfg.dwell_min, cfg.dwell_max);
  std::uniform_int_distribution<int> jitter(-2, 2);
  constexpr double kPull = 0.7;

  std::vector<env::GazePoint> pts;
  pts.push_back(to_pixel({ux(rng), uy(rng)}, cfg.width, cfg.height));
  Phase phase = Phase::kApproach;
  int dwell_left = 0;
  while (static_cast<int>(pts.size()) < cfg.gaze_length) {
    const auto cur = pts.back();
    if (phase == Phase::kApproach && mask.at(cur.y, cur.x)) {
      phase = Phase::kDwell;
      dwell_left = dwell_len(rng) - 1;
    }
    if (phase == Phase::kDwell && dwell_left <= 0) phase = Phase::kWander;

    env::GazePoint next = cur;
    if (phase == Phase::kApproach) {
      const double dx = lesion.cx - cur.x, dy = lesion.cy - cur.y;
      const double dist = std::hypot(dx, dy);
      const Point r = random_unit(rng);
      Point dir{kPull * dx / std::max(dist, 1e-9) + (1.0 - kPull) * r.x,
                kPull * dy / std::max(dist, 1e-9) + (1.0 - kPull) * r.y};
      const double norm = std::max(std::hypot(dir.x, dir.y), 1e-9);
      const double len = std::min<double>(step_len(rng), std::max(dist, 1.0));
      next = to_pixel({cur.x + len * dir.x / norm, cur.y + len * dir.y / norm}, cfg.width,
                      cfg.height);
    } else if (phase == Phase::kDwell) {
      // Small fixational jitter that stays inside the lesion.
      bool moved = false;
      for (int attempt = 0; attempt < 32 && !moved; ++attempt) {
        const env::GazePoint cand{cur.x + jitter(rng), cur.y + jitter(rng)};
        if (cand == cur || !mask.contains(cand.x, cand.y) || !mask.at(cand.y, cand.x)) continue;
        next = cand;
        moved = true;
      }
      --dwell_left;
    } else {
      const Point r = random_unit(rng);
      const int len = step_len(rng);
      next = to_pixel({cur.x + len * r.x, cur.y + len * r.y}, cfg.width, cfg.height);
    }
    pts.push_back(next);
  }
  return pts;
}

int lesion_visits(const std::vector<env::GazePoint>& pts, const Mask& mask) {
  int n = 0;
  for (const auto& p : pts) n += mask.at(p.y, p.x) ? 1 : 0;
  return n;
}

}  // namespace

void SynthConfig::validate() const {
  if (height <= 0 || width <= 0) throw ConfigError("image size must be positive");
  if (!(axis_min > 0.0 && axis_min <= axis_max)) throw ConfigError("need 0 < axis_min <= axis_max");
  if (2.0 * axis_max + 4.0 > std::min(height, width)) {
    throw ConfigError("lesion (semi-axis up to " + std::to_string(axis_max) +
                      " px) does not fit inside a " + std::to_string(height) + "x" +
                      std::to_string(width) + " image");
  }
  if (!(background_min >= 0.0 && background_min <= background_max && background_max <= 1.0)) {
    throw ConfigError("background range must satisfy 0 <= min <= max <= 1");
  }
  if (!(texture_amplitude >= 0.0)) throw ConfigError("texture_amplitude must be non-negative");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
  if (gaze_length < 2) throw ConfigError("gaze_length must be at least 2");
  if (step_min < 1 || step_min > step_max) throw ConfigError("need 1 <= step_min <= step_max");
  if (min_lesion_visits < 1) throw ConfigError("min_lesion_visits must be at least 1");
  if (dwell_min < 1 || dwell_min > dwell_max) throw ConfigError("need 1 <= dwell_min <= dwell_max");
  if (min_lesion_visits > gaze_length) throw ConfigError("min_lesion_visits exceeds gaze_length");
}

bool Ellipse::contains(double x, double y) const {
  const double dx = x - cx, dy = y - cy;
  const double c = std::cos(angle), s = std::sin(angle);
  const double u = (dx * c + dy * s) / a;
  const double v = (-dx * s + dy * c) / b;
  return u * u + v * v <= 1.0;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

env::GazeCase generate_case(const SynthConfig& cfg, Rng& rng, std::string case_id) {
  cfg.validate();
  env::GazeCase c;
  c.case_id = std::move(case_id);
  Image img = make_background(cfg, rng);
  const Ellipse lesion = make_lesion(cfg, rng);
  c.lesion_mask = Mask(cfg.height, cfg.width);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      double v = img.at(y, x);
      if (lesion.contains(x, y)) {
        c.lesion_mask.set(y, x);
        v += cfg.lesion_offset;
      }
      if (cfg.noise_sigma > 0.0) v += noise(rng);
      img.at(y, x) = quantize(v);
    }
  }
  c.image = std::move(img);

  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto pts = walk(cfg, c.lesion_mask, lesion, rng);
    if (lesion_visits(pts, c.lesion_mask) >= cfg.min_lesion_visits) {
      c.gaze = std::move(pts);
      return c;
    }
  }
  throw ConfigError("could not simulate a gaze plot with " + std::to_string(cfg.min_lesion_visits) +
                    " lesion visits; gaze_length too short?");
}

std::vector<env::GazeCase> generate_dataset(const SynthConfig& cfg, int count) {
  cfg.validate();
  if (count <= 0) throw InputError("case count must be positive");
  std::vector<env::GazeCase> cases(count);
  std::vector<std::string> errors(count);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "case_%03d", i);
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    try {
      cases[i] = generate_case(cfg, rng, id);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ConfigError(e);
  }
  return cases;
}

}  // namespace lesionrl::data
