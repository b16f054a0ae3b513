#include "lesionrl/env/environment.hpp"

#include <algorithm>
#include <vector>

#include "lesionrl/error.hpp"

namespace lesionrl::env {
namespace {

void check_index(const GazeCase& c, int index) {
  if (index < 0 || index >= c.gaze_count()) {
    throw StateError("gaze index " + std::to_string(index) + " outside [0, " +
                     std::to_string(c.gaze_count()) + ") for case '" + c.case_id + "'");
  }
}

void blend(Image& rgb, int y, int x, const std::array<float, 3>& color, float alpha) {
  for (int ch = 0; ch < 3; ++ch) {
    float& v = rgb.at(y, x, ch);
    v = std::clamp((1.0f - alpha) * v + alpha * color[ch], 0.0f, 1.0f);
  }
}

constexpr std::array<float, 3> kRed = {1.0f, 0.0f, 0.0f};
constexpr std::array<float, 3> kBlue = {0.0f, 0.0f, 1.0f};

}  // namespace

std::string to_string(Action a) {
  switch (a) {
    case Action::kAnterograde:
      return "anterograde";
    case Action::kStill:
      return "still";
    case Action::kRetrograde:
      return "retrograde";
  }
  return "?";
}

double reward_for(bool inside_lesion, Action effective) {
  switch (effective) {
    case Action::kStill:
      return inside_lesion ? 2.0 : -4.0;
    case Action::kRetrograde:
      return inside_lesion ? 0.5 : -1.5;
    case Action::kAnterograde:
      return inside_lesion ? 0.5 : -0.5;
  }
  throw StateError("unknown action");
}

void validate_case(const GazeCase& c, bool require_lesion_visit) {
  const std::string who = "case '" + c.case_id + "': ";
  if (c.image.channels != 1) throw ValidationError(who + "image must be single channel");
  if (c.image.height <= 0 || c.image.width <= 0) throw ValidationError(who + "empty image");
  if (static_cast<long long>(c.image.data.size()) !=
      static_cast<long long>(c.image.height) * c.image.width) {
    throw ValidationError(who + "image buffer size does not match its dimensions");
  }
  if (c.lesion_mask.height != c.image.height || c.lesion_mask.width != c.image.width) {
    throw ValidationError(who + "mask geometry differs from image");
  }
  if (c.lesion_mask.empty()) throw ValidationError(who + "lesion mask is empty");
  if (c.gaze_count() < 2) throw ValidationError(who + "gaze plot needs at least 2 points");
  bool visited = false;
  for (std::size_t i = 0; i < c.gaze.size(); ++i) {
    const auto& g = c.gaze[i];
    if (!c.image.contains(g.x, g.y)) {
      throw ValidationError(who + "gaze point " + std::to_string(i) + " (" + std::to_string(g.x) +
                            "," + std::to_string(g.y) + ") outside the image");
    }
    visited = visited || c.lesion_mask.at(g.y, g.x);
  }
  if (require_lesion_visit && !visited) {
    throw ValidationError(who + "no gaze point falls inside the lesion");
  }
}

bool in_lesion(const GazeCase& c, int index) {
  check_index(c, index);
  const auto& g = c.gaze[index];
  return c.lesion_mask.at(g.y, g.x);
}

StepResult step(const GazeCase& c, int index, Action action) {
  check_index(c, index);
  const int last = c.gaze_count() - 1;
  StepResult r;
  r.effective_action = action;
  switch (action) {
    case Action::kAnterograde:
      r.next_index = index + 1;
      break;
    case Action::kStill:
      r.next_index = index;
      break;
    case Action::kRetrograde:
      r.next_index = index - 1;
      break;
  }
  if (r.next_index < 0 || r.next_index > last) {
    r.next_index = index;
    r.effective_action = Action::kStill;
  }
  r.reward = reward_for(in_lesion(c, index), r.effective_action);
  return r;
}

int episode_length(const GazeCase& c) { return c.gaze_count(); }

Image render_gaze_layer(const GazeCase& c, const OverlayConfig& overlay) {
  Image rgb = replicate_channels(c.image, 3);
  // Each gaze pixel is blended once even when fixations repeat.
  std::vector<std::uint8_t> marked(rgb.pixel_count(), 0);
  for (const auto& g : c.gaze) {
    if (!rgb.contains(g.x, g.y)) continue;
    auto& m = marked[static_cast<std::size_t>(g.y) * rgb.width + g.x];
    if (m) continue;
    m = 1;
    blend(rgb, g.y, g.x, kRed, overlay.alpha);
  }
  return rgb;
}

void draw_agent(Image& rgb, const GazeCase& c, int index, const OverlayConfig& overlay) {
  check_index(c, index);
  const auto& g = c.gaze[index];
  const int lo = overlay.agent_square / 2;
  const int y0 = std::max(0, g.y - lo);
  const int x0 = std::max(0, g.x - lo);
  const int y1 = std::min(rgb.height, g.y - lo + overlay.agent_square);
  const int x1 = std::min(rgb.width, g.x - lo + overlay.agent_square);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) blend(rgb, y, x, kBlue, overlay.alpha);
  }
}

Image render_state(const GazeCase& c, int index, const OverlayConfig& overlay) {
  check_index(c, index);
  Image rgb = render_gaze_layer(c, overlay);
  draw_agent(rgb, c, index, overlay);
  return rgb;
}

}  // namespace lesionrl::env
