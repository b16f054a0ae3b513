#include "lesionrl/env/renderer.hpp"

#include <algorithm>

#include "lesionrl/error.hpp"

namespace lesionrl::env {

StateRenderer::StateRenderer(std::span<const GazeCase> cases, OverlayConfig overlay)
    : cases_(cases), overlay_(overlay) {
  if (cases.empty()) throw InputError("StateRenderer needs at least one case");
  height_ = cases.front().image.height;
  width_ = cases.front().image.width;
  for (const auto& c : cases) {
    if (c.image.height != height_ || c.image.width != width_) {
      throw ValidationError("case '" + c.case_id + "' has size " + std::to_string(c.image.height) +
                            "x" + std::to_string(c.image.width) + ", expected " +
                            std::to_string(height_) + "x" + std::to_string(width_));
    }
    validate_case(c, false);
  }
  layers_.resize(cases.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < cases.size(); ++i) layers_[i] = render_gaze_layer(cases[i], overlay);
}

Image StateRenderer::render(StateRef s) const {
  if (s.case_index < 0 || s.case_index >= case_count()) {
    throw StateError("case index " + std::to_string(s.case_index) + " out of range");
  }
  Image rgb = layers_[s.case_index];
  draw_agent(rgb, cases_[s.case_index], s.gaze_index, overlay_);
  return rgb;
}

void StateRenderer::render_batch(std::span<const StateRef> states, std::vector<float>& out) const {
  // Validate up front; nothing may throw inside the parallel region.
  for (const auto& s : states) {
    if (s.case_index < 0 || s.case_index >= case_count() || s.gaze_index < 0 ||
        s.gaze_index >= cases_[s.case_index].gaze_count()) {
      throw StateError("state (" + std::to_string(s.case_index) + ", " +
                       std::to_string(s.gaze_index) + ") out of range");
    }
  }
  const std::size_t base = out.size();
  const std::size_t n = state_size();
  out.resize(base + n * states.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Image rgb = render(states[i]);
    std::copy(rgb.data.begin(), rgb.data.end(), out.begin() + static_cast<std::ptrdiff_t>(base + i * n));
  }
}

}  // namespace lesionrl::env
