#pragma once

#include <span>
#include <vector>

#include "lesionrl/env/environment.hpp"

namespace lesionrl::env {

// Compact state descriptor: which case, and where on its gaze plot.
struct StateRef {
  int case_index = 0;
  int gaze_index = 0;

  auto operator<=>(const StateRef&) const = default;
};

// Renders states for a fixed set of cases. The gaze layer of each case is
// computed once; rendering a state copies it and blends the agent square.
// Output is identical to render_state().
class StateRenderer {
 public:
  StateRenderer(std::span<const GazeCase> cases, OverlayConfig overlay);

  // Appends the HWC pixels of each state to `out`.
  void render_batch(std::span<const StateRef> states, std::vector<float>& out) const;
  Image render(StateRef s) const;

  const GazeCase& case_at(int i) const { return cases_[i]; }
  int case_count() const { return static_cast<int>(cases_.size()); }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t state_size() const { return static_cast<std::size_t>(height_) * width_ * 3; }
  const OverlayConfig& overlay() const { return overlay_; }

 private:
  std::span<const GazeCase> cases_;
  OverlayConfig overlay_;
  std::vector<Image> layers_;
  int height_ = 0;
  int width_ = 0;
};

}  // namespace lesionrl::env
