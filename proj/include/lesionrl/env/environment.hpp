#pragma once

#include <array>
#include <string>
#include <vector>

#include "lesionrl/image.hpp"

namespace lesionrl::env {

struct GazePoint {
  int x = 0;  // column
  int y = 0;  // row

  bool operator==(const GazePoint&) const = default;
};

// One image with its lesion mask and the ordered gaze plot walked by the
// agent. Gaze indices are 0-based: 0 is the first fixation.
struct GazeCase {
  std::string case_id;
  Image image;  // single channel, intensities in [0, 1]
  Mask lesion_mask;
  std::vector<GazePoint> gaze;

  int gaze_count() const { return static_cast<int>(gaze.size()); }
  bool operator==(const GazeCase&) const = default;
};

// Action order is also the Q-network output order and the argmax
// tie-break order.
enum class Action : int { kAnterograde = 0, kStill = 1, kRetrograde = 2 };
inline constexpr int kNumActions = 3;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::kAnterograde, Action::kStill, Action::kRetrograde};

std::string to_string(Action a);
constexpr int index_of(Action a) { return static_cast<int>(a); }

struct OverlayConfig {
  float alpha = 0.5f;    // opacity of both the gaze dots and the agent square
  int agent_square = 11;  // side of the agent square in pixels
};

// Reward shaping table: in-lesion stays are rewarded, stays outside the
// lesion are penalized hardest, and retrograde moves outside cost more than
// anterograde ones.
double reward_for(bool inside_lesion, Action effective);

struct StepResult {
  int next_index = 0;
  double reward = 0.0;
  Action effective_action = Action::kStill;
};

// Throws ValidationError when the case breaks an invariant: fewer than two
// gaze points, gaze point off the image, image/mask geometry mismatch, empty
// mask, or (when require_lesion_visit) no gaze point inside the lesion.
void validate_case(const GazeCase& c, bool require_lesion_visit = true);

// True iff the gaze point at `index` lies inside the lesion mask.
bool in_lesion(const GazeCase& c, int index);

// Moves along the gaze plot. Moves past either end are clamped and count as
// Still, both for the new index and the reward. The reward is judged at the
// state where the action is taken.
StepResult step(const GazeCase& c, int index, Action action);

int episode_length(const GazeCase& c);

// Gray image replicated to RGB, gaze pixels blended red, then the agent
// square blended blue on top. Clipped at the image border.
Image render_state(const GazeCase& c, int index, const OverlayConfig& overlay = {});

// The RGB image with gaze dots but no agent square.
Image render_gaze_layer(const GazeCase& c, const OverlayConfig& overlay = {});

// Blends the agent square for `index` onto a gaze layer in place.
void draw_agent(Image& rgb, const GazeCase& c, int index, const OverlayConfig& overlay);

}  // namespace lesionrl::env
