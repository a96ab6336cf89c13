#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uiground/geometry.hpp"
#include "uiground/sample.hpp"

namespace uiground {

enum class SwipeDirection { Up, Down, Left, Right };

std::string_view to_string(SwipeDirection d) noexcept;
std::optional<SwipeDirection> parse_swipe_direction(std::string_view s) noexcept;

namespace action {
struct Click {
  PixelPoint point;
  std::optional<BBox> bbox;
  // Visible text of the clicked element, when the source dataset records it.
  std::string element_text;
  friend bool operator==(const Click&, const Click&) = default;
};
struct Type {
  std::string text;
  friend bool operator==(const Type&, const Type&) = default;
};
struct Swipe {
  SwipeDirection direction = SwipeDirection::Up;
  friend bool operator==(const Swipe&, const Swipe&) = default;
};
struct Enter {
  friend bool operator==(const Enter&, const Enter&) = default;
};
struct Back {
  friend bool operator==(const Back&, const Back&) = default;
};
struct Home {
  friend bool operator==(const Home&, const Home&) = default;
};
struct OpenApp {
  std::string name;
  friend bool operator==(const OpenApp&, const OpenApp&) = default;
};
struct Wait {
  friend bool operator==(const Wait&, const Wait&) = default;
};
}  // namespace action

using Action = std::variant<action::Click, action::Type, action::Swipe, action::Enter,
                            action::Back, action::Home, action::OpenApp, action::Wait>;

// "click", "type", "swipe", "enter", "back", "home", "open_app", "wait"
std::string_view action_kind(const Action& a) noexcept;

struct TrajectoryStep {
  std::size_t index = 0;
  Action action;
  std::string screenshot_ref;
  Viewport viewport;
  std::optional<std::string> instruction;
  // All generated instructions for a Click step; instruction == variants[0].
  std::vector<std::string> instruction_variants;

  bool is_click() const noexcept { return std::holds_alternative<action::Click>(action); }
  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct Trajectory {
  std::string id;
  std::string task;
  std::vector<TrajectoryStep> steps;
  std::string source;
  Platform platform = Platform::Mobile;

  std::size_t click_count() const noexcept;
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Throws InputError describing the first problem: no steps, bad indices,
// invalid viewports, click points outside their viewport.
void validate_trajectory(const Trajectory& t);

struct HistoryMode {
  enum class Kind { None, Textual, Interleaved } kind = Kind::Textual;
  int images = 0;  // 1..3 for Interleaved

  static HistoryMode none() { return {Kind::None, 0}; }
  static HistoryMode textual() { return {Kind::Textual, 0}; }
  // Throws ConfigError unless n is 1, 2 or 3.
  static HistoryMode interleaved(int n);

  // "none", "text", "interleaved1".."interleaved3"
  std::string tag() const;
  static HistoryMode parse(std::string_view tag);

  friend bool operator==(const HistoryMode&, const HistoryMode&) = default;
};

inline constexpr int kMaxInterleavedImages = 3;

// Rule-based natural-language rendering of one step's action.
std::string encode_action_text(const TrajectoryStep& s);

// Produces up to three instructions for a Click step; nullopt when annotation failed.
using StepAnnotator = std::function<std::optional<std::vector<std::string>>(
    const Trajectory&, const TrajectoryStep&)>;

// Fallback instruction for a Click step the annotator could not handle.
std::string fallback_click_instruction(const TrajectoryStep& s);

// Every Click step gains an instruction (first annotator variant, or the
// fallback); other steps are untouched.
Trajectory augment_grounding_steps(const Trajectory& t, const StepAnnotator& annotator);

// One sample per Click step. History holds the encoded actions of all earlier
// steps; Interleaved{n} also attaches the screenshots of the min(n, i) most
// recent earlier steps. HistoryMode::none() yields single-step samples.
std::vector<GroundingSample> build_context_samples(const Trajectory& t, const HistoryMode& mode);

// Extra instruction variants of each Click step as single-step samples.
std::vector<GroundingSample> variant_samples(const Trajectory& t);

}  // namespace uiground
