#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "uiground/extract.hpp"
#include "uiground/imaging.hpp"
#include "uiground/model_client.hpp"

namespace uiground {

struct ScreenState {
  std::string state_id;
  PageSnapshot snapshot;
  // Ids of elements that can be clicked, in screen order.
  std::vector<std::string> clickables;
};

// Hash of the element tree (tag, role, text, geometry) independent of element
// order, so the same screen observed twice gets the same id.
std::string screen_state_id(const std::vector<UiElement>& elements);

// A UI that can be observed and driven. click/back/reset return the screen
// reached. Implementations may throw; explore() treats that as a failure of
// the current branch.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual ScreenState observe() = 0;
  virtual ScreenState click(const std::string& element_id) = 0;
  virtual ScreenState back() = 0;
  virtual ScreenState reset() = 0;
};

// Chooses which untried clickable to press next.
class ExplorePolicy {
 public:
  virtual ~ExplorePolicy() = default;
  // `untried` holds indices into state.clickables, ascending. Returns one of them.
  virtual std::size_t pick(const ScreenState& state, std::span<const std::size_t> untried) = 0;
};

// Highest score = lowest order index: clickables are tried in screen order.
class OrderPolicy final : public ExplorePolicy {
 public:
  std::size_t pick(const ScreenState& state, std::span<const std::size_t> untried) override;
};

// Asks a model which candidate is most likely to open an unexplored screen;
// falls back to screen order when the reply has no usable number.
class ModelGuidedPolicy final : public ExplorePolicy {
 public:
  explicit ModelGuidedPolicy(ModelClient& client, RetryPolicy retry = {});
  std::size_t pick(const ScreenState& state, std::span<const std::size_t> untried) override;

 private:
  ModelClient& client_;
  RetryPolicy retry_;
};

struct ExploreMemory {
  std::set<std::string> visited_states;
  std::map<std::string, std::set<std::string>> tried;
};

struct ExploreResult {
  std::vector<PageSnapshot> snapshots;  // one per distinct visited state, discovery order
  ExploreMemory memory;
  std::size_t actions = 0;  // environment calls, including the initial reset
  std::size_t clicks = 0;
  std::vector<std::string> errors;
};

// Memory-guided depth-first exploration. `budget` caps environment calls
// (reset, click, back); budget 1 only observes the start screen.
ExploreResult explore(Environment& env, std::size_t budget, ExplorePolicy& policy);

struct HarvestedElement {
  std::string state_id;
  Platform platform = Platform::Desktop;
  Viewport viewport;
  UiElement element;
};

// Runs extract-stage classification over every snapshot and keeps the valid
// elements, deduplicated by (state, element content).
std::vector<HarvestedElement> harvest(const std::vector<PageSnapshot>& snapshots);

// Screens, clickables and transitions read from a JSON description:
//   {"platform": "desktop", "viewport": {...}, "start": "home",
//    "screens": [{"id": "home", "elements": [...], "transitions": {"el": "screen"}}]}
// Clicking an element without a transition leaves the screen unchanged;
// back() pops the navigation history and stays put at the start screen.
class SyntheticEnvironment final : public Environment {
 public:
  struct Screen {
    std::string name;
    std::vector<UiElement> elements;
    std::map<std::string, std::string> transitions;
  };

  SyntheticEnvironment(Platform platform, Viewport viewport, std::string start,
                       std::map<std::string, Screen> screens);
  static SyntheticEnvironment load(const std::filesystem::path& spec_file);

  ScreenState observe() override;
  ScreenState click(const std::string& element_id) override;
  ScreenState back() override;
  ScreenState reset() override;

  const std::map<std::string, Screen>& screens() const noexcept { return screens_; }
  const std::string& start() const noexcept { return start_; }
  std::size_t clicks() const noexcept { return clicks_; }
  // Screen name behind a state id, for tests.
  std::string screen_of(const std::string& state_id) const;

 private:
  ScreenState state_of(const std::string& screen) const;

  Platform platform_;
  Viewport viewport_;
  std::string start_;
  std::map<std::string, Screen> screens_;
  std::map<std::string, std::string> screen_by_state_;
  std::vector<std::string> history_;
  std::size_t clicks_ = 0;
};

// Light-gray boxes on white, one per element; enough for crops and tiling.
Image render_wireframe(const PageSnapshot& s);

}  // namespace uiground
