#include "uiground/trajectory.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "uiground/error.hpp"

namespace uiground {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string norm_point_text(const TrajectoryStep& s, const action::Click& c) {
  const NormPoint n = normalize_point(c.point, s.viewport);
  return "(" + std::to_string(n.x) + ", " + std::to_string(n.y) + ")";
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view to_string(QueryKind k) noexcept {
  return k == QueryKind::Instruction ? "instruction" : "refer_caption";
}

std::string_view to_string(Phase p) noexcept {
  return p == Phase::SingleStep ? "single_step" : "context_aware";
}

std::string check_sample(const GroundingSample& s) {
  if (s.sample_id.empty()) return "empty sample_id";
  if (s.image_refs.empty()) return s.sample_id + ": no image";
  if (!s.target_point.valid()) return s.sample_id + ": target point out of range";
  if (s.target_box) {
    if (!s.target_box->valid()) return s.sample_id + ": invalid target box";
    if (!point_in_bbox(s.target_point, *s.target_box)) {
      return s.sample_id + ": target point outside target box";
    }
  }
  if (s.history.has_value() != (s.phase == Phase::ContextAware)) {
    return s.sample_id + ": history must be present exactly for context-aware samples";
  }
  return {};
}

std::string_view to_string(SwipeDirection d) noexcept {
  switch (d) {
    case SwipeDirection::Up: return "up";
    case SwipeDirection::Down: return "down";
    case SwipeDirection::Left: return "left";
    case SwipeDirection::Right: return "right";
  }
  return "up";
}

std::optional<SwipeDirection> parse_swipe_direction(std::string_view s) noexcept {
  if (s == "up") return SwipeDirection::Up;
  if (s == "down") return SwipeDirection::Down;
  if (s == "left") return SwipeDirection::Left;
  if (s == "right") return SwipeDirection::Right;
  return std::nullopt;
}

std::string_view action_kind(const Action& a) noexcept {
  return std::visit(Overloaded{
                        [](const action::Click&) -> std::string_view { return "click"; },
                        [](const action::Type&) -> std::string_view { return "type"; },
                        [](const action::Swipe&) -> std::string_view { return "swipe"; },
                        [](const action::Enter&) -> std::string_view { return "enter"; },
                        [](const action::Back&) -> std::string_view { return "back"; },
                        [](const action::Home&) -> std::string_view { return "home"; },
                        [](const action::OpenApp&) -> std::string_view { return "open_app"; },
                        [](const action::Wait&) -> std::string_view { return "wait"; },
                    },
                    a);
}

std::size_t Trajectory::click_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const auto& s) { return s.is_click(); }));
}

void validate_trajectory(const Trajectory& t) {
  const std::string where = "trajectory '" + t.id + "'";
  if (t.steps.empty()) throw InputError(where + " has no steps");
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    const std::string at = where + " step " + std::to_string(i);
    if (s.index != i) throw InputError(at + ": index " + std::to_string(s.index) + " out of order");
    if (!s.viewport.valid()) throw InputError(at + ": invalid viewport");
    if (s.screenshot_ref.empty()) throw InputError(at + ": missing screenshot_ref");
    if (const auto* c = std::get_if<action::Click>(&s.action)) {
      if (!point_within(c->point, s.viewport)) throw InputError(at + ": click point outside viewport");
      if (c->bbox && !c->bbox->inside(s.viewport)) throw InputError(at + ": click box outside viewport");
    }
  }
}

HistoryMode HistoryMode::interleaved(int n) {
  if (n < 1 || n > kMaxInterleavedImages) {
    throw ConfigError("interleaved history needs 1..3 images, got " + std::to_string(n));
  }
  return {Kind::Interleaved, n};
}

std::string HistoryMode::tag() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Textual: return "text";
    case Kind::Interleaved: return "interleaved" + std::to_string(images);
  }
  return "none";
}

HistoryMode HistoryMode::parse(std::string_view tag) {
  if (tag == "none") return none();
  if (tag == "text" || tag == "textual") return textual();
  constexpr std::string_view prefix = "interleaved";
  if (tag.substr(0, prefix.size()) == prefix && tag.size() == prefix.size() + 1) {
    return interleaved(tag.back() - '0');
  }
  throw ConfigError("unknown history mode '" + std::string(tag) + "'");
}

std::string encode_action_text(const TrajectoryStep& s) {
  return std::visit(
      Overloaded{
          [&](const action::Click& c) -> std::string {
            if (s.instruction && !blank(*s.instruction)) return "Clicked on: " + *s.instruction;
            if (!blank(c.element_text)) return "Clicked on: " + c.element_text;
            return "Clicked on: the element at " + norm_point_text(s, c);
          },
          [](const action::Type& t) -> std::string {
            return "Typed \"" + t.text + "\" into the focused field";
          },
          [](const action::Swipe& w) -> std::string {
            return "Swiped " + std::string(to_string(w.direction));
          },
          [](const action::Enter&) -> std::string { return "Pressed enter"; },
          [](const action::Back&) -> std::string { return "Navigated back"; },
          [](const action::Home&) -> std::string { return "Went to home screen"; },
          [](const action::OpenApp& o) -> std::string { return "Opened app \"" + o.name + "\""; },
          [](const action::Wait&) -> std::string { return "Waited"; },
      },
      s.action);
}

std::string fallback_click_instruction(const TrajectoryStep& s) {
  const auto& c = std::get<action::Click>(s.action);
  if (!blank(c.element_text)) return c.element_text;
  return "the element at " + norm_point_text(s, c);
}

Trajectory augment_grounding_steps(const Trajectory& t, const StepAnnotator& annotator) {
  Trajectory out = t;
  for (auto& step : out.steps) {
    if (!step.is_click()) continue;
    std::optional<std::vector<std::string>> variants;
    if (annotator) variants = annotator(t, step);
    if (variants && !variants->empty()) {
      step.instruction_variants = *variants;
      step.instruction = variants->front();
    } else {
      step.instruction_variants.clear();
      step.instruction = fallback_click_instruction(step);
    }
  }
  return out;
}

namespace {

GroundingSample click_sample(const Trajectory& t, const TrajectoryStep& step, std::string id,
                             std::string query) {
  const auto& c = std::get<action::Click>(step.action);
  GroundingSample g;
  g.sample_id = std::move(id);
  g.platform = t.platform;
  g.query = std::move(query);
  g.query_kind = QueryKind::Instruction;
  g.target_point = normalize_point(c.point, step.viewport);
  if (c.bbox) {
    const NormBBox box = normalize_bbox(*c.bbox, step.viewport);
    // A click recorded outside its own element box keeps the point only.
    if (point_in_bbox(g.target_point, box)) g.target_box = box;
  }
  g.source = t.source;
  return g;
}

}  // namespace

std::vector<GroundingSample> build_context_samples(const Trajectory& t, const HistoryMode& mode) {
  std::vector<GroundingSample> out;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& step = t.steps[i];
    if (!step.is_click()) continue;
    const std::string query = step.instruction ? *step.instruction : fallback_click_instruction(step);
    GroundingSample g =
        click_sample(t, step, t.id + "/" + std::to_string(i) + "/" + mode.tag(), query);
    if (mode.kind == HistoryMode::Kind::None) {
      g.image_refs = {step.screenshot_ref};
      g.phase = Phase::SingleStep;
      out.push_back(std::move(g));
      continue;
    }
    g.phase = Phase::ContextAware;
    g.task = t.task;
    std::vector<HistoryTurn> history;
    history.reserve(i);
    const std::size_t with_images =
        mode.kind == HistoryMode::Kind::Interleaved ? std::min<std::size_t>(mode.images, i) : 0;
    for (std::size_t j = 0; j < i; ++j) {
      HistoryTurn turn{encode_action_text(t.steps[j]), std::nullopt};
      if (j >= i - with_images) {
        turn.image_ref = t.steps[j].screenshot_ref;
        g.image_refs.push_back(t.steps[j].screenshot_ref);
      }
      history.push_back(std::move(turn));
    }
    g.image_refs.push_back(step.screenshot_ref);
    g.history = std::move(history);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GroundingSample> variant_samples(const Trajectory& t) {
  std::vector<GroundingSample> out;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& step = t.steps[i];
    if (!step.is_click()) continue;
    for (std::size_t k = 1; k < step.instruction_variants.size(); ++k) {
      GroundingSample g = click_sample(
          t, step, t.id + "/" + std::to_string(i) + "/variant" + std::to_string(k),
          step.instruction_variants[k]);
      g.image_refs = {step.screenshot_ref};
      g.phase = Phase::SingleStep;
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace uiground
