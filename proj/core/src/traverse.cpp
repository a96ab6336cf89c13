#include "uiground/traverse.hpp"

#include <algorithm>
#include <cctype>

#include "uiground/digest.hpp"
#include "uiground/error.hpp"
#include "uiground/json_io.hpp"

namespace uiground {

namespace fs = std::filesystem;

std::string screen_state_id(const std::vector<UiElement>& elements) {
  std::vector<std::string> rows;
  rows.reserve(elements.size());
  for (const auto& e : elements) {
    rows.push_back(e.tag + '\x1f' + e.role + '\x1f' + e.text + '\x1f' + std::to_string(e.bbox.x) +
                   ',' + std::to_string(e.bbox.y) + ',' + std::to_string(e.bbox.w) + ',' +
                   std::to_string(e.bbox.h));
  }
  std::sort(rows.begin(), rows.end());
  Sha256 h;
  for (const auto& r : rows) h.update_field(r);
  return "s" + h.hex().substr(0, 16);
}

std::size_t OrderPolicy::pick(const ScreenState&, std::span<const std::size_t> untried) {
  return *std::min_element(untried.begin(), untried.end());
}

ModelGuidedPolicy::ModelGuidedPolicy(ModelClient& client, RetryPolicy retry)
    : client_(client), retry_(retry) {}

std::size_t ModelGuidedPolicy::pick(const ScreenState& state, std::span<const std::size_t> untried) {
  std::string prompt =
      "You are exploring a desktop application to reach screens you have not seen yet.\n"
      "Candidate elements on the current screen:\n";
  for (std::size_t k = 0; k < untried.size(); ++k) {
    const std::string& id = state.clickables[untried[k]];
    const auto it = std::find_if(state.snapshot.elements.begin(), state.snapshot.elements.end(),
                                 [&](const UiElement& e) { return e.id == id; });
    prompt += "[" + std::to_string(k) + "] ";
    if (it != state.snapshot.elements.end()) {
      prompt += it->tag + (it->role.empty() ? "" : " role=" + it->role) + " \"" + it->text + "\"";
    } else {
      prompt += id;
    }
    prompt += "\n";
  }
  prompt += "Answer with the number of the element most likely to open a new screen.";
  try {
    const std::string reply = complete_with_retry(client_, ModelRequest{prompt, {}, {}}, retry_);
    std::size_t i = 0;
    while (i < reply.size() && !std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
    std::size_t value = 0;
    std::size_t digits = 0;
    while (i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i])) && digits < 9) {
      value = value * 10 + static_cast<std::size_t>(reply[i] - '0');
      ++i;
      ++digits;
    }
    if (digits > 0 && value < untried.size()) return untried[value];
  } catch (const ClientError&) {
    // fall through to screen order
  }
  return *std::min_element(untried.begin(), untried.end());
}

namespace {

struct Frame {
  ScreenState state;
  std::vector<std::string> path;  // clicks from the start screen
};

class BudgetExhausted {};

}  // namespace

ExploreResult explore(Environment& env, std::size_t budget, ExplorePolicy& policy) {
  if (budget < 1) throw ConfigError("explore budget must be >= 1");
  ExploreResult r;
  std::vector<Frame> stack;

  auto act = [&](auto&& fn) -> ScreenState {
    if (r.actions >= budget) throw BudgetExhausted{};
    ++r.actions;
    return fn();
  };
  auto visit = [&](ScreenState s, std::vector<std::string> path) {
    r.memory.visited_states.insert(s.state_id);
    PageSnapshot snap = s.snapshot;
    snap.page_id = s.state_id;
    r.snapshots.push_back(std::move(snap));
    stack.push_back({std::move(s), std::move(path)});
  };
  // Bring the environment back to `target` after back() landed elsewhere.
  auto replay = [&](const Frame& target) {
    ScreenState cur = act([&] { return env.reset(); });
    for (const auto& el : target.path) {
      cur = act([&] { return env.click(el); });
      ++r.clicks;
    }
    if (cur.state_id != target.state.state_id) {
      throw InvariantError("replay did not reach state " + target.state.state_id);
    }
  };
  auto return_to = [&](const Frame& target) {
    const ScreenState cur = act([&] { return env.back(); });
    if (cur.state_id != target.state.state_id) replay(target);
  };

  try {
    visit(act([&] { return env.reset(); }), {});
    while (!stack.empty()) {
      const std::string cur_id = stack.back().state.state_id;
      const auto& clickables = stack.back().state.clickables;
      auto& tried = r.memory.tried[cur_id];
      std::vector<std::size_t> untried;
      for (std::size_t i = 0; i < clickables.size(); ++i) {
        if (!tried.count(clickables[i])) untried.push_back(i);
      }
      if (untried.empty()) {
        stack.pop_back();
        if (stack.empty()) break;
        return_to(stack.back());
        continue;
      }
      if (r.actions >= budget) break;
      std::size_t pick = policy.pick(stack.back().state, untried);
      if (std::find(untried.begin(), untried.end(), pick) == untried.end()) pick = untried.front();
      const std::string element = clickables[pick];
      tried.insert(element);
      ScreenState next = act([&] { return env.click(element); });
      ++r.clicks;
      if (next.state_id == cur_id) continue;
      if (!r.memory.visited_states.count(next.state_id)) {
        std::vector<std::string> path = stack.back().path;
        path.push_back(element);
        visit(std::move(next), std::move(path));
        continue;
      }
      return_to(stack.back());
    }
  } catch (const BudgetExhausted&) {
    // budget spent; results so far stand
  } catch (const std::exception& e) {
    r.errors.push_back(e.what());
  }
  return r;
}

std::vector<HarvestedElement> harvest(const std::vector<PageSnapshot>& snapshots) {
  std::vector<HarvestedElement> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (PageSnapshot s : snapshots) {
    classify_elements(s);
    for (const auto& e : s.elements) {
      if (!is_valid_element(e, s.viewport)) continue;
      const std::string content = screen_state_id({e});
      if (!seen.insert({s.page_id, content}).second) continue;
      out.push_back({s.page_id, s.platform, s.viewport, e});
    }
  }
  return out;
}

SyntheticEnvironment::SyntheticEnvironment(Platform platform, Viewport viewport, std::string start,
                                           std::map<std::string, Screen> screens)
    : platform_(platform), viewport_(viewport), start_(std::move(start)), screens_(std::move(screens)) {
  viewport_.validate();
  if (!screens_.count(start_)) throw InputError("start screen '" + start_ + "' not defined");
  for (auto& [name, screen] : screens_) {
    screen.name = name;
    for (const auto& [el, target] : screen.transitions) {
      if (!screens_.count(target)) {
        throw InputError("screen '" + name + "' element '" + el + "' leads to unknown screen '" +
                         target + "'");
      }
    }
    const std::string id = screen_state_id(screen.elements);
    if (!screen_by_state_.emplace(id, name).second) {
      throw InputError("screens '" + screen_by_state_[id] + "' and '" + name +
                       "' have identical element trees");
    }
  }
  history_.push_back(start_);
}

SyntheticEnvironment SyntheticEnvironment::load(const fs::path& spec_file) {
  const Json j = read_json_file(spec_file);
  try {
    std::map<std::string, Screen> screens;
    for (const auto& sj : j.at("screens")) {
      Screen s;
      sj.at("id").get_to(s.name);
      sj.at("elements").get_to(s.elements);
      if (auto it = sj.find("transitions"); it != sj.end()) it->get_to(s.transitions);
      const std::string name = s.name;
      if (!screens.emplace(name, std::move(s)).second) {
        throw InputError(spec_file.string() + ": duplicate screen '" + name + "'");
      }
    }
    return SyntheticEnvironment(j.value("platform", Platform::Desktop), j.at("viewport").get<Viewport>(),
                                j.at("start").get<std::string>(), std::move(screens));
  } catch (const Json::exception& e) {
    throw InputError(spec_file.string() + ": " + e.what());
  }
}

ScreenState SyntheticEnvironment::state_of(const std::string& name) const {
  const Screen& screen = screens_.at(name);
  ScreenState st;
  st.state_id = screen_state_id(screen.elements);
  st.snapshot.page_id = st.state_id;
  st.snapshot.platform = platform_;
  st.snapshot.viewport = viewport_;
  st.snapshot.screenshot_ref = "screen.png";
  st.snapshot.elements = screen.elements;
  for (const auto& e : screen.elements) {
    if (!e.text.empty()) {
      if (!st.snapshot.page_text.empty()) st.snapshot.page_text += ' ';
      st.snapshot.page_text += e.text;
    }
    if (e.visible && classify_interactive(e)) st.clickables.push_back(e.id);
  }
  return st;
}

ScreenState SyntheticEnvironment::observe() { return state_of(history_.back()); }

ScreenState SyntheticEnvironment::click(const std::string& element_id) {
  const Screen& screen = screens_.at(history_.back());
  const bool exists = std::any_of(screen.elements.begin(), screen.elements.end(),
                                  [&](const UiElement& e) { return e.id == element_id; });
  if (!exists) {
    throw InputError("screen '" + screen.name + "' has no element '" + element_id + "'");
  }
  ++clicks_;
  // A transition back onto the same screen is a no-op, not a navigation.
  if (auto it = screen.transitions.find(element_id);
      it != screen.transitions.end() && it->second != screen.name) {
    history_.push_back(it->second);
  }
  return observe();
}

ScreenState SyntheticEnvironment::back() {
  if (history_.size() > 1) history_.pop_back();
  return observe();
}

ScreenState SyntheticEnvironment::reset() {
  history_.assign(1, start_);
  return observe();
}

std::string SyntheticEnvironment::screen_of(const std::string& state_id) const {
  auto it = screen_by_state_.find(state_id);
  return it == screen_by_state_.end() ? std::string() : it->second;
}

Image render_wireframe(const PageSnapshot& s) {
  Image img(s.viewport.width, s.viewport.height, Rgb{255, 255, 255});
  std::uint8_t shade = 200;
  for (const auto& e : s.elements) {
    img.fill_rect(e.bbox, Rgb{shade, shade, static_cast<std::uint8_t>(255 - shade / 4)});
    draw_rect_outline(img, e.bbox, 1, Rgb{90, 90, 90});
    shade = static_cast<std::uint8_t>(shade == 140 ? 200 : shade - 20);
  }
  return img;
}

}  // namespace uiground
