#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "uiground/error.hpp"
#include "uiground/traverse.hpp"

using namespace uiground;

namespace {

using Screens = std::map<std::string, SyntheticEnvironment::Screen>;

// Screen with `n` buttons named {name}_0.. plus the given transitions.
SyntheticEnvironment::Screen screen(const std::string& name, int n,
                                    std::map<std::string, std::string> transitions = {}) {
  SyntheticEnvironment::Screen s;
  s.name = name;
  for (int i = 0; i < n; ++i) {
    s.elements.push_back(fixtures::button(name + "_" + std::to_string(i), {20 + 60 * i, 20, 50, 30},
                                          name + " " + std::to_string(i)));
  }
  s.transitions = std::move(transitions);
  return s;
}

SyntheticEnvironment env_of(std::vector<SyntheticEnvironment::Screen> list, std::string start) {
  Screens m;
  for (auto& s : list) m[s.name] = std::move(s);
  return SyntheticEnvironment(Platform::Desktop, {800, 600}, std::move(start), std::move(m));
}

std::set<std::string> screens_seen(const SyntheticEnvironment& env, const ExploreResult& r) {
  std::set<std::string> out;
  for (const auto& s : r.snapshots) out.insert(env.screen_of(s.page_id));
  return out;
}

}  // namespace

TEST_CASE("a five-screen tree is fully explored") {
  auto env = env_of({screen("root", 2, {{"root_0", "a"}, {"root_1", "b"}}),
                     screen("a", 2, {{"a_0", "c"}, {"a_1", "d"}}), screen("b", 1), screen("c", 1),
                     screen("d", 1)},
                    "root");
  OrderPolicy order;
  const auto r = explore(env, 500, order);
  CHECK(r.snapshots.size() == 5);
  CHECK(screens_seen(env, r) == std::set<std::string>{"root", "a", "b", "c", "d"});
  CHECK(env.screen_of(r.snapshots[0].page_id) == "root");
  CHECK(env.screen_of(r.snapshots[1].page_id) == "a");
  CHECK(env.screen_of(r.snapshots[2].page_id) == "c");
  CHECK(r.errors.empty());
  CHECK(r.actions <= 500);
}

TEST_CASE("budget 1 only observes the start screen") {
  auto env = env_of({screen("root", 2, {{"root_0", "a"}}), screen("a", 1)}, "root");
  OrderPolicy order;
  const auto r = explore(env, 1, order);
  CHECK(r.snapshots.size() == 1);
  CHECK(r.actions == 1);
  CHECK(env.clicks() == 0);
  CHECK_THROWS_AS(explore(env, 0, order), ConfigError);
}

TEST_CASE("budget is never exceeded") {
  auto env = env_of({screen("root", 3, {{"root_0", "a"}, {"root_1", "b"}, {"root_2", "c"}}),
                     screen("a", 2), screen("b", 2), screen("c", 2)},
                    "root");
  OrderPolicy order;
  for (std::size_t budget = 1; budget < 20; ++budget) {
    const auto r = explore(env, budget, order);
    CHECK(r.actions <= budget);
  }
}

TEST_CASE("cycles terminate") {
  auto env = env_of({screen("a", 1, {{"a_0", "b"}}), screen("b", 1, {{"b_0", "a"}})}, "a");
  OrderPolicy order;
  const auto r = explore(env, 1000, order);
  CHECK(r.snapshots.size() == 2);
  CHECK(r.actions < 20);
  CHECK(r.errors.empty());
}

TEST_CASE("state ids ignore element order") {
  auto s = screen("x", 3);
  const auto a = screen_state_id(s.elements);
  std::reverse(s.elements.begin(), s.elements.end());
  CHECK(screen_state_id(s.elements) == a);
  s.elements[0].text = "changed";
  CHECK(screen_state_id(s.elements) != a);
}

TEST_CASE("harvest keeps valid elements once per state") {
  std::vector<PageSnapshot> snaps;
  for (int k = 0; k < 5; ++k) {
    PageSnapshot p;
    p.page_id = "s" + std::to_string(k);
    p.viewport = {800, 600};
    p.platform = Platform::Desktop;
    p.elements = screen("scr" + std::to_string(k), 4).elements;
    auto tiny = fixtures::button("tiny", {0, 0, 4, 4});
    p.elements.push_back(tiny);
    snaps.push_back(p);
  }
  CHECK(harvest(snaps).size() == 20);
  snaps.push_back(snaps[0]);
  CHECK(harvest(snaps).size() == 20);
}

TEST_CASE("model-guided policy follows the reply and falls back to order") {
  auto st = ScreenState{"s", {}, {"x", "y", "z"}};
  const std::vector<std::size_t> untried{1, 2};
  ScriptedClient says_two({{ScriptedClient::Step::Kind::Reply, "[1]"}});
  ModelGuidedPolicy p(says_two, {0, std::chrono::milliseconds(0)});
  CHECK(p.pick(st, untried) == 2);
  ScriptedClient rambles({{ScriptedClient::Step::Kind::Reply, "no idea"}});
  ModelGuidedPolicy q(rambles, {0, std::chrono::milliseconds(0)});
  CHECK(q.pick(st, untried) == 1);
}

TEST_CASE("wireframe matches the viewport") {
  PageSnapshot p;
  p.viewport = {120, 80};
  p.elements = {fixtures::button("b", {10, 10, 20, 20})};
  const Image img = render_wireframe(p);
  CHECK(img.width() == 120);
  CHECK(img.height() == 80);
  CHECK(img.at(0, 0) != img.at(20, 20));
}
