// Writes the bundled synthetic corpus: snapshot pages with known valid-element
// counts, a blocklist, mobile trajectories, a traverse environment and a small
// grounding benchmark. Output is deterministic.
//
//   make_synthetic_data <out_dir>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "uiground/error.hpp"
#include "uiground/json_io.hpp"
#include "uiground/random.hpp"
#include "uiground/traverse.hpp"

namespace fs = std::filesystem;
using namespace uiground;

namespace {

struct PagePlan {
  const char* id;
  Platform platform;
  Viewport viewport;
  std::size_t valid;
  bool harmful;
};

// valid counts straddle the "more than 20" rule on purpose
const PagePlan kPages[] = {
    {"p01_news", Platform::Web, {1280, 800}, 19, false},
    {"p02_shop", Platform::Web, {1280, 800}, 20, false},
    {"p03_forum", Platform::Web, {1280, 800}, 21, false},
    {"p04_docs", Platform::Web, {1440, 900}, 35, false},
    {"p05_mail", Platform::Mobile, {540, 1170}, 24, false},
    {"p06_clock", Platform::Mobile, {540, 1170}, 8, false},
    {"p07_ide", Platform::Desktop, {1920, 1080}, 30, false},
    {"p08_casino", Platform::Web, {1280, 800}, 40, true},
    {"p09_blank", Platform::Web, {1280, 800}, 0, false},
    {"p10_settings", Platform::Desktop, {1920, 1080}, 22, false},
    {"p11_travel", Platform::Web, {1024, 768}, 45, false},
    {"p12_chat", Platform::Mobile, {540, 1170}, 21, false},
};

const char* kWords[] = {"Home", "Search", "Cart", "Profile", "Settings", "Help", "Login", "Sign up",
                        "Next", "Previous", "Download", "Share", "Save", "Delete", "Edit", "Reply",
                        "Archive", "Filter", "Sort", "Refresh", "Upload", "Print", "Export", "Close"};

UiElement make_valid(std::size_t i, const BBox& box, Rng& rng) {
  UiElement e;
  e.id = "e" + std::to_string(i);
  e.bbox = box;
  e.visible = true;
  const std::string word = kWords[rng.below(std::size(kWords))];
  const std::string label = word + " " + std::to_string(i);
  switch (i % 6) {
    case 0:
      e.tag = "button";
      e.text = label;
      break;
    case 1:
      e.tag = "a";
      e.text = label;
      e.attributes["href"] = "/" + std::to_string(i);
      break;
    case 2:
      e.tag = "img";
      e.attributes["alt"] = label;
      e.attributes["onclick"] = "go()";
      break;
    case 3:
      e.tag = "div";
      e.role = "tab";
      e.text = label;
      break;
    case 4:
      e.tag = "input";
      e.attributes["type"] = "text";
      e.attributes["placeholder"] = label;
      break;
    default:
      e.tag = "span";
      e.attributes["tabindex"] = "0";
      e.attributes["has-svg"] = "true";
      break;
  }
  return e;
}

// Elements that look interactive but fail one validity rule, plus plain text.
std::vector<UiElement> distractors(const Viewport& v) {
  std::vector<UiElement> out;
  UiElement hidden;
  hidden.id = "d_hidden";
  hidden.tag = "button";
  hidden.text = "Hidden menu";
  hidden.bbox = {4, v.height - 40, 80, 30};
  hidden.visible = false;
  out.push_back(hidden);

  UiElement tiny;
  tiny.id = "d_tiny";
  tiny.tag = "a";
  tiny.text = "x";
  tiny.bbox = {v.width - 10, v.height - 10, 6, 6};
  tiny.visible = true;
  out.push_back(tiny);

  UiElement off;
  off.id = "d_offscreen";
  off.tag = "button";
  off.text = "Below the fold";
  off.bbox = {20, v.height + 50, 120, 30};
  off.visible = true;
  out.push_back(off);

  UiElement para;
  para.id = "d_text";
  para.tag = "p";
  para.text = "Plain paragraph text that is not interactive.";
  para.bbox = {v.width / 2, v.height - 40, v.width / 3, 30};
  para.visible = true;
  out.push_back(para);
  return out;
}

// Lays n elements out in a grid above the bottom strip used by distractors.
std::vector<BBox> grid(std::size_t n, const Viewport& v) {
  std::vector<BBox> out;
  if (n == 0) return out;
  const int usable_h = v.height - 60;
  int cols = std::max(1, v.width / 180);
  int rows = static_cast<int>((n + cols - 1) / cols);
  while (rows * 24 > usable_h) {
    ++cols;
    rows = static_cast<int>((n + cols - 1) / cols);
  }
  const int cell_w = v.width / cols;
  const int cell_h = std::min(90, usable_h / rows);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i) % cols;
    const int r = static_cast<int>(i) / cols;
    out.push_back({c * cell_w + 6, r * cell_h + 6, cell_w - 12, cell_h - 12});
  }
  return out;
}

PageSnapshot make_page(const PagePlan& p, Rng& rng) {
  PageSnapshot s;
  s.page_id = p.id;
  s.url = std::string("https://example.test/") + p.id;
  s.platform = p.platform;
  s.viewport = p.viewport;
  s.screenshot_ref = "screenshot.png";
  const auto boxes = grid(p.valid, p.viewport);
  for (std::size_t i = 0; i < boxes.size(); ++i) s.elements.push_back(make_valid(i, boxes[i], rng));
  for (auto& d : distractors(p.viewport)) s.elements.push_back(std::move(d));
  s.page_text = std::string("Welcome to ") + p.id + ".";
  if (p.harmful) s.page_text += " Play casino slots and win the jackpot tonight.";
  return s;
}

void write_pages(const fs::path& root, Json& expected) {
  Rng rng = Rng::substream(7, "synthetic.pages");
  for (const auto& p : kPages) {
    PageSnapshot s = make_page(p, rng);
    const fs::path dir = root / "pages" / p.id;
    fs::create_directories(dir);
    save_png(render_wireframe(s), (dir / s.screenshot_ref).string());
    save_snapshot(s, dir);
    expected["pages"][p.id] = {{"valid", p.valid}, {"harmful", p.harmful}, {"platform", p.platform}};
  }
}

void write_blocklist(const fs::path& root) {
  std::FILE* f = std::fopen((root / "blocklist.txt").string().c_str(), "wb");
  std::fputs("# lowercase terms, whole-word match\ncasino\ncounterfeit\nonline gambling\n", f);
  std::fclose(f);
}

PageSnapshot screen(const std::string& name, const Viewport& v, const std::vector<std::string>& labels) {
  PageSnapshot s;
  s.page_id = name;
  s.platform = Platform::Mobile;
  s.viewport = v;
  const auto boxes = grid(labels.size(), v);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    UiElement e;
    e.id = name + "_" + std::to_string(i);
    e.tag = "button";
    e.text = labels[i];
    e.bbox = boxes[i];
    e.visible = true;
    s.elements.push_back(e);
  }
  return s;
}

void write_trajectories(const fs::path& root) {
  const Viewport v{540, 1170};
  const fs::path dir = root / "trajectories";
  fs::create_directories(dir);

  struct Spec {
    std::string id;
    std::string task;
    std::vector<std::vector<std::string>> screens;
    std::vector<Action> actions;
  };
  auto click_at = [&](const PageSnapshot& s, std::size_t el, bool with_box) {
    const BBox b = s.elements[el].bbox;
    action::Click c;
    c.point = {b.x + b.w / 2.0, b.y + b.h / 2.0};
    if (with_box) c.bbox = b;
    c.element_text = s.elements[el].text;
    return c;
  };

  const std::vector<std::vector<std::string>> mail = {
      {"Inbox", "Compose", "Search mail", "Settings"},
      {"To", "Subject", "Body", "Send", "Discard"},
      {"To", "Subject", "Body", "Send", "Discard", "Attach"},
      {"Sent", "Undo"}};
  const std::vector<std::vector<std::string>> alarm = {
      {"Clock", "Alarm", "Timer", "Stopwatch"},
      {"Add alarm", "Edit", "Back"},
      {"Hour", "Minute", "AM", "PM", "Save"},
      {"Alarm set", "Dismiss"}};
  const std::vector<std::vector<std::string>> shop = {
      {"Home", "Deals", "Cart", "Account"},
      {"Search products", "Filter", "Sort"},
      {"Shoes", "Shirts", "Hats", "Bags"},
      {"Add to cart", "Buy now", "Reviews"},
      {"Checkout", "Remove", "Continue shopping"}};

  std::vector<Spec> specs;
  {
    Spec s{"t01_mail", "Send an email to Ana about the meeting", mail, {}};
    const auto s0 = screen("m0", v, mail[0]);
    const auto s1 = screen("m1", v, mail[1]);
    const auto s2 = screen("m2", v, mail[2]);
    s.actions = {click_at(s0, 1, true), click_at(s1, 0, true), action::Type{"ana@example.test"},
                 click_at(s2, 3, false)};
    s.screens = {mail[0], mail[1], mail[2], mail[2]};
    specs.push_back(s);
  }
  {
    Spec s{"t02_alarm", "Set an alarm for 7 AM", alarm, {}};
    const auto s0 = screen("a0", v, alarm[0]);
    const auto s1 = screen("a1", v, alarm[1]);
    const auto s2 = screen("a2", v, alarm[2]);
    s.actions = {action::OpenApp{"Clock"}, click_at(s1, 0, true), click_at(s2, 4, true), action::Home{}};
    (void)s0;
    specs.push_back(s);
  }
  {
    Spec s{"t03_shop", "Buy a pair of shoes", shop, {}};
    const auto s1 = screen("s1", v, shop[1]);
    const auto s2 = screen("s2", v, shop[2]);
    const auto s3 = screen("s3", v, shop[3]);
    s.actions = {action::Swipe{SwipeDirection::Up}, click_at(s1, 0, false), action::Enter{},
                 click_at(s2, 0, true), action::Wait{}, click_at(s3, 1, true)};
    s.screens = {shop[0], shop[1], shop[1], shop[2], shop[3], shop[3]};
    specs.push_back(s);
  }

  for (const auto& spec : specs) {
    Trajectory t;
    t.id = spec.id;
    t.task = spec.task;
    t.source = "synthetic";
    t.platform = Platform::Mobile;
    fs::create_directories(dir / spec.id);
    for (std::size_t i = 0; i < spec.actions.size(); ++i) {
      const auto& labels = spec.screens[std::min(i, spec.screens.size() - 1)];
      const PageSnapshot s = screen(spec.id + "_" + std::to_string(i), v, labels);
      const std::string ref = spec.id + "/step" + std::to_string(i) + ".png";
      save_png(render_wireframe(s), (dir / ref).string());
      TrajectoryStep step;
      step.index = i;
      step.action = spec.actions[i];
      step.screenshot_ref = ref;
      step.viewport = v;
      t.steps.push_back(step);
    }
    save_trajectory(t, dir / (spec.id + ".json"));
  }
}

void write_env(const fs::path& root) {
  const Viewport v{1280, 800};
  struct S {
    std::string id;
    std::vector<std::string> labels;
    std::map<std::size_t, std::string> to;
  };
  // Cycles: settings <-> display, about -> home.
  const std::vector<S> screens = {
      {"home", {"File", "Settings", "About", "Open project", "Help"}, {{1, "settings"}, {2, "about"}, {3, "project"}}},
      {"settings", {"Display", "Network", "Accounts", "Done"}, {{0, "display"}, {1, "network"}, {3, "home"}}},
      {"display", {"Brightness", "Resolution", "Night mode", "Back to settings"}, {{3, "settings"}}},
      {"network", {"Wi-Fi", "Proxy", "VPN"}, {{2, "vpn"}}},
      {"vpn", {"Add VPN", "Connect", "Disconnect"}, {}},
      {"about", {"Version", "License", "Go home"}, {{2, "home"}}},
      {"project", {"New file", "Build", "Run", "Debug"}, {{1, "build"}}},
      {"build", {"Build log", "Clean", "Rebuild"}, {}},
  };
  Json j;
  j["platform"] = Platform::Desktop;
  j["viewport"] = v;
  j["start"] = "home";
  j["screens"] = Json::array();
  for (const auto& s : screens) {
    PageSnapshot snap = screen(s.id, v, s.labels);
    Json transitions = Json::object();
    for (const auto& [idx, target] : s.to) transitions[snap.elements[idx].id] = target;
    j["screens"].push_back({{"id", s.id}, {"elements", snap.elements}, {"transitions", transitions}});
  }
  write_json_file(root / "env.json", j);
}

void write_benchmark(const fs::path& root) {
  const fs::path dir = root / "benchmark";
  fs::create_directories(dir / "images");
  Rng rng = Rng::substream(7, "synthetic.benchmark");
  std::vector<Json> items;
  struct Src {
    const char* subset;
    Platform platform;
    Viewport v;
    std::size_t n;
  };
  const Src srcs[] = {{"web", Platform::Web, {1280, 800}, 24},
                      {"mobile", Platform::Mobile, {540, 1170}, 12},
                      {"desktop", Platform::Desktop, {1920, 1080}, 16}};
  for (const auto& src : srcs) {
    PageSnapshot s;
    s.page_id = std::string("bench_") + src.subset;
    s.platform = src.platform;
    s.viewport = src.v;
    const auto boxes = grid(src.n, src.v);
    for (std::size_t i = 0; i < boxes.size(); ++i) s.elements.push_back(make_valid(i, boxes[i], rng));
    const std::string image = std::string("images/") + src.subset + ".png";
    save_png(render_wireframe(s), (dir / image).string());
    for (std::size_t i = 0; i < s.elements.size(); ++i) {
      const auto& e = s.elements[i];
      std::string label = e.text;
      for (const char* key : {"alt", "placeholder"}) {
        if (label.empty() && e.attributes.count(key)) label = e.attributes.at(key);
      }
      if (label.empty()) label = "the icon in row " + std::to_string(i);
      items.push_back({{"id", std::string(src.subset) + "_" + std::to_string(i)},
                       {"image", image},
                       {"query", "Click on " + label},
                       {"gt_box", normalize_bbox(e.bbox, src.v)},
                       {"subset", src.subset}});
    }
  }
  write_jsonl(dir / "items.jsonl", items);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_synthetic_data <out_dir>\n";
    return 2;
  }
  try {
    const fs::path root = argv[1];
    fs::create_directories(root);
    Json expected;
    write_pages(root, expected);
    write_blocklist(root);
    write_trajectories(root);
    write_env(root);
    write_benchmark(root);
    write_json_file(root / "expected.json", expected);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  }
  return 0;
}
