#include "uiground/json_io.hpp"

#include <fstream>
#include <sstream>

#include "uiground/error.hpp"

namespace uiground {

namespace fs = std::filesystem;

namespace {

template <class T>
T enum_from(const Json& j, std::optional<T> (*parse)(std::string_view) noexcept, const char* what) {
  const auto s = j.get<std::string>();
  if (auto v = parse(s)) return *v;
  throw Json::other_error::create(501, std::string("unknown ") + what + " '" + s + "'", &j);
}

std::optional<QueryKind> parse_query_kind(std::string_view s) noexcept {
  if (s == "instruction") return QueryKind::Instruction;
  if (s == "refer_caption") return QueryKind::ReferCaption;
  return std::nullopt;
}

std::optional<Phase> parse_phase(std::string_view s) noexcept {
  if (s == "single_step") return Phase::SingleStep;
  if (s == "context_aware") return Phase::ContextAware;
  return std::nullopt;
}

std::optional<ElementKind> parse_kind(std::string_view s) noexcept {
  if (s == "graphical") return ElementKind::Graphical;
  if (s == "textual") return ElementKind::Textual;
  return std::nullopt;
}

template <class T>
T value_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

}  // namespace

void to_json(Json& j, const Viewport& v) { j = Json{{"width", v.width}, {"height", v.height}}; }
void from_json(const Json& j, Viewport& v) {
  j.at("width").get_to(v.width);
  j.at("height").get_to(v.height);
}

void to_json(Json& j, const PixelPoint& p) { j = Json::array({p.x, p.y}); }
void from_json(const Json& j, PixelPoint& p) {
  if (!j.is_array() || j.size() != 2) throw Json::other_error::create(501, "point must be [x, y]", &j);
  j[0].get_to(p.x);
  j[1].get_to(p.y);
}

void to_json(Json& j, const NormPoint& p) { j = Json::array({p.x, p.y}); }
void from_json(const Json& j, NormPoint& p) {
  if (!j.is_array() || j.size() != 2) throw Json::other_error::create(501, "point must be [x, y]", &j);
  j[0].get_to(p.x);
  j[1].get_to(p.y);
}

void to_json(Json& j, const BBox& b) { j = Json::array({b.x, b.y, b.w, b.h}); }
void from_json(const Json& j, BBox& b) {
  if (!j.is_array() || j.size() != 4) {
    throw Json::other_error::create(501, "bbox must be [x, y, w, h]", &j);
  }
  j[0].get_to(b.x);
  j[1].get_to(b.y);
  j[2].get_to(b.w);
  j[3].get_to(b.h);
}

void to_json(Json& j, const NormBBox& b) { j = Json::array({b.x0, b.y0, b.x1, b.y1}); }
void from_json(const Json& j, NormBBox& b) {
  if (!j.is_array() || j.size() != 4) {
    throw Json::other_error::create(501, "normalized box must be [x0, y0, x1, y1]", &j);
  }
  j[0].get_to(b.x0);
  j[1].get_to(b.y0);
  j[2].get_to(b.x1);
  j[3].get_to(b.y1);
}

void to_json(Json& j, const Platform& p) { j = std::string(to_string(p)); }
void from_json(const Json& j, Platform& p) { p = enum_from<Platform>(j, parse_platform, "platform"); }

void to_json(Json& j, const UiElement& e) {
  j = Json{{"id", e.id},
           {"tag", e.tag},
           {"role", e.role},
           {"attributes", e.attributes},
           {"text", e.text},
           {"bbox", e.bbox},
           {"visible", e.visible},
           {"interactive", e.interactive},
           {"kind", e.kind ? Json(std::string(to_string(*e.kind))) : Json(nullptr)}};
}

void from_json(const Json& j, UiElement& e) {
  j.at("id").get_to(e.id);
  e.tag = value_or<std::string>(j, "tag", "");
  e.role = value_or<std::string>(j, "role", "");
  e.attributes = value_or<std::map<std::string, std::string>>(j, "attributes", {});
  e.text = value_or<std::string>(j, "text", "");
  j.at("bbox").get_to(e.bbox);
  e.visible = value_or(j, "visible", true);
  e.interactive = value_or(j, "interactive", false);
  e.kind.reset();
  if (auto it = j.find("kind"); it != j.end() && !it->is_null()) {
    e.kind = enum_from<ElementKind>(*it, parse_kind, "element kind");
  }
}

void to_json(Json& j, const PageSnapshot& s) {
  j = Json{{"page_id", s.page_id},   {"url", s.url},
           {"platform", s.platform}, {"viewport", s.viewport},
           {"screenshot_ref", s.screenshot_ref}, {"elements", s.elements},
           {"page_text", s.page_text}};
}

void from_json(const Json& j, PageSnapshot& s) {
  j.at("page_id").get_to(s.page_id);
  s.url = value_or<std::string>(j, "url", "");
  j.at("platform").get_to(s.platform);
  j.at("viewport").get_to(s.viewport);
  s.screenshot_ref = value_or<std::string>(j, "screenshot_ref", "screen.png");
  j.at("elements").get_to(s.elements);
  s.page_text = value_or<std::string>(j, "page_text", "");
}

void to_json(Json& j, const ElementCaption& c) {
  j = Json{{"element_id", c.element_id},
           {"caption", c.caption},
           {"source_model", c.source_model},
           {"prompt_hash", c.prompt_hash}};
}
void from_json(const Json& j, ElementCaption& c) {
  j.at("element_id").get_to(c.element_id);
  j.at("caption").get_to(c.caption);
  j.at("source_model").get_to(c.source_model);
  j.at("prompt_hash").get_to(c.prompt_hash);
}

void to_json(Json& j, const InstructionSet& s) {
  j = Json{{"element_id", s.element_id},
           {"instructions", s.instructions},
           {"source_model", s.source_model}};
}
void from_json(const Json& j, InstructionSet& s) {
  j.at("element_id").get_to(s.element_id);
  j.at("instructions").get_to(s.instructions);
  j.at("source_model").get_to(s.source_model);
}

void to_json(Json& j, const Action& a) {
  j = Json{{"kind", std::string(action_kind(a))}};
  if (const auto* c = std::get_if<action::Click>(&a)) {
    j["point"] = c->point;
    j["bbox"] = c->bbox ? Json(*c->bbox) : Json(nullptr);
    j["element_text"] = c->element_text;
  } else if (const auto* t = std::get_if<action::Type>(&a)) {
    j["text"] = t->text;
  } else if (const auto* s = std::get_if<action::Swipe>(&a)) {
    j["direction"] = std::string(to_string(s->direction));
  } else if (const auto* o = std::get_if<action::OpenApp>(&a)) {
    j["name"] = o->name;
  }
}

void from_json(const Json& j, Action& a) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "click") {
    action::Click c;
    j.at("point").get_to(c.point);
    if (auto it = j.find("bbox"); it != j.end() && !it->is_null()) c.bbox = it->get<BBox>();
    c.element_text = value_or<std::string>(j, "element_text", "");
    a = c;
  } else if (kind == "type") {
    a = action::Type{j.at("text").get<std::string>()};
  } else if (kind == "swipe") {
    a = action::Swipe{enum_from<SwipeDirection>(j.at("direction"), parse_swipe_direction,
                                                "swipe direction")};
  } else if (kind == "enter") {
    a = action::Enter{};
  } else if (kind == "back") {
    a = action::Back{};
  } else if (kind == "home") {
    a = action::Home{};
  } else if (kind == "open_app") {
    a = action::OpenApp{j.at("name").get<std::string>()};
  } else if (kind == "wait") {
    a = action::Wait{};
  } else {
    throw Json::other_error::create(501, "unknown action kind '" + kind + "'", &j);
  }
}

void to_json(Json& j, const TrajectoryStep& s) {
  j = Json{{"index", s.index},
           {"action", s.action},
           {"screenshot_ref", s.screenshot_ref},
           {"viewport", s.viewport},
           {"instruction", s.instruction ? Json(*s.instruction) : Json(nullptr)}};
  if (!s.instruction_variants.empty()) j["instruction_variants"] = s.instruction_variants;
}

void from_json(const Json& j, TrajectoryStep& s) {
  j.at("index").get_to(s.index);
  j.at("action").get_to(s.action);
  j.at("screenshot_ref").get_to(s.screenshot_ref);
  j.at("viewport").get_to(s.viewport);
  s.instruction.reset();
  if (auto it = j.find("instruction"); it != j.end() && !it->is_null()) {
    s.instruction = it->get<std::string>();
  }
  s.instruction_variants = value_or<std::vector<std::string>>(j, "instruction_variants", {});
}

void to_json(Json& j, const Trajectory& t) {
  j = Json{{"id", t.id},
           {"task", t.task},
           {"steps", t.steps},
           {"source", t.source},
           {"platform", t.platform}};
}

void from_json(const Json& j, Trajectory& t) {
  t.id = value_or<std::string>(j, "id", "");
  j.at("task").get_to(t.task);
  j.at("steps").get_to(t.steps);
  t.source = value_or<std::string>(j, "source", "");
  t.platform = value_or(j, "platform", Platform::Mobile);
}

void to_json(Json& j, const QueryKind& k) { j = std::string(to_string(k)); }
void from_json(const Json& j, QueryKind& k) {
  k = enum_from<QueryKind>(j, parse_query_kind, "query kind");
}
void to_json(Json& j, const Phase& p) { j = std::string(to_string(p)); }
void from_json(const Json& j, Phase& p) { p = enum_from<Phase>(j, parse_phase, "phase"); }

void to_json(Json& j, const HistoryTurn& t) {
  j = Json{{"text", t.text}, {"image_ref", t.image_ref ? Json(*t.image_ref) : Json(nullptr)}};
}
void from_json(const Json& j, HistoryTurn& t) {
  j.at("text").get_to(t.text);
  t.image_ref.reset();
  if (auto it = j.find("image_ref"); it != j.end() && !it->is_null()) {
    t.image_ref = it->get<std::string>();
  }
}

void to_json(Json& j, const GroundingSample& s) {
  j = Json{{"sample_id", s.sample_id},
           {"platform", s.platform},
           {"image_refs", s.image_refs},
           {"query", s.query},
           {"query_kind", s.query_kind},
           {"task", s.task},
           {"history", s.history ? Json(*s.history) : Json(nullptr)},
           {"target_point", s.target_point},
           {"target_box", s.target_box ? Json(*s.target_box) : Json(nullptr)},
           {"source", s.source},
           {"phase", s.phase}};
}

void from_json(const Json& j, GroundingSample& s) {
  j.at("sample_id").get_to(s.sample_id);
  j.at("platform").get_to(s.platform);
  j.at("image_refs").get_to(s.image_refs);
  j.at("query").get_to(s.query);
  j.at("query_kind").get_to(s.query_kind);
  s.task = value_or<std::string>(j, "task", "");
  s.history.reset();
  if (auto it = j.find("history"); it != j.end() && !it->is_null()) {
    s.history = it->get<std::vector<HistoryTurn>>();
  }
  j.at("target_point").get_to(s.target_point);
  s.target_box.reset();
  if (auto it = j.find("target_box"); it != j.end() && !it->is_null()) {
    s.target_box = it->get<NormBBox>();
  }
  s.source = value_or<std::string>(j, "source", "");
  j.at("phase").get_to(s.phase);
}

void to_json(Json& j, const ChatTurn& t) {
  j = Json{{"role", t.role}, {"content", t.content}, {"image_refs", t.image_refs}};
}
void from_json(const Json& j, ChatTurn& t) {
  j.at("role").get_to(t.role);
  j.at("content").get_to(t.content);
  t.image_refs = value_or<std::vector<std::string>>(j, "image_refs", {});
}

void to_json(Json& j, const Conversation& c) {
  j = Json{{"conversation_id", c.conversation_id},
           {"image_refs", c.image_refs},
           {"turns", c.turns},
           {"sample_ids", c.sample_ids}};
}
void from_json(const Json& j, Conversation& c) {
  j.at("conversation_id").get_to(c.conversation_id);
  j.at("image_refs").get_to(c.image_refs);
  j.at("turns").get_to(c.turns);
  j.at("sample_ids").get_to(c.sample_ids);
}

void to_json(Json& j, const ClientConfig& c) {
  j = Json{{"kind", c.kind},
           {"base_url", c.base_url},
           {"model", c.model},
           {"auth_token_env", c.auth_token_env},
           {"timeout_seconds", c.timeout_seconds},
           {"max_in_flight", c.max_in_flight},
           {"capability", c.capability == Capability::TextOnly ? "text" : "text+images"},
           {"max_retries", c.max_retries},
           {"initial_backoff_ms", c.initial_backoff.count()}};
}

void from_json(const Json& j, ClientConfig& c) {
  ClientConfig d;
  c.kind = value_or(j, "kind", d.kind);
  c.base_url = value_or(j, "base_url", d.base_url);
  c.model = value_or(j, "model", d.model);
  c.auth_token_env = value_or(j, "auth_token_env", d.auth_token_env);
  c.timeout_seconds = value_or(j, "timeout_seconds", d.timeout_seconds);
  c.max_in_flight = value_or(j, "max_in_flight", d.max_in_flight);
  const auto cap = value_or<std::string>(j, "capability", "text+images");
  if (cap == "text") {
    c.capability = Capability::TextOnly;
  } else if (cap == "text+images") {
    c.capability = Capability::TextAndImages;
  } else {
    throw Json::other_error::create(501, "capability must be 'text' or 'text+images'", &j);
  }
  c.max_retries = value_or(j, "max_retries", d.max_retries);
  c.initial_backoff =
      std::chrono::milliseconds(value_or<long long>(j, "initial_backoff_ms", d.initial_backoff.count()));
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw InputError("write failed for " + path.string());
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::size_t write_jsonl(const fs::path& path, const std::vector<Json>& records) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << "\n";
  if (!out) throw InputError("write failed for " + path.string());
  return records.size();
}

PageSnapshot load_snapshot(const fs::path& dir) {
  const fs::path file = dir / "snapshot.json";
  const Json j = read_json_file(file);
  PageSnapshot s;
  try {
    s = j.get<PageSnapshot>();
  } catch (const Json::exception& e) {
    throw InputError(file.string() + ": " + e.what());
  }
  s.viewport.validate();
  std::vector<UiElement> kept;
  kept.reserve(s.elements.size());
  for (auto& e : s.elements) {
    auto clamped = clamp_to_viewport(e.bbox, s.viewport);
    if (!clamped) continue;
    e.bbox = *clamped;
    kept.push_back(std::move(e));
  }
  s.elements = std::move(kept);
  return s;
}

void save_snapshot(const PageSnapshot& s, const fs::path& dir) {
  write_json_file(dir / "snapshot.json", Json(s));
}

Trajectory load_trajectory(const fs::path& file) {
  const Json j = read_json_file(file);
  Trajectory t;
  try {
    t = j.get<Trajectory>();
  } catch (const Json::exception& e) {
    throw InputError(file.string() + ": " + e.what());
  }
  if (t.id.empty()) t.id = file.stem().string();
  validate_trajectory(t);
  return t;
}

void save_trajectory(const Trajectory& t, const fs::path& file) { write_json_file(file, Json(t)); }

}  // namespace uiground
