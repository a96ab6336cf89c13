#include "uiground/annotate.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include "uiground/digest.hpp"
#include "uiground/error.hpp"
#include "uiground/prompts.hpp"

namespace uiground {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kDescriptiveAttributes[] = {"aria-label", "title", "alt",  "placeholder",
                                                       "value",      "name",  "href", "type"};
constexpr std::size_t kMaxHtmlText = 300;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> image_digests(const ModelRequest& r) {
  std::vector<std::string> out;
  out.reserve(r.images_png.size());
  for (const auto& png : r.images_png) out.push_back(sha256_hex(png));
  return out;
}

// Cached response or a fresh one (then cached). Throws ClientError subclasses.
std::string cached_complete(std::string_view stage, const ModelRequest& request,
                            ModelClient& client, AnnotationContext& ctx, std::string& key_out) {
  key_out = AnnotationCache::make_key(stage, request.prompt, image_digests(request));
  if (auto hit = ctx.cache.get(stage, key_out)) return *hit;
  std::string response = complete_with_retry(client, request, ctx.retry);
  ctx.cache.put(stage, key_out, client.model_name(), response);
  return response;
}

}  // namespace

AnnotationCache::AnnotationCache(fs::path dir) : dir_(std::move(dir)) {}

std::string AnnotationCache::make_key(std::string_view stage, std::string_view prompt,
                                      const std::vector<std::string>& image_digests) {
  Sha256 h;
  h.update_field(prompts::kPromptVersion);
  h.update_field(stage);
  h.update_field(prompt);
  for (const auto& d : image_digests) h.update_field(d);
  return h.hex();
}

fs::path AnnotationCache::path_for(std::string_view stage, const std::string& key) const {
  return *dir_ / std::string(stage) / (key + ".json");
}

std::optional<std::string> AnnotationCache::get(std::string_view stage, const std::string& key) {
  const std::string mem_key = std::string(stage) + "/" + key;
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(mem_key); it != memory_.end()) {
      hits_.fetch_add(1);
      return it->second;
    }
  }
  if (dir_) {
    std::ifstream in(path_for(stage, key));
    if (in) {
      try {
        const auto j = nlohmann::json::parse(in);
        std::string response = j.at("response").get<std::string>();
        std::lock_guard lock(mu_);
        memory_[mem_key] = response;
        hits_.fetch_add(1);
        return response;
      } catch (const nlohmann::json::exception&) {
        // Unreadable entry: treat as a miss and let put() overwrite it.
      }
    }
  }
  misses_.fetch_add(1);
  return std::nullopt;
}

void AnnotationCache::put(std::string_view stage, const std::string& key, std::string_view model,
                          std::string_view response) {
  {
    std::lock_guard lock(mu_);
    memory_[std::string(stage) + "/" + key] = std::string(response);
  }
  if (!dir_) return;
  const fs::path target = path_for(stage, key);
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw InputError("cannot create cache directory " + target.parent_path().string());
  const nlohmann::json j = {{"key", key},
                            {"stage", stage},
                            {"model", model},
                            {"response", response}};
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const fs::path tmp = target.string() + ".tmp." + tid.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write cache entry " + tmp.string());
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, target, ec);
  if (ec) throw InputError("cannot commit cache entry " + target.string() + ": " + ec.message());
}

std::string element_html_text(const UiElement& e) {
  std::string text = trim(e.text);
  if (text.size() > kMaxHtmlText) text = text.substr(0, kMaxHtmlText) + "...";
  std::string attrs;
  for (auto name : kDescriptiveAttributes) {
    auto it = e.attributes.find(std::string(name));
    if (it == e.attributes.end() || trim(it->second).empty()) continue;
    attrs += " ";
    attrs += name;
    attrs += "=\"" + trim(it->second) + "\"";
  }
  if (text.empty() && attrs.empty()) return {};
  const std::string tag = e.tag.empty() ? "element" : e.tag;
  std::string role = e.role.empty() ? "" : " role=\"" + e.role + "\"";
  return "<" + tag + role + attrs + ">" + text + "</" + tag + ">";
}

ModelRequest build_caption_prompt(const UiElement& e, const CropPair& crops, const Viewport& v) {
  ModelRequest r;
  r.prompt = prompts::caption_prompt(element_html_text(e), normalized_center(e.bbox, v));
  r.images_png.push_back(encode_png(crops.isolated));
  r.images_png.push_back(encode_png(crops.zoomed));
  return r;
}

Outcome<ElementCaption> caption_element(const UiElement& e, const CropPair& crops,
                                        const Viewport& v, AnnotationContext& ctx) {
  using Out = Outcome<ElementCaption>;
  if (ctx.captioner.capability() != Capability::TextAndImages) {
    return Out::skipped("captioner '" + ctx.captioner.model_name() + "' cannot take images");
  }
  const ModelRequest request = build_caption_prompt(e, crops, v);
  std::string key;
  std::string response;
  try {
    response = cached_complete(kCaptionStage, request, ctx.captioner, ctx, key);
  } catch (const ClientError& err) {
    return Out::skipped(std::string("caption request failed: ") + err.what());
  }
  std::string caption = trim(response);
  if (caption.empty()) return Out::skipped("empty caption");
  return {ElementCaption{e.id, std::move(caption), ctx.captioner.model_name(), key}, {}};
}

std::vector<std::string> parse_numbered_list(std::string_view response) {
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos < response.size()) {
    std::size_t eol = response.find('\n', pos);
    if (eol == std::string_view::npos) eol = response.size();
    std::string_view line = response.substr(pos, eol - pos);
    pos = eol + 1;
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == digits || i >= line.size() || (line[i] != '.' && line[i] != ')')) continue;
    std::string item = trim(line.substr(i + 1));
    // Models like to wrap instructions in quotes.
    if (item.size() >= 2 && item.front() == '"' && item.back() == '"') {
      item = trim(std::string_view(item).substr(1, item.size() - 2));
    }
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

std::string fold_for_distinctness(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> distinct_instructions(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  std::vector<std::string> seen;
  for (const auto& item : items) {
    if (out.size() == kInstructionsPerElement) break;
    std::string folded = fold_for_distinctness(item);
    if (std::find(seen.begin(), seen.end(), folded) != seen.end()) continue;
    seen.push_back(std::move(folded));
    out.push_back(item);
  }
  return out;
}

Outcome<InstructionSet> generate_instructions(const ElementCaption& caption,
                                              AnnotationContext& ctx) {
  using Out = Outcome<InstructionSet>;
  if (trim(caption.caption).empty()) return Out::skipped("empty caption");
  for (bool reask : {false, true}) {
    ModelRequest request;
    request.prompt = prompts::instruction_prompt(caption.caption, reask);
    std::string key;
    std::string response;
    try {
      response = cached_complete(kInstructionStage, request, ctx.instructor, ctx, key);
    } catch (const ClientError& err) {
      return Out::skipped(std::string("instruction request failed: ") + err.what());
    }
    auto items = distinct_instructions(parse_numbered_list(response));
    if (items.size() == kInstructionsPerElement) {
      return {InstructionSet{caption.element_id, std::move(items), ctx.instructor.model_name()}, {}};
    }
  }
  return Out::skipped("fewer than 3 distinct instructions after re-ask");
}

AnnotatedPage annotate_snapshot(const PageSnapshot& s, const Image& screenshot,
                                AnnotationContext& ctx, std::size_t cap, std::size_t workers) {
  if (screenshot.width() != s.viewport.width || screenshot.height() != s.viewport.height) {
    throw InputError("screenshot for page '" + s.page_id + "' is " +
                     std::to_string(screenshot.width()) + "x" +
                     std::to_string(screenshot.height()) + ", viewport is " +
                     std::to_string(s.viewport.width) + "x" + std::to_string(s.viewport.height));
  }
  const auto chosen = prioritize_elements(valid_elements(s), cap);

  struct Slot {
    std::optional<AnnotatedElement> done;
    std::optional<SkipRecord> skip;
  };
  std::vector<Slot> slots(chosen.size());

  auto annotate_one = [&](std::size_t i) {
    const UiElement& e = chosen[i];
    CropPair crops;
    try {
      crops = crop_pair(screenshot, e.bbox, ctx.zoom_factor);
    } catch (const Error& err) {
      slots[i].skip = SkipRecord{e.id, "crop", err.what()};
      return;
    }
    auto cap_out = caption_element(e, crops, s.viewport, ctx);
    if (!cap_out.ok()) {
      slots[i].skip = SkipRecord{e.id, std::string(kCaptionStage), cap_out.skip_reason};
      return;
    }
    auto ins_out = generate_instructions(*cap_out.value, ctx);
    if (!ins_out.ok()) {
      slots[i].skip = SkipRecord{e.id, std::string(kInstructionStage), ins_out.skip_reason};
      return;
    }
    slots[i].done = AnnotatedElement{e, std::move(*cap_out.value), std::move(*ins_out.value)};
  };
  auto work = [&](std::size_t i) {
    try {
      annotate_one(i);
    } catch (const std::exception& err) {
      slots[i].done.reset();
      slots[i].skip = SkipRecord{chosen[i].id, "internal", err.what()};
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, chosen.size()));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < chosen.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < chosen.size(); i = next.fetch_add(1)) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  AnnotatedPage page;
  for (auto& slot : slots) {
    if (slot.done) page.elements.push_back(std::move(*slot.done));
    if (slot.skip) page.skipped.push_back(std::move(*slot.skip));
  }
  return page;
}

}  // namespace uiground
