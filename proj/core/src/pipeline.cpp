#include "uiground/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include "parallel.hpp"
#include "uiground/error.hpp"
#include "uiground/json_io.hpp"
#include "uiground/traverse.hpp"

namespace uiground {

namespace fs = std::filesystem;

// ---- config ----------------------------------------------------------------

namespace {

const std::set<std::string> kClientKinds = {"mock", "openai"};

// Collects field errors instead of stopping at the first one.
class FieldReader {
 public:
  explicit FieldReader(std::vector<std::string>& errors) : errors_(errors) {}

  template <class T>
  void read(const Json& obj, const char* key, T& out, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
      it->get_to(out);
    } catch (const Json::exception& e) {
      errors_.push_back(where + key + ": " + short_what(e));
    }
  }

  void path(const Json& obj, const char* key, fs::path& out, const std::string& where) {
    std::string s = out.string();
    read(obj, key, s, where);
    out = s;
  }

  void unknown_keys(const Json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [k, v] : obj.items()) {
      if (std::none_of(known.begin(), known.end(), [&](const char* n) { return k == n; })) {
        errors_.push_back(where + k + ": unknown field");
      }
    }
  }

  bool object(const Json& j, const std::string& where) {
    if (j.is_object()) return true;
    errors_.push_back(where + ": expected an object");
    return false;
  }

  static std::string short_what(const Json::exception& e) {
    std::string w = e.what();
    // "[json.exception.type_error.302] type must be ..." -> "type must be ..."
    if (auto p = w.find("] "); p != std::string::npos) w = w.substr(p + 2);
    return w;
  }

 private:
  std::vector<std::string>& errors_;
};

void check_client(const ClientConfig& cc, const std::string& name, std::vector<std::string>& errors) {
  if (!kClientKinds.count(cc.kind)) {
    errors.push_back("clients." + name + ".kind: unknown client kind '" + cc.kind + "'");
  }
  if (cc.kind == "openai" && cc.base_url.empty()) {
    errors.push_back("clients." + name + ".base_url: required for kind 'openai'");
  }
  if (cc.model.empty()) errors.push_back("clients." + name + ".model: must not be empty");
  if (cc.max_in_flight < 1) errors.push_back("clients." + name + ".max_in_flight: must be >= 1");
  if (cc.max_retries < 0) errors.push_back("clients." + name + ".max_retries: must be >= 0");
  if (!(cc.timeout_seconds > 0)) errors.push_back("clients." + name + ".timeout_seconds: must be > 0");
  if (cc.initial_backoff.count() < 0) {
    errors.push_back("clients." + name + ".initial_backoff_ms: must be >= 0");
  }
}

}  // namespace

std::vector<std::string> config_errors(const RunConfig& c) {
  std::vector<std::string> errors;
  if (c.output_dir.empty()) errors.push_back("paths.output: must not be empty");
  if (c.source.empty()) errors.push_back("source: must not be empty");
  check_client(c.annotator, "annotator", errors);
  check_client(c.instructor, "instructor", errors);
  check_client(c.grounder, "grounder", errors);
  check_client(c.planner, "planner", errors);
  if (c.cap_per_page < 1) errors.push_back("pipeline.cap_per_page: must be >= 1");
  if (c.history_modes.empty()) errors.push_back("pipeline.history_modes: must not be empty");
  if (!(c.mix_ratio >= 0.0 && c.mix_ratio <= 1.0)) errors.push_back("pipeline.mix_ratio: must be in [0, 1]");
  if (!(c.val_ratio >= 0.0 && c.val_ratio <= 1.0)) errors.push_back("pipeline.val_ratio: must be in [0, 1]");
  if (!(c.zoom_factor >= 1.0)) errors.push_back("pipeline.zoom_factor: must be >= 1");
  if (c.traverse_budget < 1) errors.push_back("traverse.budget: must be >= 1");
  if (c.traverse_policy != "order" && c.traverse_policy != "model") {
    errors.push_back("traverse.policy: must be 'order' or 'model'");
  }
  if (c.workers < 1) errors.push_back("concurrency.workers: must be >= 1");
  return errors;
}

void validate_config(const RunConfig& c) {
  const auto errors = config_errors(c);
  if (errors.empty()) return;
  std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problem" +
                    (errors.size() == 1 ? "" : "s") + "):";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

void to_json(Json& j, const RunConfig& c) {
  Json modes = Json::array();
  for (const auto& m : c.history_modes) modes.push_back(m.tag());
  j = Json{{"seed", c.seed},
           {"source", c.source},
           {"paths",
            {{"snapshots", c.snapshot_dir.generic_string()},
             {"trajectories", c.trajectory_dir.generic_string()},
             {"cache", c.cache_dir.generic_string()},
             {"output", c.output_dir.generic_string()},
             {"benchmark", c.benchmark_file.generic_string()},
             {"env_spec", c.env_spec.generic_string()},
             {"blocklist", c.blocklist.generic_string()}}},
           {"clients",
            {{"annotator", c.annotator},
             {"instructor", c.instructor},
             {"grounder", c.grounder},
             {"planner", c.planner}}},
           {"use_planner", c.use_planner},
           {"pipeline",
            {{"cap_per_page", c.cap_per_page},
             {"caption_supervision", c.caption_supervision},
             {"diversified_instructions", c.diversified_instructions},
             {"history_modes", modes},
             {"mix_ratio", c.mix_ratio},
             {"visual_cot", c.visual_cot},
             {"val_ratio", c.val_ratio},
             {"zoom_factor", c.zoom_factor},
             {"write_tiles", c.write_tiles}}},
           {"traverse", {{"budget", c.traverse_budget}, {"policy", c.traverse_policy}}},
           {"concurrency", {{"workers", c.workers}}}};
}

void from_json(const Json& j, RunConfig& c) {
  std::vector<std::string> errors;
  FieldReader r(errors);
  if (!r.object(j, "config")) throw ConfigError(errors.front());
  r.unknown_keys(j, {"seed", "source", "paths", "clients", "use_planner", "pipeline", "traverse", "concurrency"}, "");
  r.read(j, "seed", c.seed, "");
  r.read(j, "source", c.source, "");
  r.read(j, "use_planner", c.use_planner, "");
  if (auto p = j.find("paths"); p != j.end() && r.object(*p, "paths")) {
    r.unknown_keys(*p, {"snapshots", "trajectories", "cache", "output", "benchmark", "env_spec", "blocklist"},
                   "paths.");
    r.path(*p, "snapshots", c.snapshot_dir, "paths.");
    r.path(*p, "trajectories", c.trajectory_dir, "paths.");
    r.path(*p, "cache", c.cache_dir, "paths.");
    r.path(*p, "output", c.output_dir, "paths.");
    r.path(*p, "benchmark", c.benchmark_file, "paths.");
    r.path(*p, "env_spec", c.env_spec, "paths.");
    r.path(*p, "blocklist", c.blocklist, "paths.");
  }
  if (auto p = j.find("clients"); p != j.end() && r.object(*p, "clients")) {
    r.unknown_keys(*p, {"annotator", "instructor", "grounder", "planner"}, "clients.");
    r.read(*p, "annotator", c.annotator, "clients.");
    r.read(*p, "instructor", c.instructor, "clients.");
    r.read(*p, "grounder", c.grounder, "clients.");
    r.read(*p, "planner", c.planner, "clients.");
  }
  if (auto p = j.find("pipeline"); p != j.end() && r.object(*p, "pipeline")) {
    r.unknown_keys(*p,
                   {"cap_per_page", "caption_supervision", "diversified_instructions", "history_modes",
                    "mix_ratio", "visual_cot", "val_ratio", "zoom_factor", "write_tiles"},
                   "pipeline.");
    r.read(*p, "cap_per_page", c.cap_per_page, "pipeline.");
    r.read(*p, "caption_supervision", c.caption_supervision, "pipeline.");
    r.read(*p, "diversified_instructions", c.diversified_instructions, "pipeline.");
    std::vector<std::string> tags;
    bool have_modes = p->contains("history_modes");
    r.read(*p, "history_modes", tags, "pipeline.");
    if (have_modes) {
      c.history_modes.clear();
      for (const auto& t : tags) {
        try {
          c.history_modes.push_back(HistoryMode::parse(t));
        } catch (const Error& e) {
          errors.push_back(std::string("pipeline.history_modes: ") + e.what());
        }
      }
    }
    r.read(*p, "mix_ratio", c.mix_ratio, "pipeline.");
    r.read(*p, "visual_cot", c.visual_cot, "pipeline.");
    r.read(*p, "val_ratio", c.val_ratio, "pipeline.");
    r.read(*p, "zoom_factor", c.zoom_factor, "pipeline.");
    r.read(*p, "write_tiles", c.write_tiles, "pipeline.");
  }
  if (auto p = j.find("traverse"); p != j.end() && r.object(*p, "traverse")) {
    r.unknown_keys(*p, {"budget", "policy"}, "traverse.");
    r.read(*p, "budget", c.traverse_budget, "traverse.");
    r.read(*p, "policy", c.traverse_policy, "traverse.");
  }
  if (auto p = j.find("concurrency"); p != j.end() && r.object(*p, "concurrency")) {
    r.unknown_keys(*p, {"workers"}, "concurrency.");
    r.read(*p, "workers", c.workers, "concurrency.");
  }
  // Range checks ride along so one run reports everything.
  for (auto& e : config_errors(c)) errors.push_back(std::move(e));
  if (!errors.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problem" +
                      (errors.size() == 1 ? "" : "s") + "):";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

RunConfig load_run_config(const fs::path& file) {
  Json j;
  try {
    j = read_json_file(file);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return j.get<RunConfig>();
}

// ---- shared helpers --------------------------------------------------------

namespace {

RetryPolicy retry_of(const ClientConfig& cc) { return {cc.max_retries, cc.initial_backoff}; }

void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
}

void copy_file_to(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::create_directories(to.parent_path(), ec);
  fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
  if (ec) throw InputError("cannot copy " + from.string() + " to " + to.string() + ": " + ec.message());
}

void require_dir(const fs::path& dir, const char* what) {
  if (dir.empty()) throw InputError(std::string(what) + " path is not set");
  if (!fs::is_directory(dir)) throw InputError(std::string(what) + " directory not found: " + dir.string());
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories, const std::string& ext = {}) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (directories ? entry.is_directory()
                    : (entry.is_regular_file() && entry.path().extension() == ext)) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// References inside outputs must stay inside the tree they point into.
bool safe_relative(const std::string& ref) {
  const fs::path p(ref);
  if (ref.empty() || p.is_absolute()) return false;
  return std::none_of(p.begin(), p.end(), [](const fs::path& part) { return part == ".."; });
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

// ---- extract ---------------------------------------------------------------

ExtractStats run_extract(const RunConfig& c, bool dry_run, std::ostream& log) {
  require_dir(c.snapshot_dir, "snapshot");
  std::unique_ptr<HarmFilter> harm;
  if (!c.blocklist.empty()) {
    harm = std::make_unique<KeywordBlocklist>(KeywordBlocklist::load(c.blocklist.string()));
  } else {
    harm = std::make_unique<NullHarmFilter>();
  }

  ExtractStats st;
  Json pages = Json::array();
  std::vector<std::pair<PageSnapshot, fs::path>> kept;
  std::set<std::string> ids;
  for (const auto& dir : sorted_entries(c.snapshot_dir, true)) {
    ++st.pages;
    PageSnapshot s;
    FilterVerdict v;
    try {
      s = load_snapshot(dir);
      if (s.page_id.empty()) s.page_id = dir.filename().string();
      classify_elements(s);
      v = filter_page(s, *harm);
    } catch (const InputError& e) {
      s.page_id = dir.filename().string();
      v.kept = false;
      v.reason = FilterReason::Malformed;
      v.detail = e.what();
    }
    if (!ids.insert(s.page_id).second) throw InputError("duplicate page id '" + s.page_id + "'");
    if (v.kept) {
      if (s.screenshot_ref.empty() || !safe_relative(s.screenshot_ref) ||
          !fs::is_regular_file(dir / s.screenshot_ref)) {
        v.kept = false;
        v.reason = FilterReason::Malformed;
        v.detail = "screenshot missing: '" + s.screenshot_ref + "'";
      }
    }
    pages.push_back({{"page_id", s.page_id},
                     {"platform", s.platform},
                     {"kept", v.kept},
                     {"reason", std::string(to_string(v.reason))},
                     {"valid_count", v.valid_count},
                     {"detail", v.detail}});
    if (v.kept) {
      ++st.kept;
      st.valid_elements += v.valid_count;
      kept.emplace_back(std::move(s), dir);
    } else {
      ++st.dropped[std::string(to_string(v.reason))];
    }
  }

  log << "extract: " << st.pages << " pages, " << st.kept << " kept";
  for (const auto& [reason, n] : st.dropped) log << ", " << n << " " << reason;
  log << ", " << st.valid_elements << " valid elements\n";
  if (dry_run) {
    log << "dry run: would write " << st.kept << " pages to "
        << (c.output_dir / layout::kExtract).generic_string() << "\n";
    return st;
  }

  const fs::path out = c.output_dir / layout::kExtract;
  reset_dir(out);
  for (auto& [s, dir] : kept) {
    const fs::path page_dir = out / "pages" / s.page_id;
    copy_file_to(dir / s.screenshot_ref, page_dir / "screenshot.png");
    s.screenshot_ref = "screenshot.png";
    fs::create_directories(page_dir);
    save_snapshot(s, page_dir);
  }
  write_json_file(out / layout::kManifest,
                  {{"pages", pages}, {"total", st.pages}, {"kept", st.kept}, {"dropped", st.dropped}});
  return st;
}

// ---- annotate --------------------------------------------------------------

namespace {

std::vector<std::string> kept_page_ids(const fs::path& output_dir) {
  const fs::path manifest = output_dir / layout::kExtract / layout::kManifest;
  if (!fs::exists(manifest)) throw InputError("no extract output at " + manifest.string() + "; run extract first");
  const Json j = read_json_file(manifest);
  std::vector<std::string> ids;
  try {
    for (const auto& p : j.at("pages")) {
      if (p.at("kept").get<bool>()) ids.push_back(p.at("page_id").get<std::string>());
    }
  } catch (const Json::exception& e) {
    throw InputError(manifest.string() + ": " + e.what());
  }
  return ids;
}

}  // namespace

AnnotateStats run_annotate(const RunConfig& c, ModelClient& captioner, ModelClient& instructor,
                           bool dry_run, std::ostream& log) {
  const auto ids = kept_page_ids(c.output_dir);
  const fs::path pages_dir = c.output_dir / layout::kExtract / "pages";
  AnnotateStats st;
  st.pages = ids.size();

  if (dry_run) {
    std::size_t elements = 0;
    for (const auto& id : ids) {
      elements += std::min(valid_elements(load_snapshot(pages_dir / id)).size(), c.cap_per_page);
    }
    log << "dry run: " << ids.size() << " pages, " << elements << " elements, up to "
        << 2 * elements << " model calls before cache hits (plus re-asks)\n";
    return st;
  }

  CountingClient cap(captioner);
  CountingClient ins(instructor);
  AnnotationCache cache(c.cache_root());
  AnnotationContext ctx{cap, ins, cache, retry_of(c.annotator), c.zoom_factor};

  std::vector<Json> records;
  std::vector<Json> skips;
  for (const auto& id : ids) {
    const PageSnapshot s = load_snapshot(pages_dir / id);
    const Image img = load_png((pages_dir / id / s.screenshot_ref).string());
    const AnnotatedPage page = annotate_snapshot(s, img, ctx, c.cap_per_page, c.workers);
    const std::string image_ref = (layout::kExtract / "pages" / id / s.screenshot_ref).generic_string();
    for (const auto& a : page.elements) {
      records.push_back({{"page_id", s.page_id},
                         {"image_ref", image_ref},
                         {"platform", s.platform},
                         {"source", c.source},
                         {"viewport", s.viewport},
                         {"element", a.element},
                         {"caption", a.caption},
                         {"instructions", a.instructions}});
    }
    for (const auto& k : page.skipped) {
      skips.push_back({{"page_id", s.page_id},
                       {"element_id", k.element_id},
                       {"stage", k.stage},
                       {"reason", k.reason}});
    }
  }
  st.elements = records.size();
  st.skipped = skips.size();
  st.model_calls = cap.calls() + ins.calls();
  st.cache_hits = cache.hits();
  st.cache_misses = cache.misses();

  const fs::path out = c.output_dir / layout::kAnnotate;
  reset_dir(out);
  write_jsonl(out / layout::kAnnotations, records);
  write_jsonl(out / layout::kSkipped, skips);
  write_json_file(out / layout::kManifest, {{"pages", st.pages},
                                            {"elements", st.elements},
                                            {"skipped", st.skipped},
                                            {"cap_per_page", c.cap_per_page},
                                            {"captioner", captioner.model_name()},
                                            {"instructor", instructor.model_name()}});
  log << "annotate: " << st.pages << " pages, " << st.elements << " elements, " << st.skipped
      << " skipped, " << st.model_calls << " model calls, cache " << st.cache_hits << " hits / "
      << st.cache_misses << " misses\n";
  return st;
}

// ---- build-traj ------------------------------------------------------------

StepAnnotator make_step_annotator(AnnotationContext& ctx, const fs::path& image_root) {
  return [&ctx, image_root](const Trajectory& t, const TrajectoryStep& step)
             -> std::optional<std::vector<std::string>> {
    const auto& click = std::get<action::Click>(step.action);
    const Image img = load_png((image_root / step.screenshot_ref).string());
    if (img.viewport() != step.viewport) {
      throw InputError("trajectory '" + t.id + "' step " + std::to_string(step.index) +
                       ": screenshot size does not match the viewport");
    }
    BBox box;
    if (click.bbox) {
      box = *click.bbox;
    } else {
      // No element box recorded: a 48 px square around the click.
      constexpr int kSide = 48;
      box = BBox{static_cast<int>(std::lround(click.point.x)) - kSide / 2,
                 static_cast<int>(std::lround(click.point.y)) - kSide / 2, kSide, kSide};
    }
    const auto clamped = clamp_to_viewport(box, step.viewport);
    if (!clamped) return std::nullopt;
    UiElement e;
    e.id = t.id + "/" + std::to_string(step.index);
    e.text = click.element_text;
    e.bbox = *clamped;
    e.visible = true;
    e.interactive = true;
    const CropPair crops = crop_pair(img, e.bbox, ctx.zoom_factor);
    const auto caption = caption_element(e, crops, step.viewport, ctx);
    if (!caption.ok()) return std::nullopt;
    const auto instructions = generate_instructions(*caption.value, ctx);
    if (!instructions.ok()) return std::nullopt;
    return instructions.value->instructions;
  };
}

TrajStats run_build_traj(const RunConfig& c, ModelClient& captioner, ModelClient& instructor,
                         bool dry_run, std::ostream& log) {
  require_dir(c.trajectory_dir, "trajectory");
  std::vector<Trajectory> trajs;
  std::set<std::string> ids;
  for (const auto& file : sorted_entries(c.trajectory_dir, false, ".json")) {
    Trajectory t = load_trajectory(file);
    if (!ids.insert(t.id).second) throw InputError("duplicate trajectory id '" + t.id + "'");
    if (!safe_relative(t.id)) throw InputError("trajectory id '" + t.id + "' is not a safe file name");
    for (const auto& s : t.steps) {
      if (!safe_relative(s.screenshot_ref)) {
        throw InputError(file.string() + ": step " + std::to_string(s.index) + " screenshot ref '" +
                         s.screenshot_ref + "' must be a relative path inside the trajectory dir");
      }
    }
    trajs.push_back(std::move(t));
  }
  TrajStats st;
  st.trajectories = trajs.size();
  for (const auto& t : trajs) {
    st.steps += t.steps.size();
    st.click_steps += t.click_count();
  }
  if (dry_run) {
    log << "dry run: " << st.trajectories << " trajectories, " << st.steps << " steps, "
        << st.click_steps << " click steps, up to " << 2 * st.click_steps
        << " model calls before cache hits\n";
    return st;
  }

  const fs::path out = c.output_dir / layout::kTraj;
  reset_dir(out);
  // Screenshots move under the output tree first so refs resolve against it.
  for (auto& t : trajs) {
    for (auto& s : t.steps) {
      const std::string ref = (layout::kTraj / "images" / t.id / s.screenshot_ref).generic_string();
      copy_file_to(c.trajectory_dir / s.screenshot_ref, c.output_dir / ref);
      s.screenshot_ref = ref;
    }
  }

  CountingClient cap(captioner);
  CountingClient ins(instructor);
  AnnotationCache cache(c.cache_root());
  AnnotationContext ctx{cap, ins, cache, retry_of(c.annotator), c.zoom_factor};
  const StepAnnotator annotate = make_step_annotator(ctx, c.output_dir);

  std::vector<Trajectory> augmented(trajs.size());
  detail::parallel_for(trajs.size(), c.workers,
                       [&](std::size_t i) { augmented[i] = augment_grounding_steps(trajs[i], annotate); });

  Json listing = Json::array();
  for (const auto& t : augmented) {
    std::size_t fallback = 0;
    for (const auto& s : t.steps) {
      if (s.is_click() && s.instruction_variants.empty()) ++fallback;
    }
    st.fallback_instructions += fallback;
    save_trajectory(t, out / "trajectories" / (t.id + ".json"));
    listing.push_back({{"id", t.id},
                       {"steps", t.steps.size()},
                       {"click_steps", t.click_count()},
                       {"fallback_instructions", fallback}});
  }
  st.model_calls = cap.calls() + ins.calls();
  write_json_file(out / layout::kManifest,
                  {{"trajectories", listing}, {"total_steps", st.steps}, {"click_steps", st.click_steps}});
  log << "build-traj: " << st.trajectories << " trajectories, " << st.click_steps << " click steps, "
      << st.fallback_instructions << " fallback instructions, " << st.model_calls << " model calls\n";
  return st;
}

// ---- assemble --------------------------------------------------------------

namespace {

std::vector<Trajectory> load_augmented(const fs::path& output_dir) {
  std::vector<Trajectory> out;
  const fs::path dir = output_dir / layout::kTraj / "trajectories";
  if (!fs::is_directory(dir)) return out;
  for (const auto& file : sorted_entries(dir, false, ".json")) out.push_back(load_trajectory(file));
  return out;
}

}  // namespace

AssembleStats run_assemble(const RunConfig& c, bool dry_run, std::ostream& log) {
  const fs::path ann = c.output_dir / layout::kAnnotate / layout::kAnnotations;
  if (!fs::exists(ann)) throw InputError("no annotations at " + ann.string() + "; run annotate first");

  AssembleStats st;
  const SampleFlags flags{c.caption_supervision, c.diversified_instructions};
  std::vector<GroundingSample> single;
  std::map<std::string, std::pair<std::string, Viewport>> images;  // image_ref -> (page id, size)
  for (const auto& r : read_jsonl(ann)) {
    try {
      SampleOrigin origin{r.at("page_id").get<std::string>(), r.at("image_ref").get<std::string>(),
                          r.at("platform").get<Platform>(), r.at("source").get<std::string>()};
      const auto e = r.at("element").get<UiElement>();
      const auto v = r.at("viewport").get<Viewport>();
      auto samples = make_samples(e, r.at("caption").get<ElementCaption>(),
                                  r.at("instructions").get<InstructionSet>(), v, origin, flags);
      single.insert(single.end(), std::make_move_iterator(samples.begin()),
                    std::make_move_iterator(samples.end()));
      images.emplace(origin.image_ref, std::make_pair(origin.page_id, v));
      ++st.elements;
    } catch (const Json::exception& e) {
      throw InputError(ann.string() + ": " + e.what());
    }
  }
  st.phase1_samples = single.size();

  const auto trajs = load_augmented(c.output_dir);
  std::vector<GroundingSample> context;
  std::vector<GroundingSample> pool = single;
  for (const auto& t : trajs) {
    for (const auto& mode : c.history_modes) {
      auto s = build_context_samples(t, mode);
      context.insert(context.end(), s.begin(), s.end());
    }
    auto v = variant_samples(t);
    pool.insert(pool.end(), v.begin(), v.end());
  }
  st.context_samples = context.size();
  const std::size_t mix = context.empty() ? 0 : phase2_mix_count(context.size(), c.mix_ratio);

  if (dry_run) {
    log << "dry run: " << st.elements << " elements -> " << st.phase1_samples << " phase-1 samples over "
        << images.size() << " images; " << trajs.size() << " trajectories -> " << st.context_samples
        << " context samples + " << mix << " mixed single-step samples\n";
    return st;
  }

  const fs::path out = c.output_dir / layout::kAssemble;
  reset_dir(out);

  Corpus phase1{single, group_all(single, c.seed)};
  st.phase1_conversations = phase1.conversations.size();
  serialize(phase1, out / "phase1", c.seed, c.val_ratio);

  if (!context.empty()) {
    const auto mixed = compose_phase2(context, pool, c.seed, c.mix_ratio);
    Corpus phase2;
    phase2.samples = mixed;
    std::vector<GroundingSample> drawn;
    for (const auto& s : mixed) {
      if (s.phase == Phase::ContextAware) {
        phase2.conversations.push_back(context_conversation(s));
      } else {
        drawn.push_back(s);
      }
    }
    for (auto& conv : group_all(drawn, c.seed)) phase2.conversations.push_back(std::move(conv));
    st.phase2_samples = phase2.samples.size();
    serialize(phase2, out / "phase2", c.seed, c.val_ratio);
  }

  if (c.write_tiles) {
    Json tiles = Json::array();
    fs::create_directories(out / "tiles");
    for (const auto& [ref, info] : images) {
      const Image img = load_png((c.output_dir / ref).string());
      const TilePlan plan = plan_tiles(img.viewport());
      for (const auto& t : tile(img, plan)) {
        const std::string name = tile_filename(info.first, t.row, t.col);
        save_png(t.pixels, (out / "tiles" / name).string());
        ++st.tiles;
      }
      tiles.push_back({{"image_ref", ref},
                       {"page_id", info.first},
                       {"grid", {plan.grid_cols, plan.grid_rows}},
                       {"scale", plan.scale},
                       {"canvas", {plan.canvas_w, plan.canvas_h}}});
    }
    write_json_file(out / "tiles" / layout::kManifest, tiles);
  }

  log << "assemble: " << st.elements << " elements -> " << st.phase1_samples << " phase-1 samples in "
      << st.phase1_conversations << " conversations";
  if (st.phase2_samples) {
    log << "; phase 2: " << st.context_samples << " context + " << (st.phase2_samples - st.context_samples)
        << " single-step = " << st.phase2_samples;
  }
  if (c.write_tiles) log << "; " << st.tiles << " tiles";
  log << "\n";
  return st;
}

// ---- traverse --------------------------------------------------------------

TraverseStats run_traverse(const RunConfig& c, ModelClient* scorer, bool dry_run, std::ostream& log) {
  if (c.env_spec.empty()) throw InputError("environment spec path is not set");
  SyntheticEnvironment env = SyntheticEnvironment::load(c.env_spec);
  TraverseStats st;
  if (dry_run) {
    log << "dry run: environment with " << env.screens().size() << " screens, budget "
        << c.traverse_budget << " actions, policy " << c.traverse_policy << "\n";
    return st;
  }
  OrderPolicy order;
  std::unique_ptr<ModelGuidedPolicy> guided;
  ExplorePolicy* policy = &order;
  if (c.traverse_policy == "model") {
    if (scorer == nullptr) throw ConfigError("traverse policy 'model' needs a scoring client");
    guided = std::make_unique<ModelGuidedPolicy>(*scorer, retry_of(c.annotator));
    policy = guided.get();
  }
  const ExploreResult r = explore(env, c.traverse_budget, *policy);
  st.states = r.snapshots.size();
  st.actions = r.actions;
  st.errors = r.errors.size();

  const fs::path out = c.output_dir / layout::kTraverse;
  reset_dir(out);
  Json states = Json::array();
  for (PageSnapshot s : r.snapshots) {
    const fs::path dir = out / "pages" / s.page_id;
    fs::create_directories(dir);
    s.screenshot_ref = "screenshot.png";
    save_png(render_wireframe(s), (dir / s.screenshot_ref).string());
    save_snapshot(s, dir);
    states.push_back({{"state_id", s.page_id}, {"screen", env.screen_of(s.page_id)}});
  }
  std::vector<Json> harvested;
  for (const auto& h : harvest(r.snapshots)) {
    harvested.push_back(
        {{"state_id", h.state_id}, {"platform", h.platform}, {"viewport", h.viewport}, {"element", h.element}});
  }
  st.harvested = harvested.size();
  write_jsonl(out / "harvest.jsonl", harvested);
  write_json_file(out / layout::kManifest, {{"states", states},
                                            {"actions", r.actions},
                                            {"clicks", r.clicks},
                                            {"budget", c.traverse_budget},
                                            {"errors", r.errors},
                                            {"harvested", st.harvested}});
  log << "traverse: " << st.states << " states in " << st.actions << " actions, " << st.harvested
      << " elements harvested";
  if (st.errors) log << ", " << st.errors << " errors";
  log << "\n";
  return st;
}

// ---- eval ------------------------------------------------------------------

EvalReport run_eval(const RunConfig& c, ModelClient& grounder, ModelClient* planner, bool dry_run,
                    std::ostream& log) {
  if (c.benchmark_file.empty() && c.trajectory_dir.empty()) {
    throw InputError("eval needs a benchmark file or a trajectory directory");
  }
  std::vector<BenchmarkItem> items;
  if (!c.benchmark_file.empty()) items = load_benchmark(c.benchmark_file);
  std::vector<Trajectory> trajs;
  if (!c.trajectory_dir.empty()) {
    require_dir(c.trajectory_dir, "trajectory");
    for (const auto& f : sorted_entries(c.trajectory_dir, false, ".json")) trajs.push_back(load_trajectory(f));
  }
  if (dry_run) {
    std::size_t steps = 0;
    for (const auto& t : trajs) steps += t.steps.size();
    log << "dry run: " << items.size() << " benchmark items x " << c.history_modes.size()
        << " history modes = " << items.size() * c.history_modes.size() << " grounder calls; "
        << trajs.size() << " trajectories with " << steps << " steps\n";
    return {};
  }

  const fs::path out = c.output_dir / layout::kEval;
  reset_dir(out);
  EvalReport first;
  if (!c.benchmark_file.empty()) {
    const fs::path root = c.benchmark_file.parent_path();
    const ImageLoader images = [root](const std::string& ref) { return read_bytes(root / ref); };
    for (std::size_t m = 0; m < c.history_modes.size(); ++m) {
      EvalRunOptions opts;
      opts.grounder.visual_cot = c.visual_cot;
      opts.grounder.history = c.history_modes[m];
      opts.workers = c.workers;
      opts.retry = retry_of(c.grounder);
      opts.seed = c.seed;
      EvalReport rep = evaluate(items, grounder, images, opts);
      const std::string name =
          std::string("cot-") + (c.visual_cot ? "on" : "off") + "_history-" + c.history_modes[m].tag();
      write_report(rep, out / "ablation" / (name + ".json"), out / "ablation" / (name + ".txt"));
      if (m == 0) {
        write_report(rep, out / "report.json", out / "report.txt");
        log << render_report_table(rep);
        first = std::move(rep);
      } else {
        log << name << ": " << micro_avg_line(rep.micro_avg) << "\n";
      }
    }
  }
  if (!trajs.empty()) {
    // Raw trajectories reference screenshots beside them; build-traj output
    // references them relative to the output root.
    const fs::path root = c.trajectory_dir;
    const fs::path out_root = c.output_dir;
    const ImageLoader images = [root, out_root](const std::string& ref) {
      return read_bytes(fs::exists(root / ref) ? root / ref : out_root / ref);
    };
    Json rows = Json::array();
    for (const auto& mode : c.history_modes) {
      for (const auto& t : trajs) {
        const bool unscorable = std::any_of(t.steps.begin(), t.steps.end(), [](const TrajectoryStep& s) {
          const auto* click = std::get_if<action::Click>(&s.action);
          return click != nullptr && !click->bbox;
        });
        if (unscorable) {
          log << t.id << " [" << mode.tag() << "] skipped: click without bbox\n";
          continue;
        }
        GrounderOptions g;
        g.visual_cot = c.visual_cot;
        const TrajectoryEval e =
            eval_trajectory(t, grounder, mode, c.use_planner ? planner : nullptr, images, g, retry_of(c.grounder));
        rows.push_back({{"trajectory", t.id},
                        {"history_mode", mode.tag()},
                        {"grounding_acc", e.grounding_acc},
                        {"grounding_acc_all_steps", e.grounding_acc_all},
                        {"step_success", e.step_success},
                        {"task_success", e.task_success},
                        {"click_steps", e.click_steps},
                        {"steps", e.steps},
                        {"notes", e.step_notes}});
        log << t.id << " [" << mode.tag() << "] grounding_acc=" << fmt("%.4f", e.grounding_acc)
            << " step_success=" << fmt("%.4f", e.step_success) << " task_success=" << e.task_success << "\n";
      }
    }
    write_json_file(out / "trajectories.json", rows);
  }
  if (!items.empty()) log << micro_avg_line(first.micro_avg) << "\n";
  return first;
}

// ---- stats -----------------------------------------------------------------

std::map<std::string, StatsRow> collect_stats(const fs::path& output_dir) {
  std::map<std::string, StatsRow> rows;
  for (auto p : {Platform::Web, Platform::Mobile, Platform::Desktop}) rows[std::string(to_string(p))];

  const fs::path extract = output_dir / layout::kExtract / layout::kManifest;
  if (fs::exists(extract)) {
    const Json j = read_json_file(extract);
    for (const auto& p : j.at("pages")) {
      if (p.at("kept").get<bool>()) ++rows[std::string(to_string(p.at("platform").get<Platform>()))].images;
    }
  }
  const fs::path ann = output_dir / layout::kAnnotate / layout::kAnnotations;
  if (fs::exists(ann)) {
    for (const auto& r : read_jsonl(ann)) ++rows[std::string(to_string(r.at("platform").get<Platform>()))].elements;
  }
  for (const char* phase : {"phase1", "phase2"}) {
    const fs::path m = output_dir / layout::kAssemble / phase / kManifestFile;
    if (!fs::exists(m)) continue;
    const Json j = read_json_file(m);
    for (const auto& cnt : j.at("counts")) {
      rows[std::string(to_string(cnt.at("platform").get<Platform>()))].samples += cnt.at("count").get<std::size_t>();
    }
  }
  return rows;
}

std::string render_stats(const std::map<std::string, StatsRow>& rows) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s\n", "platform", "#images", "#elements", "#samples");
  os << line;
  StatsRow total;
  for (const auto& [name, r] : rows) {
    std::snprintf(line, sizeof(line), "%-10s %10zu %10zu %10zu\n", name.c_str(), r.images, r.elements, r.samples);
    os << line;
    total.images += r.images;
    total.elements += r.elements;
    total.samples += r.samples;
  }
  std::snprintf(line, sizeof(line), "%-10s %10zu %10zu %10zu\n", "total", total.images, total.elements,
                total.samples);
  os << line;
  return os.str();
}

}  // namespace uiground
