#include "uiground/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "uiground/error.hpp"
#include "uiground/json_io.hpp"
#include "uiground/prompts.hpp"
#include "parallel.hpp"

namespace uiground {

namespace fs = std::filesystem;

std::vector<BenchmarkItem> load_benchmark(const fs::path& file) {
  std::vector<BenchmarkItem> items;
  std::size_t line = 0;
  for (const auto& j : read_jsonl(file)) {
    ++line;
    BenchmarkItem it;
    try {
      it.item_id = j.value("id", "item" + std::to_string(line));
      j.at("image").get_to(it.image_ref);
      j.at("query").get_to(it.query);
      j.at("gt_box").get_to(it.gt_box);
      it.subset = j.value("subset", std::string("all"));
      if (auto c = j.find("context"); c != j.end() && !c->is_null()) {
        ItemContext ctx;
        ctx.task = c->value("task", std::string());
        c->at("steps").get_to(ctx.steps);
        it.context = std::move(ctx);
      }
    } catch (const Json::exception& e) {
      throw InputError(file.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    if (!it.gt_box.valid()) {
      throw InputError(file.string() + ":" + std::to_string(line) + ": invalid gt_box");
    }
    items.push_back(std::move(it));
  }
  return items;
}

std::optional<NormPoint> parse_prediction(std::string_view text) noexcept {
  auto skip_spaces = [&](std::size_t& i) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  // Saturates above the valid range, so long digit runs cannot overflow.
  auto read_int = [&](std::size_t& i, int& out) {
    const std::size_t start = i;
    int value = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      value = std::min(value * 10 + (text[i] - '0'), 10 * kNormMax);
      ++i;
    }
    if (i == start) return false;
    out = value;
    return true;
  };
  for (std::size_t open = text.find('('); open != std::string_view::npos;
       open = text.find('(', open + 1)) {
    std::size_t i = open + 1;
    int x = 0;
    int y = 0;
    skip_spaces(i);
    if (!read_int(i, x)) continue;
    skip_spaces(i);
    if (i >= text.size() || text[i] != ',') continue;
    ++i;
    skip_spaces(i);
    if (!read_int(i, y)) continue;
    skip_spaces(i);
    if (i >= text.size() || text[i] != ')') continue;
    const NormPoint p{x, y};
    if (p.valid()) return p;
  }
  return std::nullopt;
}

bool score_item(const std::optional<NormPoint>& pred, const BenchmarkItem& item) noexcept {
  return pred.has_value() && point_in_bbox(*pred, item.gt_box);
}

double micro_average(const std::vector<SubsetResult>& subsets) {
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& s : subsets) {
    hits += s.hits;
    total += s.total;
  }
  if (total == 0) throw InputError("micro average over zero items");
  return static_cast<double>(hits) / static_cast<double>(total);
}

double micro_average(const std::map<std::string, SubsetResult>& subsets) {
  std::vector<SubsetResult> v;
  v.reserve(subsets.size());
  for (const auto& [name, r] : subsets) v.push_back(r);
  return micro_average(v);
}

double EvalReport::recomputed_micro_average() const {
  std::map<std::string, SubsetResult> again;
  for (const auto& v : verdicts) {
    auto& s = again[v.subset];
    ++s.total;
    if (v.hit) ++s.hits;
  }
  return micro_average(again);
}

GroundingQuery build_grounding_query(std::string_view query, const std::string& image_ref,
                                     const std::optional<ItemContext>& context,
                                     const GrounderOptions& options) {
  GroundingQuery q;
  const bool with_history = context.has_value() && options.history.kind != HistoryMode::Kind::None;
  if (with_history) {
    q.request.history.emplace_back("user", "Task: " + context->task);
    const std::size_t n = context->steps.size();
    const std::size_t with_images =
        options.history.kind == HistoryMode::Kind::Interleaved
            ? std::min<std::size_t>(static_cast<std::size_t>(options.history.images), n)
            : 0;
    for (std::size_t j = 0; j < n; ++j) {
      q.request.history.emplace_back("assistant", context->steps[j].text);
      if (j >= n - with_images && context->steps[j].image_ref) {
        q.image_refs.push_back(*context->steps[j].image_ref);
      }
    }
  }
  q.image_refs.push_back(image_ref);
  q.request.prompt = prompts::grounding_prompt(query, options.visual_cot);
  return q;
}

namespace {

ItemVerdict run_item(const BenchmarkItem& item, ModelClient& grounder, const ImageLoader& images,
                     const GrounderOptions& options, const RetryPolicy& retry) {
  ItemVerdict v;
  v.item_id = item.item_id;
  v.subset = item.subset;
  try {
    GroundingQuery q = build_grounding_query(item.query, item.image_ref, item.context, options);
    if (images) {
      for (const auto& ref : q.image_refs) q.request.images_png.push_back(images(ref));
    }
    v.raw = complete_with_retry(grounder, q.request, retry);
    v.prediction = parse_prediction(v.raw);
  } catch (const std::exception& e) {
    v.error = e.what();
  }
  v.hit = score_item(v.prediction, item);
  return v;
}

}  // namespace

EvalReport evaluate(const std::vector<BenchmarkItem>& items, ModelClient& grounder,
                    const ImageLoader& images, const EvalRunOptions& options) {
  EvalReport report;
  report.verdicts.resize(items.size());
  detail::parallel_for(items.size(), options.workers, [&](std::size_t i) {
    report.verdicts[i] = run_item(items[i], grounder, images, options.grounder, options.retry);
  });
  for (const auto& v : report.verdicts) {
    auto& s = report.subsets[v.subset];
    ++s.total;
    if (v.hit) ++s.hits;
    if (!v.prediction) ++report.unparseable;
  }
  report.micro_avg = items.empty() ? 0.0 : micro_average(report.subsets);
  report.config.history_mode = options.grounder.history.tag();
  report.config.visual_cot = options.grounder.visual_cot;
  report.config.seed = options.seed;
  report.config.grounder = grounder.model_name();
  return report;
}

std::string micro_avg_line(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "micro_avg=%.4f", value);
  return buf;
}

std::string render_report_table(const EvalReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %8s %8s %9s\n", "subset", "hits", "total", "accuracy");
  os << line;
  for (const auto& [name, s] : report.subsets) {
    std::snprintf(line, sizeof(line), "%-28s %8zu %8zu %9.4f\n", name.c_str(), s.hits, s.total,
                  s.accuracy());
    os << line;
  }
  std::snprintf(line, sizeof(line), "unparseable: %zu of %zu\n", report.unparseable,
                report.verdicts.size());
  os << line;
  os << micro_avg_line(report.micro_avg) << "\n";
  return os.str();
}

void write_report(const EvalReport& report, const fs::path& json_path, const fs::path& text_path) {
  Json subsets = Json::object();
  for (const auto& [name, s] : report.subsets) {
    subsets[name] = {{"hits", s.hits}, {"total", s.total}, {"accuracy", s.accuracy()}};
  }
  Json verdicts = Json::array();
  for (const auto& v : report.verdicts) {
    verdicts.push_back({{"item_id", v.item_id},
                        {"subset", v.subset},
                        {"prediction", v.prediction ? Json(*v.prediction) : Json(nullptr)},
                        {"hit", v.hit},
                        {"raw", v.raw},
                        {"error", v.error}});
  }
  const Json j = {{"subsets", subsets},
                  {"micro_avg", report.micro_avg},
                  {"unparseable", report.unparseable},
                  {"verdicts", verdicts},
                  {"config",
                   {{"history_mode", report.config.history_mode},
                    {"visual_cot", report.config.visual_cot},
                    {"seed", report.config.seed},
                    {"grounder", report.config.grounder}}}};
  write_json_file(json_path, j);
  if (text_path.has_parent_path()) fs::create_directories(text_path.parent_path());
  std::ofstream out(text_path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + text_path.string());
  out << render_report_table(report);
}

std::optional<PlannedAction> parse_planned_action(std::string_view reply) {
  std::string line;
  for (char c : reply) {
    if (c == '\n') {
      if (!line.empty()) break;
      continue;
    }
    line.push_back(c);
  }
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  line = trim(line);
  std::string kind = line;
  std::string arg;
  if (auto colon = line.find(':'); colon != std::string::npos) {
    kind = trim(line.substr(0, colon));
    arg = trim(line.substr(colon + 1));
  }
  std::transform(kind.begin(), kind.end(), kind.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  static const char* kKinds[] = {"click", "type", "swipe", "enter", "back", "home", "open_app", "wait"};
  if (std::find(std::begin(kKinds), std::end(kKinds), kind) == std::end(kKinds)) return std::nullopt;
  const bool needs_arg = kind == "click" || kind == "type" || kind == "swipe" || kind == "open_app";
  if (needs_arg && arg.empty()) return std::nullopt;
  return PlannedAction{kind, arg};
}

namespace {

// Exact kind + payload match for non-click actions.
bool matches(const PlannedAction& p, const Action& gt) {
  if (p.kind != action_kind(gt)) return false;
  if (const auto* t = std::get_if<action::Type>(&gt)) return p.argument == t->text;
  if (const auto* s = std::get_if<action::Swipe>(&gt)) {
    std::string dir = p.argument;
    std::transform(dir.begin(), dir.end(), dir.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return dir == to_string(s->direction);
  }
  if (const auto* o = std::get_if<action::OpenApp>(&gt)) return p.argument == o->name;
  return true;
}

}  // namespace

TrajectoryEval eval_trajectory(const Trajectory& t, ModelClient& grounder, const HistoryMode& mode,
                               ModelClient* planner, const ImageLoader& images,
                               const GrounderOptions& options, RetryPolicy retry) {
  TrajectoryEval out;
  GrounderOptions gopts = options;
  gopts.history = mode;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& step = t.steps[i];
    ++out.steps;
    if (step.is_click()) ++out.click_steps;

    // Ground-truth history up to this step.
    ItemContext ctx;
    ctx.task = t.task;
    std::vector<std::string> history_text;
    for (std::size_t j = 0; j < i; ++j) {
      ctx.steps.push_back({encode_action_text(t.steps[j]), t.steps[j].screenshot_ref});
      history_text.push_back(ctx.steps.back().text);
    }

    std::optional<PlannedAction> planned;
    std::string note;
    if (step.instruction) {
      planned = PlannedAction{std::string(action_kind(step.action)),
                              step.is_click() ? *step.instruction : std::string()};
      if (!step.is_click()) {
        ++out.step_successes;
        out.step_notes.push_back("given");
        continue;
      }
    } else if (planner != nullptr) {
      try {
        const std::string reply = complete_with_retry(
            *planner, ModelRequest{prompts::planner_prompt(t.task, history_text), {}, {}}, retry);
        planned = parse_planned_action(reply);
        if (!planned) note = "unparseable planner reply";
      } catch (const std::exception& e) {
        note = std::string("planner failed: ") + e.what();
      }
    } else {
      note = "no instruction and no planner";
    }
    if (!planned) {
      out.step_notes.push_back(note);
      continue;
    }

    if (!step.is_click()) {
      const bool ok = matches(*planned, step.action);
      if (ok) ++out.step_successes;
      out.step_notes.push_back(ok ? "match" : "mismatch: " + planned->kind);
      continue;
    }
    if (planned->kind != "click") {
      out.step_notes.push_back("mismatch: " + planned->kind);
      continue;
    }
    const auto& click = std::get<action::Click>(step.action);
    if (!click.bbox) {
      throw InputError("trajectory '" + t.id + "' step " + std::to_string(i) +
                       ": click without bbox cannot be scored");
    }
    BenchmarkItem item;
    item.item_id = t.id + "/" + std::to_string(i);
    item.image_ref = step.screenshot_ref;
    item.query = planned->argument;
    item.gt_box = normalize_bbox(*click.bbox, step.viewport);
    item.context = std::move(ctx);
    const ItemVerdict v = run_item(item, grounder, images, gopts, retry);
    if (v.hit) {
      ++out.click_hits;
      ++out.step_successes;
    }
    out.step_notes.push_back(v.hit ? "hit" : (v.error.empty() ? "miss" : "error: " + v.error));
  }
  out.grounding_acc = out.click_steps == 0 ? 0.0
                                           : static_cast<double>(out.click_hits) /
                                                 static_cast<double>(out.click_steps);
  out.grounding_acc_all =
      out.steps == 0 ? 0.0 : static_cast<double>(out.click_hits) / static_cast<double>(out.steps);
  out.step_success =
      out.steps == 0 ? 0.0 : static_cast<double>(out.step_successes) / static_cast<double>(out.steps);
  out.task_success = out.steps > 0 && out.step_successes == out.steps;
  return out;
}

std::vector<AblationRun> run_ablation(const std::vector<BenchmarkItem>& items, ModelClient& grounder,
                                      const ImageLoader& images, const AblationConfig& config) {
  std::vector<AblationRun> runs;
  for (bool cot : config.visual_cot) {
    for (const auto& mode : config.history) {
      EvalRunOptions opts;
      opts.grounder.visual_cot = cot;
      opts.grounder.history = mode;
      opts.workers = config.workers;
      opts.retry = config.retry;
      opts.seed = config.seed;
      runs.push_back({std::string("cot=") + (cot ? "on" : "off") + ",history=" + mode.tag(),
                      evaluate(items, grounder, images, opts)});
    }
  }
  return runs;
}

}  // namespace uiground
