#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uiground/geometry.hpp"
#include "uiground/model_client.hpp"
#include "uiground/sample.hpp"
#include "uiground/trajectory.hpp"

namespace uiground {

// Earlier steps shown to the grounder with an item.
struct ItemContext {
  std::string task;
  std::vector<HistoryTurn> steps;  // chronological; image_ref set where a screenshot exists
};

struct BenchmarkItem {
  std::string item_id;
  std::string image_ref;
  std::string query;
  NormBBox gt_box;
  std::string subset;
  std::optional<ItemContext> context;
};

// One JSON object per line:
// {"id", "image", "query", "gt_box": [x0,y0,x1,y1], "subset", "context"?}
std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& file);

// First "(int, int)" pair with both values in [0, 1000]; nullopt when none.
// Never throws.
std::optional<NormPoint> parse_prediction(std::string_view model_text) noexcept;

// A missing prediction is a miss.
bool score_item(const std::optional<NormPoint>& pred, const BenchmarkItem& item) noexcept;

struct SubsetResult {
  std::size_t hits = 0;
  std::size_t total = 0;
  double accuracy() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
  }
};

// Item-weighted: total hits / total items. Throws InputError on no items.
double micro_average(const std::map<std::string, SubsetResult>& subsets);
double micro_average(const std::vector<SubsetResult>& subsets);

struct GrounderOptions {
  bool visual_cot = false;
  HistoryMode history = HistoryMode::none();
};

// Prompt and images for one grounding query. History (when the mode allows)
// becomes prior chat turns; interleaved mode attaches the n most recent
// history screenshots before the current image.
struct GroundingQuery {
  ModelRequest request;
  std::vector<std::string> image_refs;  // chronological, current image last
};

using ImageLoader = std::function<std::vector<std::uint8_t>(const std::string& image_ref)>;

GroundingQuery build_grounding_query(std::string_view query, const std::string& image_ref,
                                     const std::optional<ItemContext>& context,
                                     const GrounderOptions& options);

struct ItemVerdict {
  std::string item_id;
  std::string subset;
  std::optional<NormPoint> prediction;
  bool hit = false;
  std::string raw;
  std::string error;
};

struct EvalConfigEcho {
  std::string history_mode = "none";
  bool visual_cot = false;
  std::uint64_t seed = 0;
  std::string grounder;
};

struct EvalReport {
  std::map<std::string, SubsetResult> subsets;
  double micro_avg = 0.0;
  std::vector<ItemVerdict> verdicts;
  std::size_t unparseable = 0;
  EvalConfigEcho config;

  // Recomputes subset counts and the micro average from the verdicts.
  double recomputed_micro_average() const;
};

struct EvalRunOptions {
  GrounderOptions grounder;
  std::size_t workers = 1;
  RetryPolicy retry;
  std::uint64_t seed = 0;
};

// Queries the grounder for every item (bounded parallel) and scores it.
// Client failures count as misses and are recorded in the verdict.
EvalReport evaluate(const std::vector<BenchmarkItem>& items, ModelClient& grounder,
                    const ImageLoader& images, const EvalRunOptions& options);

// Text table plus the "micro_avg=0.0000" line.
std::string render_report_table(const EvalReport& report);
std::string micro_avg_line(double value);
void write_report(const EvalReport& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& text_path);

struct TrajectoryEval {
  std::size_t click_steps = 0;
  std::size_t click_hits = 0;
  std::size_t steps = 0;
  std::size_t step_successes = 0;
  double grounding_acc = 0.0;      // hits over Click steps
  double grounding_acc_all = 0.0;  // hits over all steps, non-clicks count as misses
  double step_success = 0.0;
  bool task_success = false;
  std::vector<std::string> step_notes;
};

// Parses a planner reply ("click: ...", "type: ...", "swipe: up", "enter", ...).
// For click the instruction text is returned in `instruction`.
struct PlannedAction {
  std::string kind;
  std::string argument;
};
std::optional<PlannedAction> parse_planned_action(std::string_view reply);

// Teacher-forced evaluation over one trajectory. Steps with a stored
// instruction are low-level: Click steps go to the grounder, other steps are
// taken as given. Steps without one need `planner`, whose reply supplies the
// action kind (and for clicks the instruction). Every Click step needs a bbox.
TrajectoryEval eval_trajectory(const Trajectory& t, ModelClient& grounder, const HistoryMode& mode,
                               ModelClient* planner, const ImageLoader& images,
                               const GrounderOptions& options = {}, RetryPolicy retry = {});

struct AblationConfig {
  std::vector<bool> visual_cot = {false, true};
  std::vector<HistoryMode> history = {HistoryMode::none()};
  std::size_t workers = 1;
  RetryPolicy retry;
  std::uint64_t seed = 0;
};

struct AblationRun {
  std::string name;  // "cot=on,history=text"
  EvalReport report;
};

// One report per (CoT, history) combination over the same items.
std::vector<AblationRun> run_ablation(const std::vector<BenchmarkItem>& items, ModelClient& grounder,
                                      const ImageLoader& images, const AblationConfig& config);

}  // namespace uiground
