#pragma once

// Stage drivers behind the command-line tool. Every path that ends up in an
// output file is relative to the output root, so trees are portable and
// byte-comparable across machines.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "uiground/annotate.hpp"
#include "uiground/assemble.hpp"
#include "uiground/eval.hpp"
#include "uiground/extract.hpp"
#include "uiground/model_client.hpp"
#include "uiground/trajectory.hpp"

namespace uiground {

struct RunConfig {
  std::uint64_t seed = 0;

  std::filesystem::path snapshot_dir;    // one sub-directory per page, each with snapshot.json
  std::filesystem::path trajectory_dir;  // *.json trajectories, screenshots beside them
  std::filesystem::path cache_dir;       // empty: {output_dir}/cache
  std::filesystem::path output_dir = "out";
  std::filesystem::path benchmark_file;  // eval items, image refs relative to the file
  std::filesystem::path env_spec;        // traverse environment description
  std::filesystem::path blocklist;       // optional harm keyword list
  std::string source = "web";

  ClientConfig annotator;
  ClientConfig instructor;
  ClientConfig grounder;
  ClientConfig planner;
  bool use_planner = false;

  std::size_t cap_per_page = 64;
  bool caption_supervision = true;
  bool diversified_instructions = true;
  std::vector<HistoryMode> history_modes = {HistoryMode::textual()};
  double mix_ratio = kDefaultMixRatio;
  bool visual_cot = false;
  double val_ratio = 0.0;
  double zoom_factor = kDefaultZoomFactor;
  bool write_tiles = true;

  std::size_t traverse_budget = 500;
  std::string traverse_policy = "order";  // "order" | "model"

  std::size_t workers = 4;

  std::filesystem::path cache_root() const { return cache_dir.empty() ? output_dir / "cache" : cache_dir; }
};

// Every violated field, one message each; empty when the config is usable.
std::vector<std::string> config_errors(const RunConfig& c);
// Throws ConfigError listing every violation.
void validate_config(const RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& file);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// Counts complete() calls that reach the wrapped client.
class CountingClient final : public ModelClient {
 public:
  explicit CountingClient(ModelClient& inner) : inner_(inner) {}
  std::string complete(const ModelRequest& request) override {
    ++calls_;
    return inner_.complete(request);
  }
  std::string model_name() const override { return inner_.model_name(); }
  Capability capability() const override { return inner_.capability(); }
  int max_in_flight() const override { return inner_.max_in_flight(); }
  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  ModelClient& inner_;
  std::atomic<std::uint64_t> calls_{0};
};

// Output layout under output_dir.
namespace layout {
inline const std::filesystem::path kExtract = "extract";
inline const std::filesystem::path kAnnotate = "annotate";
inline const std::filesystem::path kTraj = "traj";
inline const std::filesystem::path kAssemble = "assemble";
inline const std::filesystem::path kTraverse = "traverse";
inline const std::filesystem::path kEval = "eval";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kAnnotations = "annotations.jsonl";
inline constexpr const char* kSkipped = "skipped.jsonl";
}  // namespace layout

struct ExtractStats {
  std::size_t pages = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> pages
  std::size_t valid_elements = 0;              // over kept pages
};

// Reads every snapshot directory, classifies and filters it; kept pages are
// written to extract/pages/{page_id}/ with the screenshot copied beside them.
ExtractStats run_extract(const RunConfig& c, bool dry_run, std::ostream& log);

struct AnnotateStats {
  std::size_t pages = 0;
  std::size_t elements = 0;
  std::size_t skipped = 0;
  std::uint64_t model_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

AnnotateStats run_annotate(const RunConfig& c, ModelClient& captioner, ModelClient& instructor,
                           bool dry_run, std::ostream& log);

struct TrajStats {
  std::size_t trajectories = 0;
  std::size_t steps = 0;
  std::size_t click_steps = 0;
  std::size_t fallback_instructions = 0;
  std::uint64_t model_calls = 0;
};

// Augments every trajectory's Click steps with generated instructions and
// writes them to traj/trajectories/, screenshots to traj/images/{id}/.
TrajStats run_build_traj(const RunConfig& c, ModelClient& captioner, ModelClient& instructor,
                         bool dry_run, std::ostream& log);

// Step annotator that crops the clicked element (its bbox, or a square around
// the click point) from the step screenshot and runs caption + instructions.
StepAnnotator make_step_annotator(AnnotationContext& ctx, const std::filesystem::path& image_root);

struct AssembleStats {
  std::size_t elements = 0;
  std::size_t phase1_samples = 0;
  std::size_t phase1_conversations = 0;
  std::size_t context_samples = 0;
  std::size_t phase2_samples = 0;
  std::size_t tiles = 0;
};

// Phase 1 from annotate/annotations.jsonl; phase 2 from traj/trajectories
// when present.
AssembleStats run_assemble(const RunConfig& c, bool dry_run, std::ostream& log);

struct TraverseStats {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::size_t harvested = 0;
  std::size_t errors = 0;
};

// Explores the environment in env_spec; visited screens are written as
// snapshot directories under traverse/pages/ (usable as extract input).
TraverseStats run_traverse(const RunConfig& c, ModelClient* scorer, bool dry_run, std::ostream& log);

// Evaluates benchmark_file once per history mode, writing eval/report.json
// and eval/report.txt for the first mode and eval/ablation/{name}.json for
// every mode. With trajectory_dir set, also scores each trajectory into
// eval/trajectories.json (planner used for steps without instructions).
// Returns the first benchmark report; empty when there is no benchmark.
EvalReport run_eval(const RunConfig& c, ModelClient& grounder, ModelClient* planner, bool dry_run,
                    std::ostream& log);

struct StatsRow {
  std::size_t images = 0;
  std::size_t elements = 0;
  std::size_t samples = 0;
};

// Platform name -> counts, read from whatever stage outputs exist.
std::map<std::string, StatsRow> collect_stats(const std::filesystem::path& output_dir);
std::string render_stats(const std::map<std::string, StatsRow>& rows);

}  // namespace uiground
