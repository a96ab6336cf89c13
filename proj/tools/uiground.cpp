// uiground: extract | annotate | build-traj | assemble | traverse | eval | stats

#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uiground/error.hpp"
#include "uiground/json_io.hpp"
#include "uiground/pipeline.hpp"

namespace fs = std::filesystem;
using namespace uiground;

namespace {

// Flags shared by every subcommand; only the ones given override the config file.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> cache;
  std::optional<std::size_t> workers;
  bool dry_run = false;

  std::optional<std::string> snapshots;
  std::optional<std::string> blocklist;
  std::optional<std::string> trajectories;
  std::optional<std::string> benchmark;
  std::optional<std::string> env_spec;
  std::optional<std::size_t> cap;
  std::optional<double> mix_ratio;
  std::optional<double> val_ratio;
  std::optional<std::size_t> budget;
  std::optional<std::string> policy;
  std::vector<std::string> history;
  bool no_caption = false;
  bool no_diversified = false;
  bool no_tiles = false;
  bool cot = false;
  bool planner = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config, "JSON run config");
  sub->add_option("--seed", o.seed, "Run seed");
  sub->add_option("-o,--output", o.output, "Output directory");
  sub->add_option("--cache", o.cache, "Annotation cache directory");
  sub->add_option("-j,--workers", o.workers, "Worker threads");
  sub->add_flag("--dry-run", o.dry_run, "Print the work plan and exit without writing");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config.empty()) c = load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.output) c.output_dir = *o.output;
  if (o.cache) c.cache_dir = *o.cache;
  if (o.workers) c.workers = *o.workers;
  if (o.snapshots) c.snapshot_dir = *o.snapshots;
  if (o.blocklist) c.blocklist = *o.blocklist;
  if (o.trajectories) c.trajectory_dir = *o.trajectories;
  if (o.benchmark) c.benchmark_file = *o.benchmark;
  if (o.env_spec) c.env_spec = *o.env_spec;
  if (o.cap) c.cap_per_page = *o.cap;
  if (o.mix_ratio) c.mix_ratio = *o.mix_ratio;
  if (o.val_ratio) c.val_ratio = *o.val_ratio;
  if (o.budget) c.traverse_budget = *o.budget;
  if (o.policy) c.traverse_policy = *o.policy;
  if (!o.history.empty()) {
    c.history_modes.clear();
    for (const auto& h : o.history) c.history_modes.push_back(HistoryMode::parse(h));
  }
  if (o.no_caption) c.caption_supervision = false;
  if (o.no_diversified) c.diversified_instructions = false;
  if (o.no_tiles) c.write_tiles = false;
  if (o.cot) c.visual_cot = true;
  if (o.planner) c.use_planner = true;
  validate_config(c);
  return c;
}

int run(const std::string& cmd, const Overrides& o) {
  const RunConfig c = resolve(o);
  std::ostream& log = std::cout;
  if (cmd == "extract") {
    run_extract(c, o.dry_run, log);
  } else if (cmd == "annotate" || cmd == "build-traj") {
    auto captioner = make_client(c.annotator);
    auto instructor = make_client(c.instructor);
    if (cmd == "annotate") {
      run_annotate(c, *captioner, *instructor, o.dry_run, log);
    } else {
      run_build_traj(c, *captioner, *instructor, o.dry_run, log);
    }
  } else if (cmd == "assemble") {
    run_assemble(c, o.dry_run, log);
  } else if (cmd == "traverse") {
    std::shared_ptr<ModelClient> scorer;
    if (c.traverse_policy == "model") scorer = make_client(c.annotator);
    run_traverse(c, scorer.get(), o.dry_run, log);
  } else if (cmd == "eval") {
    auto grounder = make_client(c.grounder);
    std::shared_ptr<ModelClient> planner;
    if (c.use_planner) planner = make_client(c.planner);
    run_eval(c, *grounder, planner.get(), o.dry_run, log);
  } else if (cmd == "stats") {
    if (o.dry_run) {
      log << "dry run: would read stage outputs under " << c.output_dir.generic_string() << "\n";
    } else {
      log << render_stats(collect_stats(c.output_dir));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GUI grounding data pipeline"};
  app.require_subcommand(1);
  Overrides o;

  auto* extract = app.add_subcommand("extract", "Classify and filter page snapshots");
  add_common(extract, o);
  extract->add_option("--snapshots", o.snapshots, "Directory of snapshot directories");
  extract->add_option("--blocklist", o.blocklist, "Harm keyword list");

  auto* annotate = app.add_subcommand("annotate", "Caption kept elements and generate instructions");
  add_common(annotate, o);
  annotate->add_option("--cap", o.cap, "Elements per page");

  auto* traj = app.add_subcommand("build-traj", "Add generated instructions to trajectory clicks");
  add_common(traj, o);
  traj->add_option("--trajectories", o.trajectories, "Directory of trajectory JSON files");

  auto* assemble = app.add_subcommand("assemble", "Build phase-1 and phase-2 training corpora");
  add_common(assemble, o);
  assemble->add_flag("--no-caption-supervision", o.no_caption, "Drop the caption sample per element");
  assemble->add_flag("--no-diversified-instructions", o.no_diversified, "Keep only the caption sample");
  assemble->add_option("--history", o.history, "History modes: none, text, interleaved1..3");
  assemble->add_option("--mix-ratio", o.mix_ratio, "Phase-2 single-step share");
  assemble->add_option("--val-ratio", o.val_ratio, "Share of conversations held out");
  assemble->add_flag("--no-tiles", o.no_tiles, "Skip writing image tiles");

  auto* traverse = app.add_subcommand("traverse", "Explore a synthetic desktop environment");
  add_common(traverse, o);
  traverse->add_option("--env", o.env_spec, "Environment description (JSON)");
  traverse->add_option("--budget", o.budget, "Environment actions allowed");
  traverse->add_option("--policy", o.policy, "order | model");

  auto* eval = app.add_subcommand("eval", "Score a grounder on a benchmark or trajectories");
  add_common(eval, o);
  eval->add_option("--benchmark", o.benchmark, "Benchmark JSONL");
  eval->add_option("--trajectories", o.trajectories, "Trajectories to score step by step");
  eval->add_option("--history", o.history, "History modes to evaluate");
  eval->add_flag("--cot", o.cot, "Prepend the visual chain-of-thought sentence");
  eval->add_flag("--planner", o.planner, "Use the planner for steps without instructions");

  auto* stats = app.add_subcommand("stats", "Print corpus counts per platform");
  add_common(stats, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return static_cast<int>(ErrorCategory::Config);
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, o);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.category()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Invariant);
  }
}
