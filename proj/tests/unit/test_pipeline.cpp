#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "uiground/error.hpp"
#include "uiground/json_io.hpp"
#include "uiground/pipeline.hpp"

using namespace uiground;

TEST_CASE("config errors list every bad field") {
  RunConfig c;
  c.mix_ratio = 1.5;
  c.val_ratio = -0.1;
  c.cap_per_page = 0;
  c.workers = 0;
  c.traverse_policy = "random";
  const auto errs = config_errors(c);
  CHECK(errs.size() >= 5);
  try {
    validate_config(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("mix_ratio") != std::string::npos);
    CHECK(what.find("val_ratio") != std::string::npos);
    CHECK(what.find("workers") != std::string::npos);
  }
  CHECK(config_errors(RunConfig{}).empty());
}

TEST_CASE("config file round trip and unknown keys") {
  fixtures::TempDir tmp("cfg");
  RunConfig c;
  c.seed = 99;
  c.snapshot_dir = "snaps";
  c.history_modes = {HistoryMode::textual(), HistoryMode::interleaved(2)};
  c.caption_supervision = false;
  c.grounder.kind = "openai";
  c.grounder.base_url = "http://localhost:8000/v1";
  Json j = c;
  write_json_file(tmp.path() / "c.json", j);
  const RunConfig back = load_run_config(tmp.path() / "c.json");
  CHECK(back.seed == 99);
  CHECK(back.snapshot_dir == "snaps");
  CHECK(back.history_modes == c.history_modes);
  CHECK_FALSE(back.caption_supervision);
  CHECK(back.grounder.base_url == c.grounder.base_url);
  CHECK(Json(back) == j);

  j["pipeline"]["colour"] = "blue";
  write_json_file(tmp.path() / "bad.json", j);
  CHECK_THROWS_AS(load_run_config(tmp.path() / "bad.json"), ConfigError);
  std::ofstream(tmp.path() / "broken.json") << "{ not json";
  CHECK_THROWS_AS(load_run_config(tmp.path() / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_run_config(tmp.path() / "missing.json"), ConfigError);
}

TEST_CASE("snapshot JSON round trip and clamping") {
  fixtures::TempDir tmp("snap");
  auto s = fixtures::page_with_valid(3);
  s.elements[0].attributes["aria-label"] = "first";
  s.elements.push_back(fixtures::button("edge", {1270, 790, 30, 30}));
  s.elements.push_back(fixtures::button("gone", {1300, 10, 30, 30}));
  save_snapshot(s, tmp.path());
  const auto back = load_snapshot(tmp.path());
  REQUIRE(back.elements.size() == 4);
  CHECK(back.elements[0] == s.elements[0]);
  CHECK(back.elements[3].bbox == BBox{1270, 790, 10, 10});
}

TEST_CASE("grounding sample JSON round trip") {
  GroundingSample g;
  g.sample_id = "x";
  g.platform = Platform::Mobile;
  g.image_refs = {"a.png", "b.png"};
  g.query = "tap";
  g.query_kind = QueryKind::ReferCaption;
  g.task = "t";
  g.history = std::vector<HistoryTurn>{{"Waited", "a.png"}};
  g.target_point = {1, 2};
  g.target_box = NormBBox{0, 0, 5, 5};
  g.source = "s";
  g.phase = Phase::ContextAware;
  const Json j = g;
  CHECK(j.get<GroundingSample>() == g);
}

TEST_CASE("stats on an empty output dir are zero") {
  fixtures::TempDir tmp("stats");
  const auto rows = collect_stats(tmp.path());
  CHECK(rows.size() == 3);
  for (const auto& [name, row] : rows) CHECK(row.images + row.elements + row.samples == 0);
  CHECK(render_stats(rows).find("total") != std::string::npos);
}

TEST_CASE("dry runs write nothing") {
  fixtures::TempDir tmp("dry");
  RunConfig c;
  c.snapshot_dir = tmp.path() / "snaps";
  std::filesystem::create_directories(c.snapshot_dir);
  c.output_dir = tmp.path() / "out";
  std::ostringstream log;
  run_extract(c, true, log);
  CHECK_THROWS_AS(run_assemble(c, true, log), InputError);
  CHECK_FALSE(std::filesystem::exists(c.output_dir));
}
