#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "uiground/error.hpp"
#include "uiground/eval.hpp"
#include "uiground/prompts.hpp"

using namespace uiground;

namespace {

BenchmarkItem item(std::string id, std::string subset, NormBBox box) {
  BenchmarkItem it;
  it.item_id = id;
  it.image_ref = id + ".png";
  it.query = "find " + id;
  it.gt_box = box;
  it.subset = std::move(subset);
  return it;
}

std::vector<std::uint8_t> no_image(const std::string&) { return {0}; }

// Replies with the center of the box whose query appears in the prompt.
FunctionClient oracle(const std::vector<BenchmarkItem>& items) {
  return FunctionClient([items](const ModelRequest& r) {
    for (const auto& it : items) {
      if (r.prompt.ends_with(it.query)) {
        const auto c = it.gt_box.center();
        return "(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
      }
    }
    return std::string("(0, 0)");
  });
}

}  // namespace

TEST_CASE("parse_prediction examples") {
  CHECK(parse_prediction("(512, 340)") == NormPoint{512, 340});
  CHECK(parse_prediction("The target is at (100, 200).") == NormPoint{100, 200});
  CHECK_FALSE(parse_prediction("click somewhere").has_value());
  CHECK(parse_prediction("(1001, 5) no, (3,4)") == NormPoint{3, 4});
  CHECK(parse_prediction("((7 , 8 ))") == NormPoint{7, 8});
  CHECK_FALSE(parse_prediction("(-1, 5)").has_value());
  CHECK_FALSE(parse_prediction("(12345, 5)").has_value());
  CHECK_FALSE(parse_prediction("(1.5, 2)").has_value());
  CHECK_FALSE(parse_prediction("(").has_value());
  CHECK_FALSE(parse_prediction("").has_value());
  CHECK(parse_prediction("(1000,1000)") == NormPoint{1000, 1000});
  CHECK(parse_prediction("(0005, 0000007)") == NormPoint{5, 7});
}

TEST_CASE("score_item is inclusive and misses on no prediction") {
  const auto it = item("a", "web", {400, 450, 600, 550});
  CHECK(score_item(NormPoint{500, 500}, it));
  CHECK(score_item(NormPoint{600, 550}, it));
  CHECK_FALSE(score_item(NormPoint{601, 500}, it));
  CHECK_FALSE(score_item(std::nullopt, it));
}

TEST_CASE("micro average is item weighted") {
  std::map<std::string, SubsetResult> s{{"a", {90, 100}}, {"b", {25, 50}}};
  CHECK(micro_average(s) == doctest::Approx(0.766667).epsilon(1e-6));
  CHECK(micro_average(std::vector<SubsetResult>{{3, 4}}) == 0.75);
  CHECK(micro_average(std::vector<SubsetResult>{{5, 5}, {2, 2}}) == 1.0);
  CHECK_THROWS_AS(micro_average(std::vector<SubsetResult>{}), InputError);
  CHECK_THROWS_AS(micro_average(std::vector<SubsetResult>{{0, 0}}), InputError);
}

TEST_CASE("oracle and origin grounders") {
  std::vector<BenchmarkItem> items;
  for (int i = 0; i < 40; ++i) {
    items.push_back(item("i" + std::to_string(i), i % 2 ? "web" : "mobile",
                         {10 + i, 20 + i, 100 + 5 * i, 90 + 3 * i}));
  }
  auto good = oracle(items);
  const auto r = evaluate(items, good, no_image, {{}, 4, {}, 1});
  CHECK(r.micro_avg == 1.0);
  CHECK(r.subsets.at("web").total == 20);
  CHECK(r.unparseable == 0);
  CHECK(std::abs(r.recomputed_micro_average() - r.micro_avg) < 1e-12);

  FunctionClient origin([](const ModelRequest&) { return std::string("(0, 0)"); });
  CHECK(evaluate(items, origin, no_image, {}).micro_avg == 0.0);

  FunctionClient silent([](const ModelRequest&) { return std::string("I am not sure."); });
  const auto s = evaluate(items, silent, no_image, {});
  CHECK(s.unparseable == 40);
  CHECK(s.micro_avg == 0.0);
}

TEST_CASE("client failures are misses, not crashes") {
  std::vector<BenchmarkItem> items{item("a", "web", {0, 0, 1000, 1000})};
  FunctionClient broken([](const ModelRequest&) -> std::string { throw PermanentModelError("down"); });
  const auto r = evaluate(items, broken, no_image, {});
  CHECK(r.micro_avg == 0.0);
  CHECK_FALSE(r.verdicts[0].error.empty());
}

TEST_CASE("CoT prompt begins with the verbatim sentence") {
  const auto q = build_grounding_query("the OK button", "x.png", std::nullopt, {true, HistoryMode::none()});
  CHECK(q.request.prompt.starts_with("Think step-by-step with visual clues before giving the answer."));
  CHECK(q.request.prompt.ends_with("the OK button"));
  const auto plain = build_grounding_query("the OK button", "x.png", std::nullopt, {});
  CHECK(plain.request.prompt == std::string(prompts::kGroundingTemplate) + "the OK button");
}

TEST_CASE("history turns and interleaved images") {
  ItemContext ctx{"Set an alarm", {{"Opened app \"Clock\"", "s0.png"}, {"Clicked on: Alarm", "s1.png"}}};
  const auto none = build_grounding_query("q", "s2.png", ctx, {false, HistoryMode::none()});
  CHECK(none.request.history.empty());
  CHECK(none.image_refs == std::vector<std::string>{"s2.png"});

  const auto text = build_grounding_query("q", "s2.png", ctx, {false, HistoryMode::textual()});
  REQUIRE(text.request.history.size() == 3);
  CHECK(text.request.history[0].second == "Task: Set an alarm");
  CHECK(text.request.history[2].first == "assistant");
  CHECK(text.image_refs.size() == 1);

  const auto one = build_grounding_query("q", "s2.png", ctx, {false, HistoryMode::interleaved(1)});
  CHECK(one.image_refs == std::vector<std::string>{"s1.png", "s2.png"});
  const auto three = build_grounding_query("q", "s2.png", ctx, {false, HistoryMode::interleaved(3)});
  CHECK(three.image_refs == std::vector<std::string>{"s0.png", "s1.png", "s2.png"});
}

TEST_CASE("ablation emits one report per configuration over the same items") {
  std::vector<BenchmarkItem> items{item("a", "web", {0, 0, 500, 500}), item("b", "web", {500, 500, 1000, 1000})};
  auto g = oracle(items);
  AblationConfig cfg;
  cfg.history = {HistoryMode::none(), HistoryMode::textual()};
  const auto runs = run_ablation(items, g, no_image, cfg);
  REQUIRE(runs.size() == 4);
  CHECK(runs[0].name == "cot=off,history=none");
  for (const auto& r : runs) {
    CHECK(r.report.verdicts.size() == 2);
    CHECK(r.report.verdicts[1].item_id == "b");
  }
}

TEST_CASE("report output") {
  std::vector<BenchmarkItem> items{item("a", "web", {0, 0, 500, 500})};
  auto g = oracle(items);
  const auto r = evaluate(items, g, no_image, {});
  CHECK(micro_avg_line(0.766666666) == "micro_avg=0.7667");
  CHECK(render_report_table(r).find("micro_avg=1.0000") != std::string::npos);
  fixtures::TempDir tmp("report");
  write_report(r, tmp.path() / "r.json", tmp.path() / "r.txt");
  CHECK(std::filesystem::exists(tmp.path() / "r.json"));
  CHECK(std::filesystem::exists(tmp.path() / "r.txt"));
}

TEST_CASE("load_benchmark validates lines") {
  fixtures::TempDir tmp("bench");
  const auto f = tmp.path() / "items.jsonl";
  std::ofstream(f) << R"({"id":"a","image":"a.png","query":"q","gt_box":[1,2,30,40],"subset":"web"})" << "\n"
                   << R"({"id":"b","image":"b.png","query":"q","gt_box":[1,2,30,40],"subset":"mobile","context":{"task":"t","steps":[{"text":"Waited"}]}})"
                   << "\n";
  const auto items = load_benchmark(f);
  REQUIRE(items.size() == 2);
  CHECK(items[0].gt_box == NormBBox{1, 2, 30, 40});
  REQUIRE(items[1].context);
  CHECK(items[1].context->steps.size() == 1);

  const auto bad = tmp.path() / "bad.jsonl";
  std::ofstream(bad) << R"({"id":"a","image":"a.png","query":"q","gt_box":[30,2,1,40]})" << "\n";
  CHECK_THROWS_AS(load_benchmark(bad), InputError);
}

TEST_CASE("planned action parsing") {
  const auto c = parse_planned_action("click: the Save button\nextra");
  REQUIRE(c);
  CHECK(c->kind == "click");
  CHECK(c->argument == "the Save button");
  CHECK(parse_planned_action("Enter")->kind == "enter");
  CHECK_FALSE(parse_planned_action("type:").has_value());
  CHECK_FALSE(parse_planned_action("dance: now").has_value());
}

namespace {

Trajectory alarm() {
  Trajectory t;
  t.id = "t";
  t.task = "Set an alarm";
  auto st = [](std::size_t i, Action a) {
    TrajectoryStep s;
    s.index = i;
    s.action = std::move(a);
    s.screenshot_ref = "s" + std::to_string(i) + ".png";
    s.viewport = {1000, 1000};
    return s;
  };
  t.steps = {st(0, action::OpenApp{"Clock"}), st(1, action::Click{{150, 150}, BBox{100, 100, 100, 100}, "Alarm"}),
             st(2, action::Type{"7:00"})};
  return t;
}

}  // namespace

TEST_CASE("trajectory eval, low level") {
  auto t = alarm();
  t.steps[0].instruction = "open clock";
  t.steps[1].instruction = "tap alarm";
  t.steps[2].instruction = "type time";
  FunctionClient hit([](const ModelRequest&) { return std::string("(150, 150)"); });
  const auto r = eval_trajectory(t, hit, HistoryMode::textual(), nullptr, no_image);
  CHECK(r.click_steps == 1);
  CHECK(r.grounding_acc == 1.0);
  CHECK(r.task_success);

  FunctionClient miss([](const ModelRequest&) { return std::string("(900, 900)"); });
  const auto m = eval_trajectory(t, miss, HistoryMode::textual(), nullptr, no_image);
  CHECK(m.grounding_acc == 0.0);
  CHECK_FALSE(m.task_success);
  CHECK(m.step_success == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("trajectory eval, high level with a planner") {
  const auto t = alarm();
  ScriptedClient planner({{ScriptedClient::Step::Kind::Reply, "open_app: Clock"},
                          {ScriptedClient::Step::Kind::Reply, "click: the Alarm tab"},
                          {ScriptedClient::Step::Kind::Reply, "type: 7:30"}});
  FunctionClient hit([](const ModelRequest&) { return std::string("(150, 150)"); });
  const auto r = eval_trajectory(t, hit, HistoryMode::interleaved(1), &planner, no_image);
  CHECK(r.step_successes == 2);
  CHECK(r.grounding_acc == 1.0);
  CHECK_FALSE(r.task_success);
  CHECK(planner.calls() == 3);

  auto no_box = t;
  std::get<action::Click>(no_box.steps[1].action).bbox.reset();
  no_box.steps[1].instruction = "tap alarm";
  CHECK_THROWS_AS(eval_trajectory(no_box, hit, HistoryMode::none(), nullptr, no_image), InputError);
}
