#include <fstream>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "uiground/assemble.hpp"
#include "uiground/error.hpp"
#include "uiground/prompts.hpp"

using namespace uiground;

namespace {

GroundingSample single(std::string id, std::string image, int x = 10, int y = 20) {
  GroundingSample s;
  s.sample_id = std::move(id);
  s.image_refs = {std::move(image)};
  s.query = "q " + s.sample_id;
  s.target_point = {x, y};
  s.source = "web";
  return s;
}

GroundingSample contextual(std::string id) {
  GroundingSample s = single(std::move(id), "ctx.png");
  s.phase = Phase::ContextAware;
  s.task = "do it";
  s.history = std::vector<HistoryTurn>{{"Typed \"a\" into the focused field", std::nullopt}};
  return s;
}

std::vector<GroundingSample> element_samples(std::size_t elements, const SampleFlags& flags) {
  std::vector<GroundingSample> out;
  for (std::size_t i = 0; i < elements; ++i) {
    const auto e = fixtures::button("e" + std::to_string(i), {10, 10, 40, 20});
    ElementCaption cap{e.id, "A button", "m", "k"};
    InstructionSet ins{e.id, {"a", "b", "c"}, "m"};
    auto s = make_samples(e, cap, ins, {1280, 800}, {"p", "p.png", Platform::Web, "web"}, flags);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

}  // namespace

TEST_CASE("samples per element") {
  CHECK(element_samples(5, {}).size() == 20);
  CHECK(element_samples(5, {false, true}).size() == 15);
  CHECK(element_samples(5, {true, false}).size() == 5);
  CHECK(element_samples(5, {false, false}).size() == 5);

  const auto s = element_samples(1, {});
  CHECK(s[0].query_kind == QueryKind::Instruction);
  CHECK(s[3].query_kind == QueryKind::ReferCaption);
  CHECK(s[3].query == "A button");
  for (const auto& g : s) {
    CHECK(check_sample(g).empty());
    REQUIRE(g.target_box);
    CHECK(point_in_bbox(g.target_point, *g.target_box));
  }
}

TEST_CASE("grouping: two turns per sample, user first") {
  std::vector<GroundingSample> five;
  for (int i = 0; i < 5; ++i) five.push_back(single("s" + std::to_string(i), "a.png", i, i));
  const auto c = group_conversations(five, 7);
  REQUIRE(c.turns.size() == 10);
  for (std::size_t k = 0; k < c.turns.size(); ++k) {
    CHECK(c.turns[k].role == (k % 2 == 0 ? "user" : "assistant"));
  }
  CHECK(c.turns[0].image_refs == std::vector<std::string>{"a.png"});
  CHECK(c.turns[2].image_refs.empty());
  CHECK(std::set<std::string>(c.sample_ids.begin(), c.sample_ids.end()).size() == 5);

  const auto one = group_conversations({single("x", "b.png", 3, 4)}, 7);
  REQUIRE(one.turns.size() == 2);
  CHECK(one.turns[1].content == "(3, 4)");
  CHECK(one.turns[0].content == std::string(prompts::kGroundingTemplate) + "q x");
}

TEST_CASE("grouping is reproducible for a seed") {
  std::vector<GroundingSample> many;
  for (int i = 0; i < 30; ++i) many.push_back(single("s" + std::to_string(i), "a.png", i, i));
  CHECK(group_conversations(many, 1) == group_conversations(many, 1));
  CHECK(group_conversations(many, 1).sample_ids != group_conversations(many, 2).sample_ids);
}

TEST_CASE("grouping rejects mixed images and empty input") {
  CHECK_THROWS_AS(group_conversations({}, 1), InputError);
  CHECK_THROWS_AS(group_conversations({single("a", "1.png"), single("b", "2.png")}, 1), InputError);
  const auto all = group_all({single("a", "2.png"), single("b", "1.png"), single("c", "2.png")}, 1);
  REQUIRE(all.size() == 2);
  CHECK(all[0].image_refs[0] == "1.png");
  CHECK(all[1].sample_ids.size() == 2);
}

TEST_CASE("context conversation layout") {
  const auto c = context_conversation(contextual("c1"));
  REQUIRE(c.turns.size() == 4);
  CHECK(c.turns[0].role == "user");
  CHECK(c.turns[0].content == "Task: do it");
  CHECK(c.turns[1].role == "assistant");
  CHECK(c.turns[2].role == "user");
  CHECK(c.turns[2].image_refs == std::vector<std::string>{"ctx.png"});
  CHECK(c.turns[3].content == "(10, 20)");
}

TEST_CASE("phase-2 mix counts") {
  std::vector<GroundingSample> ctx;
  for (int i = 0; i < 1000; ++i) ctx.push_back(contextual("c" + std::to_string(i)));
  std::vector<GroundingSample> pool;
  for (int i = 0; i < 10000; ++i) pool.push_back(single("p" + std::to_string(i), "x.png"));

  const auto mix = compose_phase2(ctx, pool, 3);
  CHECK(mix.size() == 1200);
  std::set<std::string> ids;
  std::size_t single_step = 0;
  for (const auto& s : mix) {
    ids.insert(s.sample_id);
    if (s.phase == Phase::SingleStep) ++single_step;
  }
  CHECK(ids.size() == 1200);
  CHECK(single_step == 200);
  CHECK(compose_phase2(ctx, pool, 3) == mix);

  CHECK(compose_phase2({}, pool, 3).empty());
  std::vector<GroundingSample> small(pool.begin(), pool.begin() + 100);
  CHECK_THROWS_AS(compose_phase2(ctx, small, 3), InputError);
  CHECK(phase2_mix_count(7, 0.2) == 1);
  CHECK(phase2_mix_count(8, 0.2) == 2);
}

TEST_CASE("serialize writes counted, digested files") {
  fixtures::TempDir tmp("corpus");
  Corpus corpus;
  std::vector<GroundingSample> ctx;
  for (int i = 0; i < 1000; ++i) ctx.push_back(contextual("c" + std::to_string(i)));
  std::vector<GroundingSample> pool;
  for (int i = 0; i < 300; ++i) pool.push_back(single("p" + std::to_string(i), "x.png"));
  corpus.samples = compose_phase2(ctx, pool, 3);
  for (const auto& s : corpus.samples) {
    if (s.phase == Phase::ContextAware) corpus.conversations.push_back(context_conversation(s));
  }
  const auto m = serialize(corpus, tmp.path(), 3, 0.1);
  CHECK(m.total() == 1200);
  CHECK(m.files.at(kSamplesFile).first == 1200);
  CHECK(validate_corpus(tmp.path()).total() == 1200);
  CHECK(m.split_counts.at("val") == 100);

  const auto back = read_corpus(tmp.path());
  CHECK(back.samples == corpus.samples);
  CHECK(back.conversations == corpus.conversations);

  std::ofstream(tmp.path() / kSamplesFile, std::ios::app) << "{}\n";
  CHECK_THROWS_AS(validate_corpus(tmp.path()), InvariantError);
}

TEST_CASE("serialize an empty corpus") {
  fixtures::TempDir tmp("empty");
  const auto m = serialize({}, tmp.path(), 1);
  CHECK(m.total() == 0);
  CHECK(validate_corpus(tmp.path()).total() == 0);
}

TEST_CASE("serialize refuses malformed samples") {
  fixtures::TempDir tmp("bad");
  Corpus c;
  c.samples.push_back(single("a", "x.png", 1001, 0));
  CHECK_THROWS_AS(serialize(c, tmp.path(), 1), InvariantError);
}
