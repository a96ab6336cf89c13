#include "doctest.h"
#include "fixtures.hpp"
#include "uiground/annotate.hpp"
#include "uiground/prompts.hpp"

using namespace uiground;
using Step = ScriptedClient::Step;

namespace {

const RetryPolicy kFast{3, std::chrono::milliseconds(0)};

ScriptedClient replies(std::vector<std::string> texts) {
  std::vector<Step> steps;
  for (auto& t : texts) steps.push_back({Step::Kind::Reply, std::move(t)});
  return ScriptedClient(std::move(steps));
}

}  // namespace

TEST_CASE("position descriptors") {
  CHECK(prompts::position_descriptor({500, 500}) == "middle center");
  CHECK(prompts::position_descriptor({900, 50}) == "top right");
  CHECK(prompts::position_descriptor({0, 1000}) == "bottom left");
}

TEST_CASE("caption prompt carries HTML text or the no-text marker") {
  auto e = fixtures::button("s", {10, 10, 80, 30}, "Subscribe");
  CHECK(element_html_text(e) == "<button>Subscribe</button>");
  e.text.clear();
  CHECK(element_html_text(e).empty());
  e.attributes["aria-label"] = "Close";
  CHECK(element_html_text(e).find("Close") != std::string::npos);

  const auto p = prompts::caption_prompt("", {500, 500});
  CHECK(p.find(prompts::kNoHtmlText) != std::string::npos);
  CHECK(p.find("middle center") != std::string::npos);
}

TEST_CASE("subscribe button end to end with scripted models") {
  const Image img = fixtures::gradient(400, 300);
  const auto e = fixtures::button("sub", {150, 120, 100, 40}, "Subscribe");
  const std::string caption = "A red rounded button labelled Subscribe in the middle of the page.";
  auto captioner = replies({caption});
  auto instructor = replies({"1. Subscribe to the channel\n2. Press the red Subscribe button\n3. Sign up for updates"});
  AnnotationCache cache;
  AnnotationContext ctx{captioner, instructor, cache, kFast};

  const auto crops = crop_pair(img, e.bbox);
  const auto c = caption_element(e, crops, img.viewport(), ctx);
  REQUIRE(c.ok());
  CHECK(c.value->caption == caption);
  CHECK(c.value->element_id == "sub");
  CHECK(c.value->source_model == "scripted");

  const auto req = captioner.requests().at(0);
  CHECK(req.images_png.size() == 2);
  CHECK(req.prompt.find("<button>Subscribe</button>") != std::string::npos);

  const auto ins = generate_instructions(*c.value, ctx);
  REQUIRE(ins.ok());
  CHECK(ins.value->instructions ==
        std::vector<std::string>{"Subscribe to the channel", "Press the red Subscribe button",
                                 "Sign up for updates"});
  CHECK(instructor.requests().at(0).prompt.find(caption) != std::string::npos);
}

TEST_CASE("numbered list parsing") {
  CHECK(parse_numbered_list("1. a\n2. b\n3. c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(parse_numbered_list("Sure!\n1) \"a\"\n  2. b\n\n3.c\nthanks") ==
        std::vector<std::string>{"a", "b", "c"});
  CHECK(parse_numbered_list("no list here").empty());
  CHECK(distinct_instructions({"Open it", "open  IT", "Close it", "Move it", "x"}) ==
        std::vector<std::string>{"Open it", "Close it", "Move it"});
}

TEST_CASE("duplicate instructions trigger one re-ask, then a skip") {
  ElementCaption cap{"e", "A button", "m", "k"};
  AnnotationCache cache;
  {
    auto instructor = replies({"1. a\n2. a\n3. a", "1. a\n2. b\n3. c"});
    auto captioner = replies({"unused"});
    AnnotationContext ctx{captioner, instructor, cache, kFast};
    const auto out = generate_instructions(cap, ctx);
    REQUIRE(out.ok());
    CHECK(instructor.calls() == 2);
    CHECK(instructor.requests()[1].prompt.find(prompts::kInstructionReask) != std::string::npos);
  }
  {
    AnnotationCache fresh;
    ElementCaption other{"f", "A different button", "m", "k"};
    auto instructor = replies({"1. a\n2. a\n3. a"});
    auto captioner = replies({"unused"});
    AnnotationContext ctx{captioner, instructor, fresh, kFast};
    const auto out = generate_instructions(other, ctx);
    CHECK_FALSE(out.ok());
    CHECK(instructor.calls() == 2);
  }
}

TEST_CASE("a timing-out captioner skips the element after limit + 1 attempts") {
  const Image img = fixtures::gradient(200, 100);
  const auto e = fixtures::button("t", {10, 10, 50, 20});
  ScriptedClient captioner({{Step::Kind::Transient, "timeout"}});
  auto instructor = replies({"1. a\n2. b\n3. c"});
  AnnotationCache cache;
  AnnotationContext ctx{captioner, instructor, cache, kFast};
  const auto out = caption_element(e, crop_pair(img, e.bbox), img.viewport(), ctx);
  CHECK_FALSE(out.ok());
  CHECK(captioner.calls() == 4);
  CHECK(instructor.calls() == 0);
}

TEST_CASE("text-only captioner is rejected") {
  const Image img = fixtures::gradient(200, 100);
  const auto e = fixtures::button("t", {10, 10, 50, 20});
  ScriptedClient captioner({{Step::Kind::Reply, "x"}}, Capability::TextOnly);
  auto instructor = replies({"1. a\n2. b\n3. c"});
  AnnotationCache cache;
  AnnotationContext ctx{captioner, instructor, cache, kFast};
  CHECK_FALSE(caption_element(e, crop_pair(img, e.bbox), img.viewport(), ctx).ok());
  CHECK(captioner.calls() == 0);
}

TEST_CASE("cache: a second pass makes no model calls") {
  fixtures::TempDir tmp("cache");
  auto s = fixtures::page_with_valid(30);
  classify_elements(s);
  const Image img = fixtures::gradient(1280, 800);

  MockClient cap1;
  MockClient ins1;
  AnnotationCache cache1(tmp.path());
  AnnotationContext ctx1{cap1, ins1, cache1, kFast};
  const auto first = annotate_snapshot(s, img, ctx1, 25, 4);
  CHECK(first.elements.size() == 25);
  CHECK(cap1.calls() == 25);

  MockClient cap2;
  MockClient ins2;
  AnnotationCache cache2(tmp.path());
  AnnotationContext ctx2{cap2, ins2, cache2, kFast};
  const auto second = annotate_snapshot(s, img, ctx2, 25, 1);
  CHECK(cap2.calls() == 0);
  CHECK(ins2.calls() == 0);
  REQUIRE(second.elements.size() == first.elements.size());
  for (std::size_t i = 0; i < first.elements.size(); ++i) {
    CHECK(second.elements[i].caption == first.elements[i].caption);
    CHECK(second.elements[i].instructions == first.elements[i].instructions);
  }
}

TEST_CASE("cache keys depend on stage, prompt and images") {
  const auto k = AnnotationCache::make_key("caption", "p", {"d1"});
  CHECK(k == AnnotationCache::make_key("caption", "p", {"d1"}));
  CHECK(k != AnnotationCache::make_key("instruction", "p", {"d1"}));
  CHECK(k != AnnotationCache::make_key("caption", "p2", {"d1"}));
  CHECK(k != AnnotationCache::make_key("caption", "p", {"d2"}));
}

TEST_CASE("annotate_snapshot caps elements and checks the screenshot size") {
  auto s = fixtures::page_with_valid(30);
  classify_elements(s);
  MockClient cap;
  MockClient ins;
  AnnotationCache cache;
  AnnotationContext ctx{cap, ins, cache, kFast};
  const auto page = annotate_snapshot(s, fixtures::gradient(1280, 800), ctx, 25);
  CHECK(page.elements.size() == 25);
  CHECK(page.skipped.empty());
  for (const auto& a : page.elements) CHECK(a.instructions.instructions.size() == 3);
  CHECK_THROWS_AS(annotate_snapshot(s, fixtures::gradient(100, 100), ctx, 25), InputError);
}
