#include "doctest.h"
#include "uiground/error.hpp"
#include "uiground/json_io.hpp"
#include "uiground/model_client.hpp"
#include "uiground/prompts.hpp"

using namespace uiground;
using Step = ScriptedClient::Step;

namespace {
const RetryPolicy kFast{3, std::chrono::milliseconds(0)};
}

TEST_CASE("transient errors are retried up to the limit") {
  ScriptedClient c({{Step::Kind::Transient, ""}, {Step::Kind::Transient, ""}, {Step::Kind::Reply, "ok"}});
  CHECK(complete_with_retry(c, {"hi", {}, {}}, kFast) == "ok");
  CHECK(c.calls() == 3);

  ScriptedClient always({{Step::Kind::Transient, ""}});
  CHECK_THROWS_AS(complete_with_retry(always, {"hi", {}, {}}, kFast), TransientModelError);
  CHECK(always.calls() == 4);
}

TEST_CASE("permanent errors are not retried") {
  ScriptedClient c({{Step::Kind::Permanent, "bad request"}, {Step::Kind::Reply, "ok"}});
  CHECK_THROWS_AS(complete_with_retry(c, {"hi", {}, {}}, kFast), PermanentModelError);
  CHECK(c.calls() == 1);
}

TEST_CASE("a text-only client refuses images before any call") {
  ScriptedClient c({{Step::Kind::Reply, "ok"}}, Capability::TextOnly);
  ModelRequest r{"look", {{1, 2, 3}}, {}};
  CHECK_THROWS_AS(complete_with_retry(c, r, kFast), PermanentModelError);
  CHECK(c.calls() == 0);
  r.images_png.clear();
  CHECK(complete_with_retry(c, r, kFast) == "ok");
}

TEST_CASE("scripted client repeats its last step and records requests") {
  ScriptedClient c({{Step::Kind::Reply, "a"}, {Step::Kind::Reply, "b"}});
  CHECK(c.complete({"1", {}, {}}) == "a");
  CHECK(c.complete({"2", {}, {}}) == "b");
  CHECK(c.complete({"3", {}, {}}) == "b");
  REQUIRE(c.requests().size() == 3);
  CHECK(c.requests()[2].prompt == "3");
}

TEST_CASE("openai request body shape") {
  ClientConfig cfg;
  cfg.kind = "openai";
  cfg.model = "m1";
  cfg.base_url = "http://127.0.0.1:1/v1";
  OpenAiCompatibleClient c(cfg);
  ModelRequest r{"where?", {{0x89, 0x50}}, {{"assistant", "earlier"}}};
  const auto body = Json::parse(c.request_body(r));
  CHECK(body["model"] == "m1");
  CHECK(body["temperature"] == 0);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "assistant");
  const auto& content = body["messages"][1]["content"];
  CHECK(content[0]["text"] == "where?");
  CHECK(content[1]["image_url"]["url"] == "data:image/png;base64,iVA=");
}

TEST_CASE("unreachable endpoint is a transient client error") {
  ClientConfig cfg;
  cfg.kind = "openai";
  cfg.base_url = "http://127.0.0.1:9";
  cfg.timeout_seconds = 0.5;
  OpenAiCompatibleClient c(cfg);
  CHECK_THROWS_AS(c.complete({"x", {}, {}}), TransientModelError);
}

TEST_CASE("make_client") {
  ClientConfig cfg;
  CHECK(make_client(cfg)->model_name() == "mock");
  cfg.kind = "telepathy";
  CHECK_THROWS_AS(make_client(cfg), ConfigError);
}

TEST_CASE("mock client is deterministic") {
  MockClient m;
  const std::string prompt = prompts::caption_prompt("<button>Save</button>", {900, 100});
  const auto a = m.complete({prompt, {}, {}});
  CHECK(a == m.complete({prompt, {}, {}}));
  CHECK(a.find("Save") != std::string::npos);
  CHECK(a.find("top right") != std::string::npos);
  CHECK(m.calls() == 2);
}

TEST_CASE("request gate bounds concurrency") {
  std::atomic<int> live{0};
  std::atomic<int> peak{0};
  auto inner = std::make_shared<FunctionClient>(
      [&](const ModelRequest&) {
        const int now = ++live;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        --live;
        return std::string("ok");
      },
      "f", Capability::TextAndImages, 2);
  BoundedClient bounded(inner);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { bounded.complete({"x", {}, {}}); });
  for (auto& t : threads) t.join();
  CHECK(peak.load() <= 2);
  CHECK(inner->calls() == 8);
}
