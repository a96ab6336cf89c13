#include "uiground/model_client.hpp"

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

#include <cstdlib>
#include <thread>

#include "uiground/digest.hpp"
#include "uiground/prompts.hpp"

namespace uiground {

RequestGate::RequestGate(int slots) : free_(slots < 1 ? 1 : slots) {}

void RequestGate::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void RequestGate::release() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

BoundedClient::BoundedClient(std::shared_ptr<ModelClient> inner)
    : inner_(std::move(inner)), gate_(inner_->max_in_flight()) {}

std::string BoundedClient::complete(const ModelRequest& request) {
  gate_.acquire();
  struct Release {
    RequestGate& g;
    ~Release() { g.release(); }
  } release{gate_};
  return inner_->complete(request);
}

std::string complete_with_retry(ModelClient& client, const ModelRequest& request,
                                const RetryPolicy& policy) {
  if (!request.images_png.empty() && client.capability() != Capability::TextAndImages) {
    throw PermanentModelError("model '" + client.model_name() + "' does not accept images");
  }
  auto delay = policy.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return client.complete(request);
    } catch (const TransientModelError&) {
      if (attempt >= policy.max_retries) throw;
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

MockClient::MockClient(std::string model, int max_in_flight)
    : model_(std::move(model)), max_in_flight_(max_in_flight) {}

std::string MockClient::complete(const ModelRequest& request) {
  calls_.fetch_add(1);
  const std::string& p = request.prompt;
  if (p.rfind(prompts::kCaptionHeader, 0) == 0) {
    const std::string html = prompts::prompt_field(p, "HTML text: ");
    std::string pos = prompts::prompt_field(p, "Screen position: ");
    pos = pos.substr(0, pos.find(" ("));
    const std::string what =
        html == prompts::kNoHtmlText ? std::string("unlabeled icon") : "control showing " + html;
    return "A " + what + ", placed in the " + pos + " part of the screen.";
  }
  if (p.rfind(prompts::kInstructionHeader, 0) == 0) {
    std::string caption = prompts::prompt_field(p, "Caption: ");
    if (caption.rfind("A ", 0) == 0) caption = caption.substr(2);
    if (!caption.empty() && caption.back() == '.') caption.pop_back();
    return "1. Click the " + caption + "\n2. Select the " + caption + "\n3. Open the " + caption;
  }
  if (p.rfind(prompts::kPlannerHeader, 0) == 0) return "wait";
  if (p.find(prompts::kGroundingTemplate) != std::string::npos) return "(500, 500)";
  return "ok";
}

ScriptedClient::ScriptedClient(std::vector<Step> steps, Capability cap, std::string model)
    : steps_(steps.begin(), steps.end()), cap_(cap), model_(std::move(model)) {
  if (!steps_.empty()) last_ = steps_.back();
}

std::string ScriptedClient::complete(const ModelRequest& request) {
  Step step;
  {
    std::lock_guard lock(mu_);
    ++calls_;
    requests_.push_back(request);
    if (!steps_.empty()) {
      step = steps_.front();
      steps_.pop_front();
    } else {
      step = last_;
    }
  }
  switch (step.kind) {
    case Step::Kind::Transient: throw TransientModelError("scripted transient: " + step.text);
    case Step::Kind::Permanent: throw PermanentModelError("scripted permanent: " + step.text);
    case Step::Kind::Reply: break;
  }
  return step.text;
}

std::uint64_t ScriptedClient::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::vector<ModelRequest> ScriptedClient::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

FunctionClient::FunctionClient(Fn fn, std::string model, Capability cap, int max_in_flight)
    : fn_(std::move(fn)), model_(std::move(model)), cap_(cap), max_in_flight_(max_in_flight) {}

std::string FunctionClient::complete(const ModelRequest& request) {
  calls_.fetch_add(1);
  return fn_(request);
}

OpenAiCompatibleClient::OpenAiCompatibleClient(ClientConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("client '" + config_.model + "': empty base_url");
}

std::string OpenAiCompatibleClient::request_body(const ModelRequest& request) const {
  using nlohmann::json;
  json messages = json::array();
  for (const auto& [role, text] : request.history) {
    messages.push_back({{"role", role}, {"content", text}});
  }
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  for (const auto& png : request.images_png) {
    content.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
  }
  messages.push_back({{"role", "user"}, {"content", content}});
  json body = {{"model", config_.model}, {"messages", messages}, {"temperature", 0}};
  return body.dump();
}

std::string OpenAiCompatibleClient::complete(const ModelRequest& request) {
  // base_url = scheme://host[:port][/prefix]
  const std::string& url = config_.base_url;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client http(origin);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  const auto usecs = static_cast<time_t>((config_.timeout_seconds - secs) * 1e6);
  http.set_connection_timeout(secs, usecs);
  http.set_read_timeout(secs, usecs);
  http.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!config_.auth_token_env.empty()) {
    const char* token = std::getenv(config_.auth_token_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw PermanentModelError("environment variable " + config_.auth_token_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  auto res = http.Post(prefix + "/chat/completions", headers, request_body(request),
                       "application/json");
  if (!res) {
    throw TransientModelError(config_.model + ": transport error: " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 408 || status == 429 || status >= 500) {
    throw TransientModelError(config_.model + ": HTTP " + std::to_string(status));
  }
  if (status != 200) {
    throw PermanentModelError(config_.model + ": HTTP " + std::to_string(status) + ": " +
                              res->body.substr(0, 200));
  }
  try {
    const auto body = nlohmann::json::parse(res->body);
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw PermanentModelError(config_.model + ": malformed response: " + e.what());
  }
}

std::shared_ptr<ModelClient> make_client(const ClientConfig& config) {
  std::shared_ptr<ModelClient> inner;
  if (config.kind == "mock") {
    inner = std::make_shared<MockClient>(config.model, config.max_in_flight);
  } else if (config.kind == "openai") {
    inner = std::make_shared<OpenAiCompatibleClient>(config);
  } else {
    throw ConfigError("unknown client kind '" + config.kind + "'");
  }
  return std::make_shared<BoundedClient>(std::move(inner));
}

}  // namespace uiground
