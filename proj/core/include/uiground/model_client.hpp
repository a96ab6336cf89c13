#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "uiground/error.hpp"

namespace uiground {

enum class Capability { TextOnly, TextAndImages };

// One request/response exchange: a text prompt plus zero or more PNG images.
struct ModelRequest {
  std::string prompt;
  std::vector<std::vector<std::uint8_t>> images_png;
  // Optional prior turns (role, text) sent before the prompt.
  std::vector<std::pair<std::string, std::string>> history;
};

// Worth retrying: timeouts, rate limits, 5xx.
class TransientModelError : public ClientError {
 public:
  using ClientError::ClientError;
};

// Not worth retrying: bad request, auth failure, capability mismatch.
class PermanentModelError : public ClientError {
 public:
  using ClientError::ClientError;
};

struct ClientConfig {
  // "mock", "openai" (any OpenAI-compatible chat endpoint), or a test-only kind.
  std::string kind = "mock";
  std::string base_url;
  std::string model = "mock";
  // Name of the environment variable holding the bearer token.
  std::string auth_token_env;
  double timeout_seconds = 60.0;
  int max_in_flight = 4;
  Capability capability = Capability::TextAndImages;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
};

class ModelClient {
 public:
  virtual ~ModelClient() = default;

  // Throws TransientModelError or PermanentModelError.
  virtual std::string complete(const ModelRequest& request) = 0;
  virtual std::string model_name() const = 0;
  virtual Capability capability() const = 0;
  virtual int max_in_flight() const { return 1; }
};

// Mutex/condvar counting gate; C++20 counting_semaphore needs a compile-time max.
class RequestGate {
 public:
  explicit RequestGate(int slots);
  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int free_;
};

// Wraps a client so at most max_in_flight requests are outstanding.
class BoundedClient final : public ModelClient {
 public:
  explicit BoundedClient(std::shared_ptr<ModelClient> inner);

  std::string complete(const ModelRequest& request) override;
  std::string model_name() const override { return inner_->model_name(); }
  Capability capability() const override { return inner_->capability(); }
  int max_in_flight() const override { return inner_->max_in_flight(); }

 private:
  std::shared_ptr<ModelClient> inner_;
  RequestGate gate_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
};

// Retries TransientModelError with exponential backoff; rethrows the last
// error once retries are exhausted. PermanentModelError is never retried.
std::string complete_with_retry(ModelClient& client, const ModelRequest& request,
                                const RetryPolicy& policy);

// Deterministic offline client. Captions echo the element text and position
// found in the prompt; instruction prompts get a three-item numbered list
// derived from the caption. Counts calls.
class MockClient final : public ModelClient {
 public:
  explicit MockClient(std::string model = "mock", int max_in_flight = 4);

  std::string complete(const ModelRequest& request) override;
  std::string model_name() const override { return model_; }
  Capability capability() const override { return Capability::TextAndImages; }
  int max_in_flight() const override { return max_in_flight_; }

  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  std::string model_;
  int max_in_flight_;
  std::atomic<std::uint64_t> calls_{0};
};

// Replays a queue of canned outcomes, then repeats the last one. Test helper,
// but public so downstream tooling can script clients too.
class ScriptedClient final : public ModelClient {
 public:
  struct Step {
    enum class Kind { Reply, Transient, Permanent } kind = Kind::Reply;
    std::string text;
  };

  explicit ScriptedClient(std::vector<Step> steps, Capability cap = Capability::TextAndImages,
                          std::string model = "scripted");

  std::string complete(const ModelRequest& request) override;
  std::string model_name() const override { return model_; }
  Capability capability() const override { return cap_; }

  std::uint64_t calls() const;
  std::vector<ModelRequest> requests() const;

 private:
  mutable std::mutex mu_;
  std::deque<Step> steps_;
  Step last_;
  Capability cap_;
  std::string model_;
  std::uint64_t calls_ = 0;
  std::vector<ModelRequest> requests_;
};

// Calls a user function; for tests and for grounders defined in code.
class FunctionClient final : public ModelClient {
 public:
  using Fn = std::function<std::string(const ModelRequest&)>;
  FunctionClient(Fn fn, std::string model = "function",
                 Capability cap = Capability::TextAndImages, int max_in_flight = 1);

  std::string complete(const ModelRequest& request) override;
  std::string model_name() const override { return model_; }
  Capability capability() const override { return cap_; }
  int max_in_flight() const override { return max_in_flight_; }

  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  Fn fn_;
  std::string model_;
  Capability cap_;
  int max_in_flight_;
  std::atomic<std::uint64_t> calls_{0};
};

// Any OpenAI-compatible /v1/chat/completions endpoint. Images are sent as
// base64 PNG data URLs. Token read from the environment variable named in config.
class OpenAiCompatibleClient final : public ModelClient {
 public:
  explicit OpenAiCompatibleClient(ClientConfig config);

  std::string complete(const ModelRequest& request) override;
  std::string model_name() const override { return config_.model; }
  Capability capability() const override { return config_.capability; }
  int max_in_flight() const override { return config_.max_in_flight; }

  // Request body for `request`; exposed for tests.
  std::string request_body(const ModelRequest& request) const;

 private:
  ClientConfig config_;
};

// Builds the client for a config, wrapped in a BoundedClient.
// Throws ConfigError for unknown kinds.
std::shared_ptr<ModelClient> make_client(const ClientConfig& config);

}  // namespace uiground
