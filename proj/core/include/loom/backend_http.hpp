#pragma once

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>

#include "loom/backends.hpp"

namespace loom {

// Connection settings for an OpenAI-style chat completions endpoint. The
// bearer token is read from the environment variable named by auth_env so
// secrets never pass through config files; an empty auth_env means no auth
// header. backoff_base_s exists so tests can shrink the retry waits.
struct EndpointConfig {
  std::string base_url;
  std::string model;
  std::string auth_env;
  double temperature = 0.8;
  double timeout_s = 30.0;
  int max_retries = 3;
  int max_concurrency = 4;
  double backoff_base_s = 1.0;
};

// Counting gate limiting in-flight requests across all backends built from
// one factory.
class ConcurrencyGate {
 public:
  explicit ConcurrencyGate(int limit) : available_(limit < 1 ? 1 : limit) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    released_.wait(lock, [this] { return available_ > 0; });
    --available_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++available_;
    }
    released_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable released_;
  int available_;
};

// Chat backend speaking the /v1/chat/completions protocol. 429 and 5xx
// responses, timeouts and transport failures retry with exponential backoff
// plus jitter; other HTTP failures throw HttpError immediately. After the
// retry budget: TimeoutError when the last failure was a timeout,
// RetryExhausted otherwise. Throws ConfigError at construction when auth_env
// names an unset variable.
class HttpBackend final : public ChatBackend {
 public:
  HttpBackend(EndpointConfig config, std::shared_ptr<ConcurrencyGate> gate,
              std::uint64_t seed = 0);

  std::string complete(const GenerationRequest& request) override;
  std::string name() const override { return "http:" + config_.model; }

 private:
  EndpointConfig config_;
  std::shared_ptr<ConcurrencyGate> gate_;
  std::string auth_token_;
  std::uint64_t seed_;
};

class HttpBackendFactory final : public BackendFactory {
 public:
  explicit HttpBackendFactory(EndpointConfig config)
      : config_(std::move(config)),
        gate_(std::make_shared<ConcurrencyGate>(config_.max_concurrency)) {}

  std::unique_ptr<ChatBackend> make(const TaskSpec& task, std::uint64_t seed) const override;
  std::string name() const override { return "http:" + config_.model; }

 private:
  EndpointConfig config_;
  std::shared_ptr<ConcurrencyGate> gate_;
};

// Parses the assistant message content out of a chat completions response
// body. Throws BackendError on anything malformed.
std::string parse_completion_body(const std::string& body);

}  // namespace loom
