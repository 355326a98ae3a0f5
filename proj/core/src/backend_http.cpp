#include "loom/backend_http.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "loom/digest.hpp"
#include "loom/errors.hpp"
#include "loom/rng.hpp"

namespace loom {

HttpBackend::HttpBackend(EndpointConfig config, std::shared_ptr<ConcurrencyGate> gate,
                         std::uint64_t seed)
    : config_(std::move(config)), gate_(std::move(gate)), seed_(seed) {
  if (config_.base_url.empty()) throw ConfigError("http backend requires an endpoint URL");
  if (!config_.auth_env.empty()) {
    const char* token = std::getenv(config_.auth_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw ConfigError("auth environment variable not set: " + config_.auth_env);
    }
    auth_token_ = token;
  }
  if (gate_ == nullptr) gate_ = std::make_shared<ConcurrencyGate>(config_.max_concurrency);
}

std::string parse_completion_body(const std::string& body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw BackendError("completion response is not JSON");
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw BackendError("completion response has no choices");
  }
  const auto& first = doc["choices"][0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw BackendError("completion response has no message content");
  }
  return first["message"]["content"].get<std::string>();
}

std::string HttpBackend::complete(const GenerationRequest& request) {
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (!request.stop.empty()) body["stop"] = request.stop;
  const std::string payload = body.dump();
  const std::uint64_t request_hash = fnv1a64(request.prompt);

  std::string last_error;
  bool last_timeout = false;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const double jitter = counter_uniform(seed_, Stream::Backoff, request_hash,
                                            static_cast<std::uint64_t>(attempt));
      const double delay_s = config_.backoff_base_s *
                             static_cast<double>(1u << (attempt - 1)) * (0.5 + 0.5 * jitter);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay_s));
    }

    gate_->acquire();
    httplib::Client client(config_.base_url);
    const auto timeout = std::chrono::duration<double>(config_.timeout_s);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!auth_token_.empty()) headers.emplace("Authorization", "Bearer " + auth_token_);
    auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
    gate_->release();

    if (res) {
      if (res->status >= 200 && res->status < 300) {
        return parse_completion_body(res->body);
      }
      const std::string excerpt = res->body.substr(0, 200);
      if (res->status != 429 && res->status < 500) {
        throw HttpError("backend returned status " + std::to_string(res->status), res->status,
                        excerpt);
      }
      last_error = "status " + std::to_string(res->status);
      last_timeout = false;
    } else {
      last_error = httplib::to_string(res.error());
      last_timeout = res.error() == httplib::Error::ConnectionTimeout ||
                     res.error() == httplib::Error::Read;
    }
  }

  const std::string attempts = std::to_string(config_.max_retries + 1);
  if (last_timeout) {
    throw TimeoutError("backend timed out after " + attempts + " attempts: " + last_error);
  }
  throw RetryExhausted("backend failed after " + attempts + " attempts: " + last_error);
}

std::unique_ptr<ChatBackend> HttpBackendFactory::make(const TaskSpec&, std::uint64_t seed) const {
  return std::make_unique<HttpBackend>(config_, gate_, seed);
}

}  // namespace loom
