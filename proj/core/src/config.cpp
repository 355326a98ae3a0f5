#include "loom/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "loom/digest.hpp"
#include "loom/errors.hpp"

namespace loom {
namespace {

using nlohmann::json;

long long as_int(const std::string& key, const json& value) {
  if (!value.is_number_integer()) throw ConfigError("key " + key + " expects an integer");
  return value.get<long long>();
}

double as_double(const std::string& key, const json& value) {
  if (!value.is_number()) throw ConfigError("key " + key + " expects a number");
  return value.get<double>();
}

bool as_bool(const std::string& key, const json& value) {
  if (!value.is_boolean()) throw ConfigError("key " + key + " expects a boolean");
  return value.get<bool>();
}

std::string as_string(const std::string& key, const json& value) {
  if (!value.is_string()) throw ConfigError("key " + key + " expects a string");
  return value.get<std::string>();
}

int int_in(const std::string& key, const json& value, long long lo, long long hi) {
  const long long v = as_int(key, value);
  if (v < lo || v > hi) {
    throw ConfigError("key " + key + " must be in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

double double_in(const std::string& key, const json& value, double lo, double hi) {
  const double v = as_double(key, value);
  if (!std::isfinite(v) || v < lo || v > hi) {
    throw ConfigError("key " + key + " is out of range");
  }
  return v;
}

double positive_double(const std::string& key, const json& value) {
  const double v = as_double(key, value);
  if (!std::isfinite(v) || v <= 0.0) throw ConfigError("key " + key + " must be positive");
  return v;
}

template <typename T>
T named_value(const std::string& key, const json& value, T (*from)(const std::string&)) {
  const std::string name = as_string(key, value);
  try {
    return from(name);
  } catch (const Error& e) {
    throw ConfigError("key " + key + ": " + e.what());
  }
}

void apply_entry(EngineConfig& cfg, const std::string& key, const json& value) {
  auto& p = cfg.pipeline;
  auto& b = cfg.backend;
  if (key == "pipeline.candidates") {
    p.candidates = int_in(key, value, 1, 1024);
  } else if (key == "pipeline.top_k") {
    p.top_k = int_in(key, value, 1, 1024);
  } else if (key == "pipeline.quality_threshold") {
    p.quality_threshold = double_in(key, value, 0.0, 1.0);
  } else if (key == "pipeline.max_refine_iters") {
    p.max_refine_iters = int_in(key, value, 0, 1000);
  } else if (key == "pipeline.rollouts") {
    p.rollouts = int_in(key, value, 1, 1024);
  } else if (key == "pipeline.context_window") {
    p.context_window = int_in(key, value, 0, 1000000);
  } else if (key == "pipeline.max_parse_retries") {
    p.max_parse_retries = int_in(key, value, 0, 1000);
  } else if (key == "pipeline.enable_refine") {
    p.enable_refine = as_bool(key, value);
  } else if (key == "pipeline.enable_filter") {
    p.enable_filter = as_bool(key, value);
  } else if (key == "pipeline.enable_reward_ranking") {
    p.enable_reward_ranking = as_bool(key, value);
  } else if (key == "pipeline.judge") {
    p.judge = named_value(key, value, judge_kind_from);
  } else if (key == "pipeline.grading") {
    p.grading = named_value(key, value, grading_from);
  } else if (key == "pipeline.seed") {
    if (!value.is_number_integer()) throw ConfigError("key " + key + " expects an integer");
    p.seed = value.get<std::uint64_t>();
  } else if (key == "filter.mode") {
    p.filter.mode = named_value(key, value, screen_mode_from);
  } else if (key == "filter.threshold") {
    p.filter.threshold = double_in(key, value, 0.0, 1.0);
  } else if (key == "filter.max_retries") {
    p.filter.max_retries = int_in(key, value, 0, 1000);
  } else if (key == "match.case_sensitive") {
    p.match.case_sensitive = as_bool(key, value);
  } else if (key == "match.range_mode") {
    p.match.range_mode = named_value(key, value, range_mode_from);
  } else if (key == "reward.constraint_weight") {
    p.scorer.constraint_weight = double_in(key, value, 0.0, 1e9);
  } else if (key == "reward.coverage_weight") {
    p.scorer.coverage_weight = double_in(key, value, 0.0, 1e9);
  } else if (key == "dpo.beta") {
    cfg.dpo.beta = positive_double(key, value);
  } else if (key == "dpo.margin") {
    cfg.dpo.margin = double_in(key, value, 0.0, 1e9);
  } else if (key == "dpo.clip_epsilon") {
    cfg.dpo.clip_epsilon = double_in(key, value, 0.0, 1.0);
  } else if (key == "dpo.std_floor") {
    cfg.dpo.std_floor = positive_double(key, value);
  } else if (key == "dpo.learning_rate") {
    cfg.train.learning_rate = positive_double(key, value);
  } else if (key == "dpo.steps") {
    cfg.train.steps = int_in(key, value, 1, 1000000);
  } else if (key == "backend.kind") {
    b.kind = named_value(key, value, backend_kind_from);
  } else if (key == "backend.endpoint") {
    b.endpoint.base_url = as_string(key, value);
  } else if (key == "backend.model") {
    b.endpoint.model = as_string(key, value);
  } else if (key == "backend.auth_env") {
    b.endpoint.auth_env = as_string(key, value);
  } else if (key == "backend.temperature") {
    b.endpoint.temperature = double_in(key, value, 0.0, 2.0);
  } else if (key == "backend.timeout_s") {
    b.endpoint.timeout_s = positive_double(key, value);
  } else if (key == "backend.max_retries") {
    b.endpoint.max_retries = int_in(key, value, 0, 100);
  } else if (key == "backend.max_concurrency") {
    b.endpoint.max_concurrency = int_in(key, value, 1, 4096);
  } else if (key == "backend.backoff_base_s") {
    b.endpoint.backoff_base_s = double_in(key, value, 0.0, 3600.0);
  } else if (key == "backend.compliance") {
    b.profile.compliance_rate = double_in(key, value, 0.0, 1.0);
  } else if (key == "backend.parse_noise") {
    b.profile.parse_noise_rate = double_in(key, value, 0.0, 1.0);
  } else if (key == "backend.verbosity") {
    b.profile.verbosity = int_in(key, value, 1, 100000);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

void cross_validate(const EngineConfig& cfg) {
  if (cfg.pipeline.top_k > cfg.pipeline.candidates) {
    throw ConfigError("pipeline.top_k cannot exceed pipeline.candidates");
  }
  if (cfg.pipeline.scorer.constraint_weight + cfg.pipeline.scorer.coverage_weight <= 0.0) {
    throw ConfigError("reward weights must not both be zero");
  }
  if (cfg.backend.kind == BackendKind::Http) {
    if (cfg.backend.endpoint.base_url.empty()) {
      throw ConfigError("backend.endpoint is required for the http backend");
    }
    if (cfg.backend.endpoint.model.empty()) {
      throw ConfigError("backend.model is required for the http backend");
    }
  }
}

}  // namespace

BackendKind backend_kind_from(const std::string& name) {
  if (name == "simulated") return BackendKind::Simulated;
  if (name == "http") return BackendKind::Http;
  throw ConfigError("unknown backend kind: " + name);
}

const char* to_string(BackendKind kind) {
  return kind == BackendKind::Simulated ? "simulated" : "http";
}

EngineConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object of dotted keys");

  EngineConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    apply_entry(cfg, key, value);
  }
  cross_validate(cfg);
  // The simulated writer must read span requirements the same way the
  // evaluator will.
  cfg.backend.profile.range_mode = cfg.pipeline.match.range_mode;
  cfg.pipeline.config_digest = config_digest(cfg);
  return cfg;
}

EngineConfig load_config(const std::string& path) {
  if (path.empty()) {
    EngineConfig cfg;
    cfg.pipeline.config_digest = config_digest(cfg);
    return cfg;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::string canonical_config(const EngineConfig& cfg) {
  const auto& p = cfg.pipeline;
  const auto& b = cfg.backend;
  json doc = json::object();
  doc["pipeline.candidates"] = p.candidates;
  doc["pipeline.top_k"] = p.top_k;
  doc["pipeline.quality_threshold"] = p.quality_threshold;
  doc["pipeline.max_refine_iters"] = p.max_refine_iters;
  doc["pipeline.rollouts"] = p.rollouts;
  doc["pipeline.context_window"] = p.context_window;
  doc["pipeline.max_parse_retries"] = p.max_parse_retries;
  doc["pipeline.enable_refine"] = p.enable_refine;
  doc["pipeline.enable_filter"] = p.enable_filter;
  doc["pipeline.enable_reward_ranking"] = p.enable_reward_ranking;
  doc["pipeline.judge"] = to_string(p.judge);
  doc["pipeline.grading"] = to_string(p.grading);
  doc["pipeline.seed"] = p.seed;
  doc["filter.mode"] = to_string(p.filter.mode);
  doc["filter.threshold"] = p.filter.threshold;
  doc["filter.max_retries"] = p.filter.max_retries;
  doc["match.case_sensitive"] = p.match.case_sensitive;
  doc["match.range_mode"] = to_string(p.match.range_mode);
  doc["reward.constraint_weight"] = p.scorer.constraint_weight;
  doc["reward.coverage_weight"] = p.scorer.coverage_weight;
  doc["dpo.beta"] = cfg.dpo.beta;
  doc["dpo.margin"] = cfg.dpo.margin;
  doc["dpo.clip_epsilon"] = cfg.dpo.clip_epsilon;
  doc["dpo.std_floor"] = cfg.dpo.std_floor;
  doc["dpo.learning_rate"] = cfg.train.learning_rate;
  doc["dpo.steps"] = cfg.train.steps;
  doc["backend.kind"] = to_string(b.kind);
  doc["backend.endpoint"] = b.endpoint.base_url;
  doc["backend.model"] = b.endpoint.model;
  doc["backend.auth_env"] = b.endpoint.auth_env;
  doc["backend.temperature"] = b.endpoint.temperature;
  doc["backend.timeout_s"] = b.endpoint.timeout_s;
  doc["backend.max_retries"] = b.endpoint.max_retries;
  doc["backend.max_concurrency"] = b.endpoint.max_concurrency;
  doc["backend.backoff_base_s"] = b.endpoint.backoff_base_s;
  doc["backend.compliance"] = b.profile.compliance_rate;
  doc["backend.parse_noise"] = b.profile.parse_noise_rate;
  doc["backend.verbosity"] = b.profile.verbosity;
  return doc.dump(2) + "\n";
}

std::string config_digest(const EngineConfig& cfg) { return hex_digest(canonical_config(cfg)); }

std::unique_ptr<BackendFactory> make_backend_factory(const BackendSettings& settings) {
  if (settings.kind == BackendKind::Http) {
    return std::make_unique<HttpBackendFactory>(settings.endpoint);
  }
  return std::make_unique<SimulatedBackendFactory>(settings.profile);
}

}  // namespace loom
