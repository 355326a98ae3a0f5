#pragma once

#include <memory>
#include <string>

#include "loom/backend_http.hpp"
#include "loom/backends.hpp"
#include "loom/dpo.hpp"
#include "loom/workflow.hpp"

namespace loom {

enum class BackendKind { Simulated, Http };

BackendKind backend_kind_from(const std::string& name);
const char* to_string(BackendKind kind);

struct BackendSettings {
  BackendKind kind = BackendKind::Simulated;
  SimulatedProfile profile;
  EndpointConfig endpoint;
};

struct TrainSettings {
  double learning_rate = 0.05;
  int steps = 200;
};

// Effective settings for a whole run: pipeline shape, backend choice and the
// preference-training knobs. pipeline.config_digest is filled by the loader
// with digest() of the parsed result.
struct EngineConfig {
  PipelineConfig pipeline;
  BackendSettings backend;
  DpoConfig dpo;
  TrainSettings train;
};

// Parses a flat JSON object of dotted keys ("pipeline.candidates": 4).
// Missing keys keep their defaults; unknown keys and out-of-range values
// throw ConfigError; malformed JSON throws ParseError.
EngineConfig config_from_json(const std::string& text);

// Reads and parses a config file. An empty path yields the defaults.
EngineConfig load_config(const std::string& path);

// The full effective configuration as a sorted flat JSON object, every key
// present. Two configs behave identically iff their canonical forms match.
std::string canonical_config(const EngineConfig& cfg);

// Hex hash of canonical_config, stamped into run outputs.
std::string config_digest(const EngineConfig& cfg);

std::unique_ptr<BackendFactory> make_backend_factory(const BackendSettings& settings);

}  // namespace loom
