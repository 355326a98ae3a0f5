#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "loom/filter.hpp"
#include "loom/types.hpp"

namespace loom {

// Addresses a request within a pipeline run so the simulated backend can give
// every candidate, rollout and unit its own deterministic stream regardless
// of issue order or threading.
struct RequestTag {
  int candidate_index = 0;
  int rollout_index = 0;
  int unit_index = 0;
};

struct GenerationRequest {
  std::string prompt;
  int max_tokens = 1024;
  double temperature = 0.8;
  std::vector<std::string> stop;
  RequestTag tag;
};

struct ChatBackend {
  virtual ~ChatBackend() = default;
  virtual std::string complete(const GenerationRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Behavior knobs for the simulated model. compliance_rate is the probability
// that any single required placement makes it into a plan (and, independently,
// into prose when the plan missed it). parse_noise_rate is the probability
// that a JSON-producing reply comes back truncated. verbosity is the minimum
// word count the writing stage pads segments to. range_mode tells the
// simulated writer whether a span requirement means one unit or every unit,
// and should mirror the evaluation's MatchConfig.
struct SimulatedProfile {
  double compliance_rate = 0.9;
  double parse_noise_rate = 0.0;
  int verbosity = 24;
  RangeMode range_mode = RangeMode::Any;
};

// Deterministic stand-in for a language model. Replies are a pure function of
// (profile, task, seed, prompt text, request tag); retrying with an amended
// prompt therefore yields a fresh sample while byte-identical requests repeat.
class SimulatedBackend final : public ChatBackend {
 public:
  SimulatedBackend(SimulatedProfile profile, TaskSpec task, std::uint64_t seed)
      : profile_(profile), task_(std::move(task)), seed_(seed) {}

  std::string complete(const GenerationRequest& request) override;
  std::string name() const override { return "simulated"; }

 private:
  SimulatedProfile profile_;
  TaskSpec task_;
  std::uint64_t seed_;
};

std::string simulated_complete(const SimulatedProfile& profile, const TaskSpec& task,
                               std::uint64_t seed, const GenerationRequest& request);

// Creates one backend per task. Implementations decide how much state the
// backends share; returned backends must be independently usable.
struct BackendFactory {
  virtual ~BackendFactory() = default;
  virtual std::unique_ptr<ChatBackend> make(const TaskSpec& task, std::uint64_t seed) const = 0;
  virtual std::string name() const = 0;
};

class SimulatedBackendFactory final : public BackendFactory {
 public:
  explicit SimulatedBackendFactory(SimulatedProfile profile = {}) : profile_(profile) {}

  std::unique_ptr<ChatBackend> make(const TaskSpec& task, std::uint64_t seed) const override {
    return std::make_unique<SimulatedBackend>(profile_, task, seed);
  }
  std::string name() const override { return "simulated"; }

 private:
  SimulatedProfile profile_;
};

// Extracts the six "name: YES|NO" verdict lines from a judge reply, in the
// fixed criteria order. Lines that are missing or malformed read as NO; a
// reply with no recognizable verdict line at all reads as all NO.
CriteriaVector parse_judge_reply(const std::string& reply);

// Judge that asks a backend for YES/NO verdicts via the judge prompt.
class BackendJudge final : public Judge {
 public:
  explicit BackendJudge(ChatBackend& backend, MatchConfig match = {})
      : backend_(&backend), match_(match) {}

  CriteriaVector assess(const GlobalPlan& plan, const TaskSpec& task) const override;

 private:
  ChatBackend* backend_;
  MatchConfig match_;
};

}  // namespace loom
