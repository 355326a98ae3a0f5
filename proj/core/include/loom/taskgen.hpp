#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loom/types.hpp"

namespace loom {

// Synthetic task sampler settings. Scenarios are drawn uniformly from the
// listed set; each task gets the configured constraint mix with events drawn
// without replacement from the scenario bank.
struct TaskGenConfig {
  int count = 100;
  std::uint64_t seed = 0;
  std::vector<Scenario> scenarios = {Scenario::Diary, Scenario::Floor, Scenario::Menu,
                                     Scenario::Block};
  int once_count = 2;
  int range_count = 1;
  int periodic_count = 1;
  // Unit count for scenarios that leave it open (the tower).
  int open_unit_count = 100;
  // Resampling budget per task before GenerationExhausted; a sample is
  // rejected when two one-time constraints land on the same unit.
  int max_attempts = 100;
};

// Deterministic in cfg: same config, same tasks. Throws GenerationExhausted
// when a task's resampling budget runs out and ConfigError on a bad mix.
std::vector<TaskSpec> generate_tasks(const TaskGenConfig& cfg);

// A plan that provably satisfies every constraint: each unit's content joins
// the events due there, with bank filler for unconstrained units. Generated
// tasks must always admit one; generate_tasks checks this before returning.
GlobalPlan witness_plan(const TaskSpec& task);

// JSONL dataset IO. Loading reports the first bad line by number.
void write_dataset(const std::vector<TaskSpec>& tasks, const std::string& path);
std::vector<TaskSpec> load_dataset(const std::string& path);

}  // namespace loom
