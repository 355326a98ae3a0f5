#include "loom/taskgen.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "loom/assets.hpp"
#include "loom/constraints.hpp"
#include "loom/errors.hpp"
#include "loom/json_codec.hpp"
#include "loom/rng.hpp"
#include "loom/text.hpp"

namespace loom {
namespace {

std::string task_label(int index) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "t%03d", index);
  return buffer;
}

std::string scenario_prompt(Scenario scenario, int num_units) {
  std::ostringstream out;
  switch (scenario) {
    case Scenario::Diary:
      out << "Keep a weekly personal diary covering " << num_units
          << " weeks; every scheduled activity must appear in its proper week.";
      break;
    case Scenario::Menu:
      out << "Plan the rotating restaurant menu across " << num_units
          << " weeks of service; every featured dish must appear in its proper week.";
      break;
    case Scenario::Floor:
      out << "Lay out the program of a " << num_units
          << "-floor tower; every required facility must sit on its proper floor.";
      break;
    case Scenario::Block:
      out << "Draft the development plan for a street of " << num_units
          << " city blocks; every required amenity must sit on its proper block.";
      break;
  }
  return out.str();
}

// One task sample. Returns false on a rejected draw (two one-time
// constraints on the same unit).
bool sample_constraints(const TaskGenConfig& cfg, Scenario scenario, int num_units, int index,
                        int attempt, std::vector<ConstraintSpec>& out) {
  const auto& events = scenario_events(scenario);
  const int total = cfg.once_count + cfg.range_count + cfg.periodic_count;

  // Partial Fisher-Yates over the bank for distinct events.
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int j = 0; j < total; ++j) {
    const std::size_t r =
        static_cast<std::size_t>(j) +
        counter_pick(events.size() - static_cast<std::size_t>(j), cfg.seed, Stream::TaskEvent,
                     static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(attempt),
                     static_cast<std::uint64_t>(j));
    std::swap(order[static_cast<std::size_t>(j)], order[r]);
  }

  const auto pick = [&](std::uint64_t n, int slot) {
    return counter_pick(n, cfg.seed, Stream::TaskUnit, static_cast<std::uint64_t>(index),
                        static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(slot));
  };

  out.clear();
  int event_slot = 0;
  int slot = 0;
  std::set<int> once_units;
  for (int k = 0; k < cfg.once_count; ++k) {
    ConstraintSpec c;
    c.kind = ConstraintKind::Once;
    c.event = events[order[static_cast<std::size_t>(event_slot++)]];
    c.unit = 1 + static_cast<int>(pick(static_cast<std::uint64_t>(num_units), slot++));
    if (!once_units.insert(c.unit).second) return false;
    out.push_back(std::move(c));
  }
  for (int k = 0; k < cfg.range_count; ++k) {
    ConstraintSpec c;
    c.kind = ConstraintKind::Range;
    c.event = events[order[static_cast<std::size_t>(event_slot++)]];
    const int length = 2 + static_cast<int>(pick(5, slot++));
    c.start = 1 + static_cast<int>(pick(static_cast<std::uint64_t>(num_units - length + 1),
                                        slot++));
    c.end = c.start + length - 1;
    out.push_back(std::move(c));
  }
  for (int k = 0; k < cfg.periodic_count; ++k) {
    ConstraintSpec c;
    c.kind = ConstraintKind::Periodic;
    c.event = events[order[static_cast<std::size_t>(event_slot++)]];
    c.interval = 3 + static_cast<int>(pick(6, slot++));
    c.start = 1 + static_cast<int>(pick(static_cast<std::uint64_t>(c.interval), slot++));
    out.push_back(std::move(c));
  }
  return true;
}

}  // namespace

std::vector<TaskSpec> generate_tasks(const TaskGenConfig& cfg) {
  if (cfg.count < 0) throw ConfigError("task count must be non-negative");
  if (cfg.scenarios.empty()) throw ConfigError("scenario set is empty");
  if (cfg.once_count < 0 || cfg.range_count < 0 || cfg.periodic_count < 0) {
    throw ConfigError("constraint counts must be non-negative");
  }
  const int total = cfg.once_count + cfg.range_count + cfg.periodic_count;
  if (total < 1) throw ConfigError("constraint mix is empty");
  if (cfg.max_attempts < 1) throw ConfigError("max_attempts must be positive");

  std::vector<TaskSpec> tasks;
  tasks.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    const Scenario scenario =
        cfg.scenarios[counter_pick(cfg.scenarios.size(), cfg.seed, Stream::Scenario,
                                   static_cast<std::uint64_t>(i))];
    int num_units = fixed_unit_count(scenario);
    if (num_units == 0) num_units = cfg.open_unit_count;
    if (static_cast<std::size_t>(total) > scenario_events(scenario).size()) {
      throw ConfigError("constraint mix needs more events than the bank holds");
    }
    if (cfg.range_count > 0 && num_units < 7) {
      throw ConfigError("unit span too small for range constraints");
    }

    TaskSpec task;
    task.task_id = task_label(i);
    task.scenario = scenario;
    task.num_units = num_units;
    task.prompt = scenario_prompt(scenario, num_units);

    bool made = false;
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      if (!sample_constraints(cfg, scenario, num_units, i, attempt, task.constraints)) continue;
      if (!validate_task(task).ok()) continue;
      made = true;
      break;
    }
    if (!made) {
      throw GenerationExhausted("task " + task.task_id + " kept colliding after " +
                                std::to_string(cfg.max_attempts) + " attempts");
    }
    tasks.push_back(std::move(task));
  }

  // Every generated task must admit its witness; anything else is a sampler
  // defect worth failing loudly on.
  for (const auto& task : tasks) {
    const GlobalPlan witness = witness_plan(task);
    DocumentRun doc;
    doc.task_id = task.task_id;
    for (const auto& item : witness.items) {
      doc.segments.push_back({item.unit_index, "", item.content});
    }
    for (const auto& verdict : evaluate_document(doc, task, MatchConfig{})) {
      if (!verdict.satisfied) {
        throw Error("witness for " + task.task_id + " violates \"" + verdict.constraint.event +
                    "\"");
      }
    }
  }
  return tasks;
}

GlobalPlan witness_plan(const TaskSpec& task) {
  std::map<int, std::string> content;
  for (const auto& c : task.constraints) {
    for (const int unit : c.required_units(task.num_units)) {
      std::string& slot = content[unit];
      if (!slot.empty()) slot += "; ";
      slot += c.event;
    }
  }

  const auto& fillers = scenario_fillers(task.scenario);
  GlobalPlan plan;
  plan.items.reserve(static_cast<std::size_t>(task.num_units));
  for (int u = 1; u <= task.num_units; ++u) {
    const auto it = content.find(u);
    if (it != content.end()) {
      plan.items.push_back({u, it->second});
    } else {
      plan.items.push_back({u, fillers[static_cast<std::size_t>(u - 1) % fillers.size()]});
    }
  }
  return plan;
}

void write_dataset(const std::vector<TaskSpec>& tasks, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& task : tasks) {
    out << task_to_json(task) << "\n";
  }
  out.flush();
  if (!out) throw IoError("failed while writing " + path);
}

std::vector<TaskSpec> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TaskSpec> tasks;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      tasks.push_back(task_from_json(line));
    } catch (const Error& e) {
      throw ParseError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return tasks;
}

}  // namespace loom
