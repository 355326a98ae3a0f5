#include "loom/types.hpp"

#include <stdexcept>

#include "loom/errors.hpp"
#include "loom/text.hpp"

namespace loom {

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Once: return "once";
    case ConstraintKind::Range: return "range";
    case ConstraintKind::Periodic: return "periodic";
  }
  return "once";
}

const char* to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::Diary: return "diary";
    case Scenario::Floor: return "floor";
    case Scenario::Menu: return "menu";
    case Scenario::Block: return "block";
  }
  return "diary";
}

const char* to_string(RangeMode mode) { return mode == RangeMode::All ? "all" : "any"; }

ConstraintKind constraint_kind_from(const std::string& name) {
  if (name == "once") return ConstraintKind::Once;
  if (name == "range") return ConstraintKind::Range;
  if (name == "periodic") return ConstraintKind::Periodic;
  throw ParseError("unknown constraint kind: " + name);
}

Scenario scenario_from(const std::string& name) {
  if (name == "diary") return Scenario::Diary;
  if (name == "floor") return Scenario::Floor;
  if (name == "menu") return Scenario::Menu;
  if (name == "block") return Scenario::Block;
  throw ParseError("unknown scenario: " + name);
}

RangeMode range_mode_from(const std::string& name) {
  if (name == "any") return RangeMode::Any;
  if (name == "all") return RangeMode::All;
  throw ConfigError("unknown range mode: " + name);
}

std::vector<int> ConstraintSpec::required_units(int num_units) const {
  std::vector<int> units;
  switch (kind) {
    case ConstraintKind::Once:
      if (unit >= 1 && unit <= num_units) units.push_back(unit);
      break;
    case ConstraintKind::Range:
      for (int u = start; u <= end && u <= num_units; ++u) {
        if (u >= 1) units.push_back(u);
      }
      break;
    case ConstraintKind::Periodic:
      if (interval >= 1) {
        for (int u = start; u <= num_units; u += interval) {
          if (u >= 1) units.push_back(u);
        }
      }
      break;
  }
  return units;
}

const std::string* GlobalPlan::content_for(int unit_index) const {
  for (const auto& item : items) {
    if (item.unit_index == unit_index) return &item.content;
  }
  return nullptr;
}

const Segment* DocumentRun::segment_for(int unit_id) const {
  for (const auto& segment : segments) {
    if (segment.unit_id == unit_id) return &segment;
  }
  return nullptr;
}

int fixed_unit_count(Scenario scenario) {
  switch (scenario) {
    case Scenario::Diary: return 52;
    case Scenario::Menu: return 52;
    case Scenario::Block: return 100;
    case Scenario::Floor: return 0;
  }
  return 0;
}

ValidationReport validate_task(const TaskSpec& task) {
  ValidationReport report;
  auto flag = [&report](const std::string& field, const std::string& rule) {
    report.violations.push_back({field, rule});
  };

  if (task.task_id.empty()) flag("task_id", "must be non-empty");

  if (task.num_units < 1) {
    flag("num_units", "must be >= 1");
  }
  const int fixed = fixed_unit_count(task.scenario);
  if (fixed > 0 && task.num_units != fixed) {
    flag("num_units", std::string(to_string(task.scenario)) + " requires " +
                          std::to_string(fixed) + " units");
  }

  for (std::size_t i = 0; i < task.constraints.size(); ++i) {
    const auto& c = task.constraints[i];
    const std::string where = "constraints[" + std::to_string(i) + "]";
    if (trim(c.event).empty()) flag(where + ".event", "must be non-empty");
    switch (c.kind) {
      case ConstraintKind::Once:
        if (c.unit < 1 || c.unit > task.num_units) flag(where + ".unit", "unit out of range");
        break;
      case ConstraintKind::Range:
        if (c.start < 1 || c.end > task.num_units || c.start > c.end) {
          flag(where + ".start", "range bounds out of order or out of range");
        }
        break;
      case ConstraintKind::Periodic:
        if (c.interval < 1) flag(where + ".interval", "must be >= 1");
        if (c.start < 1 || c.start > task.num_units) flag(where + ".start", "start out of range");
        break;
    }
  }
  return report;
}

}  // namespace loom
