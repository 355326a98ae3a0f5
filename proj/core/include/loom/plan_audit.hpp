#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "loom/constraints.hpp"
#include "loom/types.hpp"

namespace loom {

// One placement a task demands of a plan: "this constraint wants its event in
// this unit's planned content". Range constraints in "any" mode contribute a
// single placement attributed to the span start.
struct PlacementCheck {
  std::size_t constraint_index = 0;
  int unit = 0;
  bool present = false;
};

struct PlanAudit {
  std::vector<PlacementCheck> placements;
  int total = 0;
  int present = 0;
  // Lowest unit with a missing placement; empty when the plan is complete.
  std::optional<int> first_violation_unit;

  bool complete() const { return present == total; }
  double coverage() const {
    return total == 0 ? 1.0 : static_cast<double>(present) / static_cast<double>(total);
  }
};

// Checks every constraint placement against the plan contents. Matching uses
// the same normalization as document checking.
PlanAudit audit_plan(const GlobalPlan& plan, const TaskSpec& task, const MatchConfig& cfg);

}  // namespace loom
