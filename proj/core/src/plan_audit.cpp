#include "loom/plan_audit.hpp"

#include <algorithm>

#include "loom/text.hpp"

namespace loom {

PlanAudit audit_plan(const GlobalPlan& plan, const TaskSpec& task, const MatchConfig& cfg) {
  PlanAudit audit;

  auto content_has = [&](int unit, const std::string& event) {
    const std::string* content = plan.content_for(unit);
    return content != nullptr && contains_phrase(*content, event, cfg.case_sensitive);
  };

  for (std::size_t i = 0; i < task.constraints.size(); ++i) {
    const ConstraintSpec& c = task.constraints[i];
    if (c.kind == ConstraintKind::Range && cfg.range_mode == RangeMode::Any) {
      bool anywhere = false;
      for (int u = c.start; u <= c.end; ++u) {
        if (content_has(u, c.event)) {
          anywhere = true;
          break;
        }
      }
      audit.placements.push_back({i, c.start, anywhere});
      continue;
    }
    for (int unit : c.required_units(task.num_units)) {
      audit.placements.push_back({i, unit, content_has(unit, c.event)});
    }
  }

  audit.total = static_cast<int>(audit.placements.size());
  for (const auto& placement : audit.placements) {
    if (placement.present) {
      ++audit.present;
    } else if (!audit.first_violation_unit || placement.unit < *audit.first_violation_unit) {
      audit.first_violation_unit = placement.unit;
    }
  }
  return audit;
}

}  // namespace loom
