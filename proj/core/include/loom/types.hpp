#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace loom {

enum class ConstraintKind { Once, Range, Periodic };
enum class Scenario { Diary, Floor, Menu, Block };
enum class RangeMode { Any, All };

const char* to_string(ConstraintKind kind);
const char* to_string(Scenario scenario);
const char* to_string(RangeMode mode);
ConstraintKind constraint_kind_from(const std::string& name);
Scenario scenario_from(const std::string& name);
RangeMode range_mode_from(const std::string& name);

// One placement requirement. Field usage depends on kind:
//   Once:     unit
//   Range:    start, end
//   Periodic: start, interval
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::Once;
  std::string event;
  int unit = 0;
  int start = 0;
  int end = 0;
  int interval = 0;

  // Units this constraint can demand content in. For Range this is the whole
  // span regardless of mode; mode only decides how many of them must match.
  std::vector<int> required_units(int num_units) const;
};

struct TaskSpec {
  std::string task_id;
  Scenario scenario = Scenario::Diary;
  int num_units = 0;
  std::vector<ConstraintSpec> constraints;
  std::string prompt;
};

struct SubPlanItem {
  int unit_index = 0;
  std::string content;
};

// Complete plan: exactly one item per unit, ascending. candidate_index records
// which member of a sampled batch this plan was.
struct GlobalPlan {
  std::vector<SubPlanItem> items;
  int candidate_index = 0;

  const std::string* content_for(int unit_index) const;
};

struct Segment {
  int unit_id = 0;
  std::string check;
  std::string text;
};

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string backend;
  std::string started_at;
  std::string finished_at;
};

struct DocumentRun {
  std::string task_id;
  GlobalPlan plan;
  std::vector<Segment> segments;
  RunMetadata metadata;

  const Segment* segment_for(int unit_id) const;
};

struct FieldViolation {
  std::string field;
  std::string rule;
};

struct ValidationReport {
  std::vector<FieldViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Unit count fixed by scenario, or 0 when the scenario leaves it open.
int fixed_unit_count(Scenario scenario);

// Structural validation of a task against all TaskSpec/ConstraintSpec
// invariants. Violations are data; this never throws.
ValidationReport validate_task(const TaskSpec& task);

}  // namespace loom
