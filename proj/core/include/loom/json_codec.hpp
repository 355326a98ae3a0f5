#pragma once

#include <string>
#include <string_view>

#include "loom/types.hpp"

namespace loom {

// First balanced top-level {...} block in raw, scanning left to right and
// honoring string literals and escapes. Throws ParseError when none exists.
std::string extract_json_block(std::string_view raw);

// Parses backend plan output against the canonical schema
// {"units": {"<index>": "<content>"}}. Surrounding prose is tolerated.
// Throws ParseError (no/malformed JSON) or SchemaError (missing, duplicate,
// or out-of-range unit keys; empty contents) with the offending unit list.
GlobalPlan parse_plan_json(const std::string& raw, int num_units);

// Canonical plan serialization: unit keys in ascending numeric order.
std::string serialize_plan(const GlobalPlan& plan);

// Parses writing-stage output {"unit_id": n, "check": "...", "text": "..."}.
// The identifier key also accepts the aliases "unit", "week", "floor",
// "block". "check" is optional. Throws ParseError or SchemaError.
Segment parse_segment_json(const std::string& raw);

// Parses refinement output {"unit": n, "content": "..."}. The identifier key
// accepts the same aliases as parse_segment_json.
SubPlanItem parse_unit_revision(const std::string& raw);

std::string serialize_segment(const Segment& segment);

// One-line JSON for the JSONL task dataset format.
std::string task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const std::string& line);

}  // namespace loom
