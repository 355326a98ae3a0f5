#pragma once

#include <map>
#include <string>
#include <string_view>

#include "loom/constraints.hpp"
#include "loom/types.hpp"

namespace loom {

// Fixed sentences identifying each pipeline stage inside a prompt. The
// simulated backend dispatches on them, so the templates keep them verbatim.
namespace markers {
inline constexpr std::string_view kPlan = "Produce the full plan as one JSON object";
inline constexpr std::string_view kWrite = "Respond with one JSON object for this single";
inline constexpr std::string_view kJudge = "Answer YES or NO for each criterion";
inline constexpr std::string_view kRollout = "Continue the document";
inline constexpr std::string_view kRefine = "Rewrite only unit";
// Prefix before the embedded plan JSON in write, judge, rollout and refine
// prompts. Anything consuming those prompts parses the plan after it.
inline constexpr std::string_view kPlanPrefix = "PLAN:";
}  // namespace markers

using TemplateValues = std::map<std::string, std::string, std::less<>>;

// Replaces each {{name}} with values.at(name). Throws ConfigError on a
// placeholder with no value. Replacement text is never rescanned.
std::string render_template(std::string_view tmpl, const TemplateValues& values);

// What one unit is called in prose: "week", "floor" or "block".
const char* unit_noun(Scenario scenario);

// One requirement per line, phrased for prompts. The range wording follows
// match.range_mode since that decides how spans are evaluated.
std::string describe_constraints(const TaskSpec& task, const MatchConfig& match = {});

std::string plan_prompt(const TaskSpec& task, std::string_view attempt_note,
                        const MatchConfig& match = {});
std::string write_prompt(const TaskSpec& task, const GlobalPlan& plan, int unit_index,
                         std::string_view context, std::string_view attempt_note);
std::string judge_prompt(const TaskSpec& task, const GlobalPlan& plan,
                         const MatchConfig& match = {});
std::string rollout_prompt(const TaskSpec& task, const GlobalPlan& plan, int start_unit,
                           std::string_view context);
std::string refine_prompt(const TaskSpec& task, const GlobalPlan& plan, int unit_index,
                          std::string_view attempt_note, const MatchConfig& match = {});

}  // namespace loom
