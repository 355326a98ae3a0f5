#include "loom/prompts.hpp"

#include <sstream>

#include "loom/assets.hpp"
#include "loom/errors.hpp"
#include "loom/json_codec.hpp"

namespace loom {
namespace {

std::string template_name(const char* stage, Scenario scenario) {
  return std::string("prompts/") + stage + "_" + to_string(scenario) + ".txt";
}

std::string plural(const char* noun) { return std::string(noun) + "s"; }

}  // namespace

std::string render_template(std::string_view tmpl, const TemplateValues& values) {
  std::string out;
  out.reserve(tmpl.size());
  size_t pos = 0;
  while (pos < tmpl.size()) {
    size_t open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    size_t close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw ConfigError("unterminated placeholder in template");
    }
    std::string_view name = tmpl.substr(open + 2, close - open - 2);
    auto it = values.find(name);
    if (it == values.end()) {
      throw ConfigError("unresolved placeholder: " + std::string(name));
    }
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

const char* unit_noun(Scenario scenario) {
  switch (scenario) {
    case Scenario::Diary: return "week";
    case Scenario::Menu: return "week";
    case Scenario::Floor: return "floor";
    case Scenario::Block: return "block";
  }
  return "week";
}

std::string describe_constraints(const TaskSpec& task, const MatchConfig& match) {
  const char* noun = unit_noun(task.scenario);
  std::ostringstream out;
  for (size_t i = 0; i < task.constraints.size(); ++i) {
    const ConstraintSpec& c = task.constraints[i];
    if (i > 0) {
      out << "\n";
    }
    out << "- \"" << c.event << "\" ";
    switch (c.kind) {
      case ConstraintKind::Once:
        out << "is scheduled for " << noun << " " << c.unit << ".";
        break;
      case ConstraintKind::Range:
        if (match.range_mode == RangeMode::All) {
          out << "must appear in every " << noun << " from " << c.start << " to " << c.end << ".";
        } else {
          out << "must appear in at least one " << noun << " from " << c.start << " to " << c.end
              << ".";
        }
        break;
      case ConstraintKind::Periodic:
        out << "repeats every " << c.interval << " " << plural(noun) << " starting at " << noun
            << " " << c.start << ".";
        break;
    }
  }
  return out.str();
}

std::string plan_prompt(const TaskSpec& task, std::string_view attempt_note,
                        const MatchConfig& match) {
  TemplateValues values{
      {"task_prompt", task.prompt},
      {"constraints", describe_constraints(task, match)},
      {"num_units", std::to_string(task.num_units)},
      {"attempt_note", std::string(attempt_note)},
  };
  return render_template(asset_text(template_name("plan", task.scenario)), values);
}

std::string write_prompt(const TaskSpec& task, const GlobalPlan& plan, int unit_index,
                         std::string_view context, std::string_view attempt_note) {
  TemplateValues values{
      {"task_prompt", task.prompt},
      {"plan_json", serialize_plan(plan)},
      {"unit_index", std::to_string(unit_index)},
      {"context", context.empty() ? "(nothing yet)" : std::string(context)},
      {"attempt_note", std::string(attempt_note)},
  };
  return render_template(asset_text(template_name("write", task.scenario)), values);
}

std::string judge_prompt(const TaskSpec& task, const GlobalPlan& plan, const MatchConfig& match) {
  TemplateValues values{
      {"task_prompt", task.prompt},
      {"constraints", describe_constraints(task, match)},
      {"plan_json", serialize_plan(plan)},
      {"num_units", std::to_string(task.num_units)},
  };
  return render_template(asset_text("prompts/judge.txt"), values);
}

std::string rollout_prompt(const TaskSpec& task, const GlobalPlan& plan, int start_unit,
                           std::string_view context) {
  TemplateValues values{
      {"task_prompt", task.prompt},
      {"plan_json", serialize_plan(plan)},
      {"start_unit", std::to_string(start_unit)},
      {"num_units", std::to_string(task.num_units)},
      {"context", context.empty() ? "(nothing yet)" : std::string(context)},
  };
  return render_template(asset_text("prompts/rollout.txt"), values);
}

std::string refine_prompt(const TaskSpec& task, const GlobalPlan& plan, int unit_index,
                          std::string_view attempt_note, const MatchConfig& match) {
  TemplateValues values{
      {"task_prompt", task.prompt},
      {"constraints", describe_constraints(task, match)},
      {"plan_json", serialize_plan(plan)},
      {"unit_index", std::to_string(unit_index)},
      {"attempt_note", std::string(attempt_note)},
  };
  return render_template(asset_text("prompts/refine.txt"), values);
}

}  // namespace loom
