#include "loom/backends.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "loom/assets.hpp"
#include "loom/digest.hpp"
#include "loom/errors.hpp"
#include "loom/json_codec.hpp"
#include "loom/prompts.hpp"
#include "loom/rng.hpp"
#include "loom/text.hpp"

namespace loom {
namespace {

using ordered_json = nlohmann::ordered_json;

std::uint64_t tag_key(const RequestTag& tag) {
  std::uint64_t h = 0x6c6f6f6dULL;
  h = mix_key(h, static_cast<std::uint64_t>(tag.candidate_index + 1));
  h = mix_key(h, static_cast<std::uint64_t>(tag.rollout_index + 1));
  h = mix_key(h, static_cast<std::uint64_t>(tag.unit_index + 1));
  return h;
}

// Everything a stage needs to address its deterministic draws: the prompt
// hash keeps retried (and thus amended) prompts on fresh streams, the tag key
// separates candidates, rollouts and units.
struct StageContext {
  const SimulatedProfile& profile;
  const TaskSpec& task;
  std::uint64_t seed;
  std::uint64_t h;
  std::uint64_t key;
};

void append_phrase(std::string& content, const std::string& phrase) {
  if (!content.empty()) content += "; ";
  content += phrase;
}

int word_count(const std::string& s) {
  std::istringstream in(s);
  std::string word;
  int count = 0;
  while (in >> word) ++count;
  return count;
}

GlobalPlan plan_from_prompt(const std::string& prompt, int num_units) {
  const std::size_t pos = prompt.find(markers::kPlanPrefix);
  if (pos == std::string::npos) throw BackendError("prompt carries no plan");
  return parse_plan_json(prompt.substr(pos + markers::kPlanPrefix.size()), num_units);
}

// Units where the writing stages treat a constraint as due. A span in "any"
// mode resolves to the first span unit whose planned content already mentions
// the event, falling back to the span start when the plan missed it entirely.
std::vector<int> doc_due_units(const ConstraintSpec& c, const GlobalPlan& plan, int num_units,
                               RangeMode range_mode) {
  if (c.kind == ConstraintKind::Range && range_mode == RangeMode::Any) {
    const int end = std::min(c.end, num_units);
    if (c.start > end) return {};
    for (int u = c.start; u <= end; ++u) {
      const std::string* content = plan.content_for(u);
      if (content != nullptr && contains_phrase(*content, c.event)) return {u};
    }
    return {c.start};
  }
  return c.required_units(num_units);
}

std::string truncate_reply(const StageContext& ctx, std::string reply) {
  if (ctx.profile.parse_noise_rate > 0.0 &&
      counter_uniform(ctx.seed, Stream::ParseNoise, ctx.h, ctx.key) <
          ctx.profile.parse_noise_rate) {
    // Cutting at two thirds always lands inside the trailing JSON block, so a
    // noisy reply reliably fails to parse instead of silently changing.
    return reply.substr(0, reply.size() * 2 / 3);
  }
  return reply;
}

std::string plan_reply(const StageContext& ctx) {
  const TaskSpec& task = ctx.task;
  std::map<int, std::string> content;
  for (std::size_t ci = 0; ci < task.constraints.size(); ++ci) {
    const ConstraintSpec& c = task.constraints[ci];
    std::vector<int> units;
    if (c.kind == ConstraintKind::Range && ctx.profile.range_mode == RangeMode::Any) {
      const int end = std::min(c.end, task.num_units);
      if (c.start <= end) {
        const int span = end - c.start + 1;
        units.push_back(c.start + static_cast<int>(counter_pick(
                                      static_cast<std::uint64_t>(span), ctx.seed, Stream::Shuffle,
                                      ctx.h, ctx.key, ci)));
      }
    } else {
      units = c.required_units(task.num_units);
    }
    for (int u : units) {
      if (counter_uniform(ctx.seed, Stream::PlanEvent, ctx.h, ctx.key, ci,
                          static_cast<std::uint64_t>(u)) < ctx.profile.compliance_rate) {
        append_phrase(content[u], c.event);
      }
    }
  }

  GlobalPlan plan;
  plan.items.reserve(static_cast<std::size_t>(task.num_units));
  const auto& fillers = scenario_fillers(task.scenario);
  for (int u = 1; u <= task.num_units; ++u) {
    auto it = content.find(u);
    if (it != content.end()) {
      plan.items.push_back({u, it->second});
    } else {
      const auto pick = counter_pick(fillers.size(), ctx.seed, Stream::PlanFiller, ctx.h, ctx.key,
                                     static_cast<std::uint64_t>(u));
      plan.items.push_back({u, fillers[pick]});
    }
  }
  return "Weighing every requirement against the span, here is the schedule.\n\n" +
         serialize_plan(plan);
}

std::string write_reply(const StageContext& ctx, const GenerationRequest& request) {
  const TaskSpec& task = ctx.task;
  const int unit = request.tag.unit_index;
  const GlobalPlan plan = plan_from_prompt(request.prompt, task.num_units);
  const std::string* planned = plan.content_for(unit);
  if (planned == nullptr) throw BackendError("write request for unit outside the plan");

  std::string text = *planned;
  for (std::size_t ci = 0; ci < task.constraints.size(); ++ci) {
    const ConstraintSpec& c = task.constraints[ci];
    for (int due : doc_due_units(c, plan, task.num_units, ctx.profile.range_mode)) {
      if (due != unit || contains_phrase(text, c.event)) continue;
      if (counter_uniform(ctx.seed, Stream::WriteEvent, ctx.h, ctx.key, ci,
                          static_cast<std::uint64_t>(unit)) < ctx.profile.compliance_rate) {
        append_phrase(text, c.event);
      }
    }
  }

  const auto& fillers = scenario_fillers(task.scenario);
  std::uint64_t slot = 0;
  while (word_count(text) < ctx.profile.verbosity) {
    const auto pick = counter_pick(fillers.size(), ctx.seed, Stream::WriteFiller, ctx.h, ctx.key,
                                   static_cast<std::uint64_t>(unit), slot++);
    // Sentence punctuation keeps adjacent phrases from fusing into an
    // accidental event mention under whitespace-normalized matching.
    text += ". " + fillers[pick];
  }

  ordered_json doc;
  doc[unit_noun(task.scenario)] = unit;
  doc["check"] = *planned;
  doc["text"] = text;
  return "Drafted as planned.\n\n" + doc.dump();
}

std::string rollout_reply(const StageContext& ctx, const GenerationRequest& request) {
  const TaskSpec& task = ctx.task;
  const int start = std::max(1, request.tag.unit_index);
  const GlobalPlan plan = plan_from_prompt(request.prompt, task.num_units);

  std::ostringstream out;
  for (int u = start; u <= task.num_units; ++u) {
    const std::string* planned = plan.content_for(u);
    std::string line = planned == nullptr ? std::string() : *planned;
    for (std::size_t ci = 0; ci < task.constraints.size(); ++ci) {
      const ConstraintSpec& c = task.constraints[ci];
      for (int due : doc_due_units(c, plan, task.num_units, ctx.profile.range_mode)) {
        if (due != u || contains_phrase(line, c.event)) continue;
        if (counter_uniform(ctx.seed, Stream::RolloutEvent, ctx.h, ctx.key, ci,
                            static_cast<std::uint64_t>(u)) < ctx.profile.compliance_rate) {
          append_phrase(line, c.event);
        }
      }
    }
    out << "#" << u << ": " << line << "\n";
  }
  return out.str();
}

std::string judge_reply(const StageContext& ctx, const GenerationRequest& request) {
  const TaskSpec& task = ctx.task;
  const GlobalPlan plan = plan_from_prompt(request.prompt, task.num_units);
  MatchConfig match;
  match.range_mode = ctx.profile.range_mode;
  const RuleJudge judge(RuleJudge::Grading::Strict, match);
  const auto values = judge.assess(plan, task).as_array();

  std::ostringstream out;
  const auto& names = criteria_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ": " << (values[i] >= 1.0 ? "YES" : "NO") << "\n";
  }
  return out.str();
}

std::string refine_reply(const StageContext& ctx, const GenerationRequest& request) {
  const TaskSpec& task = ctx.task;
  const int unit = request.tag.unit_index;
  const GlobalPlan plan = plan_from_prompt(request.prompt, task.num_units);

  std::string content;
  for (std::size_t ci = 0; ci < task.constraints.size(); ++ci) {
    const ConstraintSpec& c = task.constraints[ci];
    for (int due : doc_due_units(c, plan, task.num_units, ctx.profile.range_mode)) {
      if (due != unit) continue;
      if (counter_uniform(ctx.seed, Stream::RefineEvent, ctx.h, ctx.key, ci + 1,
                          static_cast<std::uint64_t>(unit)) < ctx.profile.compliance_rate) {
        append_phrase(content, c.event);
      }
    }
  }
  if (content.empty()) {
    const auto& fillers = scenario_fillers(task.scenario);
    content = fillers[counter_pick(fillers.size(), ctx.seed, Stream::RefineEvent, ctx.h, ctx.key,
                                   0, static_cast<std::uint64_t>(unit))];
  }

  ordered_json doc;
  doc["unit"] = unit;
  doc["content"] = content;
  return "Revised entry follows.\n\n" + doc.dump();
}

}  // namespace

std::string simulated_complete(const SimulatedProfile& profile, const TaskSpec& task,
                               std::uint64_t seed, const GenerationRequest& request) {
  const StageContext ctx{profile, task, seed, fnv1a64(request.prompt), tag_key(request.tag)};
  const std::string& prompt = request.prompt;
  const auto has = [&prompt](std::string_view marker) {
    return prompt.find(marker) != std::string::npos;
  };

  if (has(markers::kRefine)) return truncate_reply(ctx, refine_reply(ctx, request));
  if (has(markers::kWrite)) return truncate_reply(ctx, write_reply(ctx, request));
  if (has(markers::kJudge)) return judge_reply(ctx, request);
  if (has(markers::kRollout)) return rollout_reply(ctx, request);
  if (has(markers::kPlan)) return truncate_reply(ctx, plan_reply(ctx));
  throw BackendError("prompt matches no known stage");
}

std::string SimulatedBackend::complete(const GenerationRequest& request) {
  return simulated_complete(profile_, task_, seed_, request);
}

CriteriaVector parse_judge_reply(const std::string& reply) {
  std::array<double, 6> values{};
  const auto& names = criteria_names();
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    const std::string folded = fold_case(normalize_whitespace(line));
    for (std::size_t i = 0; i < names.size(); ++i) {
      const std::string prefix = names[i] + ":";
      if (!starts_with(folded, prefix)) continue;
      values[i] = trim(folded.substr(prefix.size())) == "yes" ? 1.0 : 0.0;
      break;
    }
  }
  return criteria_from_array(values);
}

CriteriaVector BackendJudge::assess(const GlobalPlan& plan, const TaskSpec& task) const {
  GenerationRequest request;
  request.prompt = judge_prompt(task, plan, match_);
  request.tag.candidate_index = plan.candidate_index;
  return parse_judge_reply(backend_->complete(request));
}

}  // namespace loom
