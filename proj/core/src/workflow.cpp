#include "loom/workflow.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "loom/digest.hpp"
#include "loom/errors.hpp"
#include "loom/json_codec.hpp"
#include "loom/plan_audit.hpp"
#include "loom/prompts.hpp"
#include "loom/rng.hpp"

namespace loom {
namespace {

using nlohmann::json;

std::string retry_note(const char* what, int attempt, const std::string& reason) {
  if (attempt == 0) return "";
  std::ostringstream out;
  out << "Attempt " << attempt << " was rejected (" << reason << "). Follow the required " << what
      << " format exactly. ";
  return out.str();
}

}  // namespace

JudgeKind judge_kind_from(const std::string& name) {
  if (name == "rule") return JudgeKind::Rule;
  if (name == "backend") return JudgeKind::Backend;
  throw ConfigError("unknown judge kind: " + name);
}

const char* to_string(JudgeKind kind) { return kind == JudgeKind::Backend ? "backend" : "rule"; }

RuleJudge::Grading grading_from(const std::string& name) {
  if (name == "strict") return RuleJudge::Grading::Strict;
  if (name == "coverage") return RuleJudge::Grading::Coverage;
  throw ConfigError("unknown grading: " + name);
}

const char* to_string(RuleJudge::Grading grading) {
  return grading == RuleJudge::Grading::Strict ? "strict" : "coverage";
}

std::uint64_t derive_task_seed(std::uint64_t run_seed, const std::string& task_id) {
  return mix_key(run_seed, fnv1a64(task_id));
}

GlobalPlan generate_plan(const TaskSpec& task, ChatBackend& backend, const PipelineConfig& cfg,
                         int candidate_index) {
  std::string reason;
  for (int attempt = 0; attempt <= cfg.max_parse_retries; ++attempt) {
    GenerationRequest request;
    request.prompt = plan_prompt(task, retry_note("plan", attempt, reason), cfg.match);
    request.tag.candidate_index = candidate_index;
    try {
      GlobalPlan plan = parse_plan_json(backend.complete(request), task.num_units);
      plan.candidate_index = candidate_index;
      return plan;
    } catch (const SchemaError& e) {
      reason = e.what();
    } catch (const ParseError& e) {
      reason = e.what();
    }
  }
  throw ParseError("plan candidate " + std::to_string(candidate_index) + " failed after " +
                   std::to_string(cfg.max_parse_retries + 1) + " attempts: " + reason);
}

std::vector<RefineTraceEntry> refine_plan(GlobalPlan& plan, const TaskSpec& task,
                                          ChatBackend& backend, const Judge& judge,
                                          const PipelineConfig& cfg) {
  std::vector<RefineTraceEntry> trace;
  for (int iteration = 1; iteration <= cfg.max_refine_iters; ++iteration) {
    const PlanAudit audit = audit_plan(plan, task, cfg.match);
    const double score = feasibility_score(assess_criteria(plan, task, judge));
    if (audit.complete() && score >= cfg.quality_threshold) break;
    if (!audit.first_violation_unit.has_value()) break;
    const int unit = *audit.first_violation_unit;
    const std::string* before = plan.content_for(unit);

    std::optional<SubPlanItem> revision;
    std::string reason;
    for (int attempt = 0; attempt <= cfg.max_parse_retries; ++attempt) {
      std::ostringstream note;
      note << "Revision round " << iteration << ". "
           << retry_note("revision", attempt, reason);
      GenerationRequest request;
      request.prompt = refine_prompt(task, plan, unit, note.str(), cfg.match);
      request.tag.candidate_index = plan.candidate_index;
      request.tag.unit_index = unit;
      try {
        SubPlanItem item = parse_unit_revision(backend.complete(request));
        if (item.unit_index != unit) {
          throw SchemaError("revision names unit " + std::to_string(item.unit_index) +
                                " instead of " + std::to_string(unit),
                            {item.unit_index});
        }
        revision = std::move(item);
        break;
      } catch (const SchemaError& e) {
        reason = e.what();
      } catch (const ParseError& e) {
        reason = e.what();
      }
    }

    if (!revision.has_value()) {
      trace.push_back({iteration, unit, before ? *before : "", "", false});
      continue;
    }

    GlobalPlan revised = plan;
    for (auto& item : revised.items) {
      if (item.unit_index == unit) {
        item.content = revision->content;
        break;
      }
    }
    const PlanAudit after = audit_plan(revised, task, cfg.match);
    bool unit_resolved = true;
    for (const auto& placement : after.placements) {
      if (placement.unit == unit && !placement.present) {
        unit_resolved = false;
        break;
      }
    }
    const bool accepted = unit_resolved && after.coverage() >= audit.coverage();
    trace.push_back({iteration, unit, before ? *before : "", revision->content, accepted});
    if (accepted) plan = std::move(revised);
  }
  return trace;
}

std::vector<Segment> generate_segments(const TaskSpec& task, const GlobalPlan& plan,
                                       ChatBackend& backend, const PipelineConfig& cfg) {
  std::vector<Segment> segments;
  segments.reserve(static_cast<std::size_t>(task.num_units));
  for (int unit = 1; unit <= task.num_units; ++unit) {
    std::ostringstream context;
    const std::size_t window =
        cfg.context_window < 0 ? 0 : static_cast<std::size_t>(cfg.context_window);
    const std::size_t from = segments.size() > window ? segments.size() - window : 0;
    for (std::size_t i = from; i < segments.size(); ++i) {
      context << "#" << segments[i].unit_id << ": " << segments[i].text << "\n";
    }

    std::string reason;
    bool done = false;
    for (int attempt = 0; attempt <= cfg.max_parse_retries && !done; ++attempt) {
      GenerationRequest request;
      request.prompt =
          write_prompt(task, plan, unit, context.str(), retry_note("segment", attempt, reason));
      request.tag.candidate_index = plan.candidate_index;
      request.tag.unit_index = unit;
      try {
        Segment segment = parse_segment_json(backend.complete(request));
        if (segment.unit_id != unit) {
          throw SchemaError("segment names unit " + std::to_string(segment.unit_id) +
                                " instead of " + std::to_string(unit),
                            {segment.unit_id});
        }
        segments.push_back(std::move(segment));
        done = true;
      } catch (const SchemaError& e) {
        reason = e.what();
      } catch (const ParseError& e) {
        reason = e.what();
      }
    }
    if (!done) {
      throw SegmentParseExhausted("unit " + std::to_string(unit) + " failed after " +
                                      std::to_string(cfg.max_parse_retries + 1) +
                                      " attempts: " + reason,
                                  unit);
    }
  }
  return segments;
}

RunResult run_pipeline(const TaskSpec& task, const BackendFactory& factory,
                       const PipelineConfig& cfg) {
  const ValidationReport validation = validate_task(task);
  if (!validation.ok()) {
    throw ConfigError("invalid task " + task.task_id + ": " + validation.violations[0].field +
                      " " + validation.violations[0].rule);
  }

  RunResult run;
  run.task = task;
  run.task_seed = derive_task_seed(cfg.seed, task.task_id);
  run.config_digest = cfg.config_digest;
  run.filter.mode = cfg.filter.mode;
  run.filter.threshold = cfg.filter.threshold;

  const auto backend = factory.make(task, run.task_seed);
  run.backend = backend->name();

  const RuleJudge rule_judge(cfg.grading, cfg.match);
  const BackendJudge backend_judge(*backend, cfg.match);
  const Judge& judge = cfg.judge == JudgeKind::Backend
                           ? static_cast<const Judge&>(backend_judge)
                           : static_cast<const Judge&>(rule_judge);

  // Candidate rounds: one batch when the filter is off, otherwise up to
  // 1 + max_retries regeneration rounds until the screen keeps something.
  std::vector<std::size_t> surviving;
  const int max_rounds = cfg.enable_filter ? cfg.filter.max_retries + 1 : 1;
  for (int round = 0; round < max_rounds; ++round) {
    ++run.filter.rounds;
    std::vector<std::size_t> batch;
    for (int i = 0; i < cfg.candidates; ++i) {
      const int candidate_index = round * cfg.candidates + i;
      CandidateRecord record;
      try {
        record.plan = generate_plan(task, *backend, cfg, candidate_index);
      } catch (const ParseError&) {
        // A candidate that never parses is dropped; the batch goes on.
        continue;
      }
      if (cfg.enable_refine) {
        record.refine_trace = refine_plan(record.plan, task, *backend, judge, cfg);
      }
      record.criteria = assess_criteria(record.plan, task, judge);
      record.score = feasibility_score(record.criteria);
      batch.push_back(run.candidates.size());
      run.candidates.push_back(std::move(record));
    }
    if (batch.empty()) continue;

    if (!cfg.enable_filter) {
      surviving = batch;
      break;
    }

    std::vector<std::pair<GlobalPlan, CriteriaVector>> screening;
    screening.reserve(batch.size());
    for (const std::size_t idx : batch) {
      screening.emplace_back(run.candidates[idx].plan, run.candidates[idx].criteria);
    }
    const FilterResult screened = filter_set(screening, cfg.filter, run.task_seed);
    run.filter.log.insert(run.filter.log.end(), screened.log.begin(), screened.log.end());
    if (screened.retained.empty()) continue;
    for (const auto& plan : screened.retained) {
      for (const std::size_t idx : batch) {
        if (run.candidates[idx].plan.candidate_index == plan.candidate_index) {
          surviving.push_back(idx);
          break;
        }
      }
    }
    break;
  }

  if (run.candidates.empty()) {
    throw AllCandidatesFailed("no plan candidate for task " + task.task_id + " survived parsing");
  }
  if (surviving.empty()) {
    // Every round screened everything out: fall back to the best score seen.
    const std::size_t best = fallback_index(run.filter.log);
    const int fallback_candidate = run.filter.log[best].candidate_index;
    for (std::size_t idx = 0; idx < run.candidates.size(); ++idx) {
      if (run.candidates[idx].plan.candidate_index == fallback_candidate) {
        surviving.push_back(idx);
        break;
      }
    }
    run.filter.fallback_used = true;
  }

  if (cfg.enable_reward_ranking) {
    for (const std::size_t idx : surviving) {
      CandidateRecord& record = run.candidates[idx];
      RolloutOutcome outcome =
          roll_out(task, record.plan, {}, 1, cfg.rollouts, *backend, cfg.scorer, cfg.match);
      record.reward = std::move(outcome.reward);
      record.rollout_replies = std::move(outcome.replies);
    }
    std::sort(surviving.begin(), surviving.end(), [&run](std::size_t a, std::size_t b) {
      const double ra = run.candidates[a].reward->value;
      const double rb = run.candidates[b].reward->value;
      if (ra != rb) return ra > rb;
      return run.candidates[a].plan.candidate_index < run.candidates[b].plan.candidate_index;
    });
  } else {
    std::sort(surviving.begin(), surviving.end(), [&run](std::size_t a, std::size_t b) {
      return run.candidates[a].plan.candidate_index < run.candidates[b].plan.candidate_index;
    });
  }

  const std::size_t keep = std::min<std::size_t>(
      surviving.size(), static_cast<std::size_t>(cfg.top_k < 1 ? 1 : cfg.top_k));
  for (std::size_t i = 0; i < keep; ++i) {
    run.ranked.push_back(run.candidates[surviving[i]].plan.candidate_index);
  }

  const CandidateRecord& selected = run.candidates[surviving.front()];
  run.selected_candidate = selected.plan.candidate_index;
  run.segments = generate_segments(task, selected.plan, *backend, cfg);

  DocumentRun doc;
  doc.task_id = task.task_id;
  doc.plan = selected.plan;
  doc.segments = run.segments;
  doc.metadata.seed = run.task_seed;
  doc.metadata.backend = run.backend;
  run.verdicts = evaluate_document(doc, task, cfg.match);
  if (run.verdicts.empty()) {
    run.accuracy.avg = 1.0;
  } else {
    run.accuracy = accuracy_summary(run.verdicts);
  }
  return run;
}

namespace {

json constraint_to_json(const ConstraintSpec& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["event"] = c.event;
  j["unit"] = c.unit;
  j["start"] = c.start;
  j["end"] = c.end;
  j["interval"] = c.interval;
  return j;
}

ConstraintSpec constraint_from_json(const json& j) {
  ConstraintSpec c;
  c.kind = constraint_kind_from(j.at("kind").get<std::string>());
  c.event = j.at("event").get<std::string>();
  c.unit = j.at("unit").get<int>();
  c.start = j.at("start").get<int>();
  c.end = j.at("end").get<int>();
  c.interval = j.at("interval").get<int>();
  return c;
}

json plan_to_json(const GlobalPlan& plan) {
  json units = json::object();
  for (const auto& item : plan.items) {
    units[std::to_string(item.unit_index)] = item.content;
  }
  json j;
  j["candidate_index"] = plan.candidate_index;
  j["units"] = std::move(units);
  return j;
}

GlobalPlan plan_from_json(const json& j) {
  GlobalPlan plan;
  plan.candidate_index = j.at("candidate_index").get<int>();
  std::map<int, std::string> ordered;
  for (const auto& [key, value] : j.at("units").items()) {
    ordered[std::stoi(key)] = value.get<std::string>();
  }
  for (auto& [unit, content] : ordered) {
    plan.items.push_back({unit, std::move(content)});
  }
  return plan;
}

json criteria_to_json(const CriteriaVector& v) {
  json j;
  const auto values = v.as_array();
  const auto& names = criteria_names();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = values[i];
  return j;
}

CriteriaVector criteria_from_json(const json& j) {
  std::array<double, 6> values{};
  const auto& names = criteria_names();
  for (std::size_t i = 0; i < names.size(); ++i) values[i] = j.at(names[i]).get<double>();
  return criteria_from_array(values);
}

json optional_to_json(const std::optional<double>& value) {
  if (!value.has_value()) return nullptr;
  return *value;
}

}  // namespace

std::string serialize_run(const RunResult& run) {
  json j;
  j["task"] = json::parse(task_to_json(run.task));
  j["task_seed"] = run.task_seed;
  j["backend"] = run.backend;
  j["config_digest"] = run.config_digest;

  json candidates = json::array();
  for (const auto& record : run.candidates) {
    json c;
    c["plan"] = plan_to_json(record.plan);
    c["criteria"] = criteria_to_json(record.criteria);
    c["score"] = record.score;
    json trace = json::array();
    for (const auto& entry : record.refine_trace) {
      json t;
      t["iteration"] = entry.iteration;
      t["unit"] = entry.unit;
      t["before"] = entry.before;
      t["after"] = entry.after;
      t["accepted"] = entry.accepted;
      trace.push_back(std::move(t));
    }
    c["refine_trace"] = std::move(trace);
    if (record.reward.has_value()) {
      json r;
      r["value"] = record.reward->value;
      r["n_rollouts"] = record.reward->n_rollouts;
      r["per_rollout"] = record.reward->per_rollout;
      r["replies"] = record.rollout_replies;
      c["reward"] = std::move(r);
    } else {
      c["reward"] = nullptr;
    }
    candidates.push_back(std::move(c));
  }
  j["candidates"] = std::move(candidates);

  json filter;
  filter["mode"] = to_string(run.filter.mode);
  filter["threshold"] = run.filter.threshold;
  filter["rounds"] = run.filter.rounds;
  filter["fallback_used"] = run.filter.fallback_used;
  json log = json::array();
  for (const auto& entry : run.filter.log) {
    json e;
    e["candidate_index"] = entry.candidate_index;
    e["score"] = entry.score;
    e["delta"] = entry.delta;
    e["rng_draw"] = optional_to_json(entry.rng_draw);
    log.push_back(std::move(e));
  }
  filter["log"] = std::move(log);
  j["filter"] = std::move(filter);

  j["ranked"] = run.ranked;
  j["selected_candidate"] = run.selected_candidate;

  json segments = json::array();
  for (const auto& segment : run.segments) {
    json s;
    s["unit_id"] = segment.unit_id;
    s["check"] = segment.check;
    s["text"] = segment.text;
    segments.push_back(std::move(s));
  }
  j["segments"] = std::move(segments);

  json verdicts = json::array();
  for (const auto& verdict : run.verdicts) {
    json v;
    v["constraint"] = constraint_to_json(verdict.constraint);
    v["satisfied"] = verdict.satisfied;
    v["matched_units"] = verdict.matched_units;
    v["required_units"] = verdict.required_units;
    v["coverage"] = verdict.coverage;
    verdicts.push_back(std::move(v));
  }
  j["verdicts"] = std::move(verdicts);

  json accuracy;
  accuracy["acc_once"] = optional_to_json(run.accuracy.acc_once);
  accuracy["acc_range"] = optional_to_json(run.accuracy.acc_range);
  accuracy["acc_periodic"] = optional_to_json(run.accuracy.acc_periodic);
  accuracy["avg"] = run.accuracy.avg;
  accuracy["n_once"] = run.accuracy.n_once;
  accuracy["n_range"] = run.accuracy.n_range;
  accuracy["n_periodic"] = run.accuracy.n_periodic;
  j["accuracy"] = std::move(accuracy);

  return j.dump(2) + "\n";
}

RunResult run_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("run JSON malformed");

  RunResult run;
  try {
    run.task = task_from_json(j.at("task").dump());
    run.task_seed = j.at("task_seed").get<std::uint64_t>();
    run.backend = j.at("backend").get<std::string>();
    run.config_digest = j.at("config_digest").get<std::string>();

    for (const auto& c : j.at("candidates")) {
      CandidateRecord record;
      record.plan = plan_from_json(c.at("plan"));
      record.criteria = criteria_from_json(c.at("criteria"));
      record.score = c.at("score").get<double>();
      for (const auto& t : c.at("refine_trace")) {
        RefineTraceEntry entry;
        entry.iteration = t.at("iteration").get<int>();
        entry.unit = t.at("unit").get<int>();
        entry.before = t.at("before").get<std::string>();
        entry.after = t.at("after").get<std::string>();
        entry.accepted = t.at("accepted").get<bool>();
        record.refine_trace.push_back(std::move(entry));
      }
      if (!c.at("reward").is_null()) {
        RewardEstimate reward;
        reward.value = c.at("reward").at("value").get<double>();
        reward.n_rollouts = c.at("reward").at("n_rollouts").get<int>();
        reward.per_rollout = c.at("reward").at("per_rollout").get<std::vector<double>>();
        record.reward = std::move(reward);
        record.rollout_replies =
            c.at("reward").at("replies").get<std::vector<std::string>>();
      }
      run.candidates.push_back(std::move(record));
    }

    const auto& filter = j.at("filter");
    run.filter.mode = screen_mode_from(filter.at("mode").get<std::string>());
    run.filter.threshold = filter.at("threshold").get<double>();
    run.filter.rounds = filter.at("rounds").get<int>();
    run.filter.fallback_used = filter.at("fallback_used").get<bool>();
    for (const auto& e : filter.at("log")) {
      RejectionEntry entry;
      entry.candidate_index = e.at("candidate_index").get<int>();
      entry.score = e.at("score").get<double>();
      entry.delta = e.at("delta").get<int>();
      if (!e.at("rng_draw").is_null()) entry.rng_draw = e.at("rng_draw").get<double>();
      run.filter.log.push_back(std::move(entry));
    }

    run.ranked = j.at("ranked").get<std::vector<int>>();
    run.selected_candidate = j.at("selected_candidate").get<int>();

    for (const auto& s : j.at("segments")) {
      Segment segment;
      segment.unit_id = s.at("unit_id").get<int>();
      segment.check = s.at("check").get<std::string>();
      segment.text = s.at("text").get<std::string>();
      run.segments.push_back(std::move(segment));
    }

    for (const auto& v : j.at("verdicts")) {
      ConstraintVerdict verdict;
      verdict.constraint = constraint_from_json(v.at("constraint"));
      verdict.satisfied = v.at("satisfied").get<bool>();
      verdict.matched_units = v.at("matched_units").get<std::vector<int>>();
      verdict.required_units = v.at("required_units").get<std::vector<int>>();
      verdict.coverage = v.at("coverage").get<double>();
      run.verdicts.push_back(std::move(verdict));
    }

    const auto& accuracy = j.at("accuracy");
    if (!accuracy.at("acc_once").is_null()) {
      run.accuracy.acc_once = accuracy.at("acc_once").get<double>();
    }
    if (!accuracy.at("acc_range").is_null()) {
      run.accuracy.acc_range = accuracy.at("acc_range").get<double>();
    }
    if (!accuracy.at("acc_periodic").is_null()) {
      run.accuracy.acc_periodic = accuracy.at("acc_periodic").get<double>();
    }
    run.accuracy.avg = accuracy.at("avg").get<double>();
    run.accuracy.n_once = accuracy.at("n_once").get<int>();
    run.accuracy.n_range = accuracy.at("n_range").get<int>();
    run.accuracy.n_periodic = accuracy.at("n_periodic").get<int>();
  } catch (const json::exception& ex) {
    throw ParseError(std::string("run JSON field error: ") + ex.what());
  }
  return run;
}

}  // namespace loom
