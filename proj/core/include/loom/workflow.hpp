#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loom/backends.hpp"
#include "loom/constraints.hpp"
#include "loom/filter.hpp"
#include "loom/rollout.hpp"
#include "loom/types.hpp"

namespace loom {

enum class JudgeKind { Rule, Backend };

JudgeKind judge_kind_from(const std::string& name);
const char* to_string(JudgeKind kind);
RuleJudge::Grading grading_from(const std::string& name);
const char* to_string(RuleJudge::Grading grading);

// Everything one end-to-end task run needs. Stage toggles exist for
// ablations: with all three off the pipeline degenerates to "plan once,
// write, evaluate".
struct PipelineConfig {
  int candidates = 4;
  int top_k = 1;
  double quality_threshold = 0.5;
  int max_refine_iters = 3;
  int rollouts = 4;
  int context_window = 3;
  int max_parse_retries = 2;
  bool enable_refine = true;
  bool enable_filter = true;
  bool enable_reward_ranking = true;
  JudgeKind judge = JudgeKind::Rule;
  RuleJudge::Grading grading = RuleJudge::Grading::Coverage;
  FilterConfig filter;
  MatchConfig match;
  ScorerConfig scorer;
  std::uint64_t seed = 0;
  std::string config_digest;
};

struct RefineTraceEntry {
  int iteration = 0;
  int unit = 0;
  std::string before;
  std::string after;
  bool accepted = false;
};

struct CandidateRecord {
  GlobalPlan plan;
  CriteriaVector criteria;
  double score = 0.0;
  std::vector<RefineTraceEntry> refine_trace;
  std::optional<RewardEstimate> reward;
  std::vector<std::string> rollout_replies;
};

struct FilterRecord {
  ScreenMode mode = ScreenMode::Deterministic;
  double threshold = 0.5;
  int rounds = 0;
  bool fallback_used = false;
  std::vector<RejectionEntry> log;
};

// Full record of one task run. Serialization is canonical and carries no
// timestamps, so identical configs reproduce identical bytes.
struct RunResult {
  TaskSpec task;
  std::uint64_t task_seed = 0;
  std::string backend;
  std::string config_digest;
  std::vector<CandidateRecord> candidates;
  FilterRecord filter;
  std::vector<int> ranked;
  int selected_candidate = -1;
  std::vector<Segment> segments;
  std::vector<ConstraintVerdict> verdicts;
  AccuracyReport accuracy;
};

// Per-task seed derived from the run seed and the task id, so reordering or
// parallelizing tasks cannot change any task's streams.
std::uint64_t derive_task_seed(std::uint64_t run_seed, const std::string& task_id);

// One plan candidate with parse retries; every retry amends the prompt so a
// deterministic backend resamples. Throws ParseError when retries run out.
GlobalPlan generate_plan(const TaskSpec& task, ChatBackend& backend, const PipelineConfig& cfg,
                         int candidate_index);

// Violation-guided localized revision loop. Each iteration targets the lowest
// violating unit; a revision is accepted only when it resolves that unit
// without lowering overall placement coverage. Modifies plan in place and
// returns the trace.
std::vector<RefineTraceEntry> refine_plan(GlobalPlan& plan, const TaskSpec& task,
                                          ChatBackend& backend, const Judge& judge,
                                          const PipelineConfig& cfg);

// Writes the document unit by unit under a rolling context window of the
// last cfg.context_window segments. Throws SegmentParseExhausted when a
// unit's retries run out.
std::vector<Segment> generate_segments(const TaskSpec& task, const GlobalPlan& plan,
                                       ChatBackend& backend, const PipelineConfig& cfg);

// The full loop: sample candidate plans, refine, judge, screen (with
// regeneration rounds and a best-score fallback), rank survivors by rollout
// reward, write the document from the winner, evaluate.
RunResult run_pipeline(const TaskSpec& task, const BackendFactory& factory,
                       const PipelineConfig& cfg);

std::string serialize_run(const RunResult& run);
RunResult run_from_json(const std::string& text);

}  // namespace loom
