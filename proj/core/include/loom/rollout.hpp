#pragma once

#include <cstdint>
#include <vector>

#include "loom/backends.hpp"
#include "loom/constraints.hpp"
#include "loom/reward.hpp"
#include "loom/types.hpp"

namespace loom {

// How a completed-or-simulated document is scored in [0, 1]: a weighted blend
// of the constraint satisfaction fraction and the unit coverage fraction.
// Weights need not sum to one; they are normalized by their sum.
struct ScorerConfig {
  double constraint_weight = 1.0;
  double coverage_weight = 0.0;
};

// Parses rollout lines of the form "#<unit>: <content>" into segments.
// Malformed lines are skipped; later lines for a repeated unit win.
std::vector<Segment> parse_rollout_lines(const std::string& reply);

// Score of a document assembled from prefix + continuation segments.
// Constraints whose required units are absent count as unsatisfied. A task
// with no constraints scores the constraint term as 1.
double score_rollout(const TaskSpec& task, const std::vector<Segment>& segments,
                     const ScorerConfig& scorer, const MatchConfig& match);

struct RolloutOutcome {
  RewardEstimate reward;
  std::vector<std::string> replies;
};

// Monte Carlo reward for a plan: n_rollouts continuations starting at
// start_unit on top of the prefix segments, each scored and averaged. The raw
// replies ride along for preference-pair construction. The plan's
// candidate_index addresses the backend streams. Throws EmptyInput when
// n_rollouts < 1.
RolloutOutcome roll_out(const TaskSpec& task, const GlobalPlan& plan,
                        const std::vector<Segment>& prefix, int start_unit, int n_rollouts,
                        ChatBackend& backend, const ScorerConfig& scorer,
                        const MatchConfig& match);

RewardEstimate estimate_reward(const TaskSpec& task, const GlobalPlan& plan,
                               const std::vector<Segment>& prefix, int start_unit, int n_rollouts,
                               ChatBackend& backend, const ScorerConfig& scorer,
                               const MatchConfig& match);

}  // namespace loom
