#pragma once

#include <string>
#include <vector>

#include "loom/types.hpp"

namespace loom {

enum class PairLevel { Plan, Generation };

const char* to_string(PairLevel level);
PairLevel pair_level_from(const std::string& name);

// Averaged rollout reward for one candidate.
struct RewardEstimate {
  double value = 0.0;
  int n_rollouts = 0;
  std::vector<double> per_rollout;
};

RewardEstimate make_reward_estimate(std::vector<double> per_rollout);

struct ScoredCandidate {
  std::string text;
  RewardEstimate reward;
};

struct PreferencePair {
  std::string prompt_context;
  std::string winner_text;
  double winner_reward = 0.0;
  std::string loser_text;
  double loser_reward = 0.0;
  PairLevel level = PairLevel::Plan;
  // Bradley-Terry label probability sigmoid(winner_reward - loser_reward).
  // Diagnostic; always >= 0.5 because the winner has the higher reward.
  double label_prob = 0.5;
};

enum class PairStrategy { AllPairs, BestVsRest };

PairStrategy pair_strategy_from(const std::string& name);

struct PairBuildResult {
  std::vector<PreferencePair> pairs;
  int skipped = 0;
};

// One pair per unordered candidate pair whose reward gap exceeds margin
// (AllPairs), or winner fixed to the top candidate (BestVsRest). The higher
// reward is always the winner; ties and sub-margin gaps are skipped.
PairBuildResult build_preference_pairs(const std::vector<ScoredCandidate>& candidates,
                                       const std::string& context, double margin,
                                       PairLevel level,
                                       PairStrategy strategy = PairStrategy::AllPairs);

}  // namespace loom
