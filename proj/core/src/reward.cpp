#include "loom/reward.hpp"

#include <algorithm>

#include "loom/dpo.hpp"
#include "loom/errors.hpp"

namespace loom {

const char* to_string(PairLevel level) {
  return level == PairLevel::Generation ? "generation" : "plan";
}

PairLevel pair_level_from(const std::string& name) {
  if (name == "plan") return PairLevel::Plan;
  if (name == "generation") return PairLevel::Generation;
  throw ConfigError("unknown pair level: " + name);
}

PairStrategy pair_strategy_from(const std::string& name) {
  if (name == "all-pairs") return PairStrategy::AllPairs;
  if (name == "best-vs-rest") return PairStrategy::BestVsRest;
  throw ConfigError("unknown pair strategy: " + name);
}

RewardEstimate make_reward_estimate(std::vector<double> per_rollout) {
  if (per_rollout.empty()) throw EmptyInput("reward estimate needs at least one rollout");
  RewardEstimate estimate;
  estimate.n_rollouts = static_cast<int>(per_rollout.size());
  double sum = 0.0;
  for (double r : per_rollout) sum += r;
  estimate.value = sum / static_cast<double>(per_rollout.size());
  estimate.per_rollout = std::move(per_rollout);
  return estimate;
}

namespace {

PreferencePair make_pair(const ScoredCandidate& winner, const ScoredCandidate& loser,
                         const std::string& context, PairLevel level) {
  PreferencePair pair;
  pair.prompt_context = context;
  pair.winner_text = winner.text;
  pair.winner_reward = winner.reward.value;
  pair.loser_text = loser.text;
  pair.loser_reward = loser.reward.value;
  pair.level = level;
  pair.label_prob = preference_prob(pair.winner_reward, pair.loser_reward);
  return pair;
}

}  // namespace

PairBuildResult build_preference_pairs(const std::vector<ScoredCandidate>& candidates,
                                       const std::string& context, double margin,
                                       PairLevel level, PairStrategy strategy) {
  if (candidates.size() < 2) {
    throw EmptyInput("pair construction needs at least two candidates");
  }

  PairBuildResult result;
  auto consider = [&](const ScoredCandidate& a, const ScoredCandidate& b) {
    const ScoredCandidate& winner = a.reward.value >= b.reward.value ? a : b;
    const ScoredCandidate& loser = a.reward.value >= b.reward.value ? b : a;
    if (winner.reward.value > loser.reward.value + margin) {
      result.pairs.push_back(make_pair(winner, loser, context, level));
    } else {
      ++result.skipped;
    }
  };

  if (strategy == PairStrategy::AllPairs) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < candidates.size(); ++j) {
        consider(candidates[i], candidates[j]);
      }
    }
  } else {
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (candidates[i].reward.value > candidates[best].reward.value) best = i;
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (i != best) consider(candidates[best], candidates[i]);
    }
  }
  return result;
}

}  // namespace loom
