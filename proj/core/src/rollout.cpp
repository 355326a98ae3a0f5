#include "loom/rollout.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "loom/errors.hpp"
#include "loom/prompts.hpp"
#include "loom/text.hpp"

namespace loom {

std::vector<Segment> parse_rollout_lines(const std::string& reply) {
  std::map<int, std::string> by_unit;
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    const std::string entry = trim(line);
    if (entry.size() < 2 || entry[0] != '#') continue;
    const std::size_t colon = entry.find(':');
    if (colon == std::string::npos) continue;
    const std::string number = trim(entry.substr(1, colon - 1));
    int unit = 0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), unit);
    if (ec != std::errc() || ptr != number.data() + number.size() || unit < 1) continue;
    const std::string content = trim(entry.substr(colon + 1));
    if (content.empty()) continue;
    by_unit[unit] = content;
  }

  std::vector<Segment> segments;
  segments.reserve(by_unit.size());
  for (auto& [unit, text] : by_unit) {
    segments.push_back({unit, "", std::move(text)});
  }
  return segments;
}

double score_rollout(const TaskSpec& task, const std::vector<Segment>& segments,
                     const ScorerConfig& scorer, const MatchConfig& match) {
  const double weight_sum = scorer.constraint_weight + scorer.coverage_weight;
  if (weight_sum <= 0.0) throw ScorerError("scorer weights must sum to a positive value");

  DocumentRun doc;
  doc.task_id = task.task_id;
  doc.segments = segments;

  double constraint_term = 1.0;
  if (!task.constraints.empty()) {
    int satisfied = 0;
    for (const auto& c : task.constraints) {
      try {
        if (check_constraint(doc, c, match).satisfied) ++satisfied;
      } catch (const UnitMissing&) {
        // A gap where the constraint needs content simply counts as a miss.
      }
    }
    constraint_term = static_cast<double>(satisfied) / static_cast<double>(task.constraints.size());
  }

  double coverage_term = 1.0;
  if (task.num_units > 0) {
    int present = 0;
    for (const auto& segment : segments) {
      if (segment.unit_id >= 1 && segment.unit_id <= task.num_units) ++present;
    }
    coverage_term = static_cast<double>(present) / static_cast<double>(task.num_units);
  }

  return (scorer.constraint_weight * constraint_term + scorer.coverage_weight * coverage_term) /
         weight_sum;
}

RolloutOutcome roll_out(const TaskSpec& task, const GlobalPlan& plan,
                        const std::vector<Segment>& prefix, int start_unit, int n_rollouts,
                        ChatBackend& backend, const ScorerConfig& scorer,
                        const MatchConfig& match) {
  if (n_rollouts < 1) throw EmptyInput("reward estimation needs at least one rollout");

  std::ostringstream context;
  for (const auto& segment : prefix) {
    context << "#" << segment.unit_id << ": " << segment.text << "\n";
  }
  const std::string prompt = rollout_prompt(task, plan, start_unit, context.str());

  RolloutOutcome outcome;
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(n_rollouts));
  for (int r = 0; r < n_rollouts; ++r) {
    GenerationRequest request;
    request.prompt = prompt;
    request.tag = {plan.candidate_index, r, start_unit};
    std::string reply = backend.complete(request);

    std::map<int, Segment> merged;
    for (const auto& segment : prefix) {
      if (segment.unit_id < start_unit) merged[segment.unit_id] = segment;
    }
    for (auto& segment : parse_rollout_lines(reply)) {
      if (segment.unit_id >= start_unit) merged[segment.unit_id] = std::move(segment);
    }
    std::vector<Segment> assembled;
    assembled.reserve(merged.size());
    for (auto& [unit, segment] : merged) assembled.push_back(std::move(segment));

    scores.push_back(score_rollout(task, assembled, scorer, match));
    outcome.replies.push_back(std::move(reply));
  }
  outcome.reward = make_reward_estimate(std::move(scores));
  return outcome;
}

RewardEstimate estimate_reward(const TaskSpec& task, const GlobalPlan& plan,
                               const std::vector<Segment>& prefix, int start_unit, int n_rollouts,
                               ChatBackend& backend, const ScorerConfig& scorer,
                               const MatchConfig& match) {
  return roll_out(task, plan, prefix, start_unit, n_rollouts, backend, scorer, match).reward;
}

}  // namespace loom
