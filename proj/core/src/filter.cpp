#include "loom/filter.hpp"

#include <algorithm>
#include <sstream>

#include "loom/errors.hpp"
#include "loom/plan_audit.hpp"
#include "loom/rng.hpp"
#include "loom/text.hpp"

namespace loom {
namespace {

int word_count(const std::string& text) {
  std::istringstream stream(text);
  std::string word;
  int count = 0;
  while (stream >> word) ++count;
  return count;
}

bool is_placeholder(const std::string& content) {
  const std::string folded = fold_case(normalize_whitespace(content));
  return folded.size() < 3 || folded == "tbd" || folded == "todo" || folded == "..." ||
         folded == "n/a" || folded == "placeholder";
}

constexpr int kMaxContentWords = 64;

}  // namespace

const std::array<std::string, 6>& criteria_names() {
  static const std::array<std::string, 6> names = {"relevance",   "completeness",
                                                   "coherence",   "efficiency",
                                                   "specificity", "consistency"};
  return names;
}

CriteriaVector criteria_from_array(const std::array<double, 6>& values) {
  CriteriaVector v;
  v.relevance = values[0];
  v.completeness = values[1];
  v.coherence = values[2];
  v.efficiency = values[3];
  v.specificity = values[4];
  v.consistency = values[5];
  return v;
}

ScreenMode screen_mode_from(const std::string& name) {
  if (name == "deterministic") return ScreenMode::Deterministic;
  if (name == "bernoulli") return ScreenMode::Bernoulli;
  throw ConfigError("unknown screen mode: " + name);
}

const char* to_string(ScreenMode mode) {
  return mode == ScreenMode::Bernoulli ? "bernoulli" : "deterministic";
}

CriteriaVector RuleJudge::assess(const GlobalPlan& plan, const TaskSpec& task) const {
  CriteriaVector v;

  // Relevance: every unit index is inside the task span and has content.
  bool relevant = !plan.items.empty();
  for (const auto& item : plan.items) {
    if (item.unit_index < 1 || item.unit_index > task.num_units ||
        trim(item.content).empty()) {
      relevant = false;
      break;
    }
  }
  v.relevance = relevant ? 1.0 : 0.0;

  // Completeness: constraint placements represented in the planned contents.
  const PlanAudit audit = audit_plan(plan, task, match_);
  v.completeness = grading_ == Grading::Strict ? (audit.complete() ? 1.0 : 0.0)
                                               : audit.coverage();

  // Coherence: exactly one item per unit 1..num_units, strictly ascending.
  bool coherent = static_cast<int>(plan.items.size()) == task.num_units;
  int expected = 1;
  for (const auto& item : plan.items) {
    if (item.unit_index != expected) {
      coherent = false;
      break;
    }
    ++expected;
  }
  v.coherence = coherent ? 1.0 : 0.0;

  // Efficiency: no unit's planned content rambles past the word budget.
  bool efficient = true;
  for (const auto& item : plan.items) {
    if (word_count(item.content) > kMaxContentWords) {
      efficient = false;
      break;
    }
  }
  v.efficiency = efficient ? 1.0 : 0.0;

  // Specificity: no placeholder contents.
  bool specific = true;
  for (const auto& item : plan.items) {
    if (is_placeholder(item.content)) {
      specific = false;
      break;
    }
  }
  v.specificity = specific ? 1.0 : 0.0;

  // Consistency: a one-time event never planned at a unit it is not due in.
  bool consistent = true;
  for (const auto& c : task.constraints) {
    if (c.kind != ConstraintKind::Once) continue;
    for (const auto& item : plan.items) {
      if (item.unit_index != c.unit &&
          contains_phrase(item.content, c.event, match_.case_sensitive)) {
        consistent = false;
        break;
      }
    }
    if (!consistent) break;
  }
  v.consistency = consistent ? 1.0 : 0.0;

  return v;
}

CriteriaVector assess_criteria(const GlobalPlan& plan, const TaskSpec& task,
                               const Judge& judge) {
  CriteriaVector v = judge.assess(plan, task);
  auto values = v.as_array();
  for (double& value : values) value = std::clamp(value, 0.0, 1.0);
  return criteria_from_array(values);
}

double feasibility_score(const CriteriaVector& v) {
  double product = 1.0;
  for (double value : v.as_array()) product *= value;
  return product;
}

ScreenDecision screen(const CriteriaVector& v, const FilterConfig& cfg, std::uint64_t seed,
                      int candidate_index) {
  ScreenDecision decision;
  decision.score = feasibility_score(v);
  decision.mode = cfg.mode;
  if (cfg.mode == ScreenMode::Deterministic) {
    decision.delta = decision.score >= cfg.threshold ? 1 : 0;
  } else {
    const double draw =
        counter_uniform(seed, Stream::Screen, static_cast<std::uint64_t>(candidate_index));
    decision.rng_draw = draw;
    decision.delta = draw < decision.score ? 1 : 0;
  }
  return decision;
}

FilterResult filter_set(const std::vector<std::pair<GlobalPlan, CriteriaVector>>& candidates,
                        const FilterConfig& cfg, std::uint64_t seed) {
  if (candidates.empty()) throw EmptyInput("filter_set needs at least one candidate");

  FilterResult result;
  for (const auto& [plan, criteria] : candidates) {
    const ScreenDecision decision = screen(criteria, cfg, seed, plan.candidate_index);
    result.log.push_back({plan.candidate_index, decision.score, decision.delta,
                          decision.rng_draw});
    if (decision.delta == 1) result.retained.push_back(plan);
  }
  return result;
}

std::size_t fallback_index(const std::vector<RejectionEntry>& log) {
  if (log.empty()) throw EmptyInput("fallback needs at least one screened candidate");
  std::size_t best = 0;
  for (std::size_t i = 1; i < log.size(); ++i) {
    const bool better = log[i].score > log[best].score ||
                        (log[i].score == log[best].score &&
                         log[i].candidate_index < log[best].candidate_index);
    if (better) best = i;
  }
  return best;
}

}  // namespace loom
