#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loom/constraints.hpp"
#include "loom/types.hpp"

namespace loom {

// The six assessment criteria, in their fixed wire order.
struct CriteriaVector {
  double relevance = 0.0;
  double completeness = 0.0;
  double coherence = 0.0;
  double efficiency = 0.0;
  double specificity = 0.0;
  double consistency = 0.0;

  std::array<double, 6> as_array() const {
    return {relevance, completeness, coherence, efficiency, specificity, consistency};
  }
};

// Criterion names in the same order as CriteriaVector::as_array.
const std::array<std::string, 6>& criteria_names();

CriteriaVector criteria_from_array(const std::array<double, 6>& values);

enum class ScreenMode { Deterministic, Bernoulli };

ScreenMode screen_mode_from(const std::string& name);
const char* to_string(ScreenMode mode);

struct ScreenDecision {
  int delta = 0;
  double score = 0.0;
  ScreenMode mode = ScreenMode::Deterministic;
  std::optional<double> rng_draw;
};

struct FilterConfig {
  ScreenMode mode = ScreenMode::Deterministic;
  double threshold = 0.5;
  int max_retries = 2;
};

// Plan assessor. Implementations: the deterministic rule judge below and the
// backend-driven YES/NO judge in the backends module.
struct Judge {
  virtual ~Judge() = default;
  virtual CriteriaVector assess(const GlobalPlan& plan, const TaskSpec& task) const = 0;
};

// Deterministic judge computing all six criteria from the plan structure and
// the task constraints. Strict grading makes every criterion binary;
// Coverage grading reports completeness as the fraction of satisfied
// placements, which gives screening a usable gradient between plans.
class RuleJudge : public Judge {
 public:
  enum class Grading { Strict, Coverage };

  explicit RuleJudge(Grading grading = Grading::Coverage, MatchConfig match = {})
      : grading_(grading), match_(match) {}

  CriteriaVector assess(const GlobalPlan& plan, const TaskSpec& task) const override;

 private:
  Grading grading_;
  MatchConfig match_;
};

// Judge output clamped into [0,1] per criterion.
CriteriaVector assess_criteria(const GlobalPlan& plan, const TaskSpec& task, const Judge& judge);

// Product of the six criterion values.
double feasibility_score(const CriteriaVector& v);

// Accept-or-reject decision for one candidate. Deterministic mode compares
// the score against cfg.threshold; Bernoulli mode accepts with probability
// equal to the score, drawing exactly one uniform addressed by
// (seed, candidate_index) so parallel evaluation order cannot change it.
ScreenDecision screen(const CriteriaVector& v, const FilterConfig& cfg, std::uint64_t seed,
                      int candidate_index);

struct RejectionEntry {
  int candidate_index = 0;
  double score = 0.0;
  int delta = 0;
  std::optional<double> rng_draw;
};

struct FilterResult {
  std::vector<GlobalPlan> retained;
  std::vector<RejectionEntry> log;
};

// Screens every candidate and keeps those with delta = 1, order preserved.
// An empty retained set signals the caller's regeneration policy; after its
// retries run out the caller falls back to fallback_index over the log.
FilterResult filter_set(const std::vector<std::pair<GlobalPlan, CriteriaVector>>& candidates,
                        const FilterConfig& cfg, std::uint64_t seed);

// Position of the argmax-score entry, ties broken by lowest candidate_index.
// Throws EmptyInput on an empty log.
std::size_t fallback_index(const std::vector<RejectionEntry>& log);

}  // namespace loom
