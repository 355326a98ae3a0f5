#pragma once

#include <optional>
#include <vector>

#include "loom/types.hpp"

namespace loom {

struct MatchConfig {
  bool case_sensitive = false;
  RangeMode range_mode = RangeMode::Any;
};

struct ConstraintVerdict {
  ConstraintSpec constraint;
  bool satisfied = false;
  std::vector<int> matched_units;
  std::vector<int> required_units;
  // Fraction of required units whose segment contains the event. Diagnostic
  // only; satisfaction stays all-or-nothing for Periodic and Range "all".
  double coverage = 0.0;
};

struct AccuracyReport {
  std::optional<double> acc_once;
  std::optional<double> acc_range;
  std::optional<double> acc_periodic;
  double avg = 0.0;
  int n_once = 0;
  int n_range = 0;
  int n_periodic = 0;
};

// Verdict for a single constraint against a full document. Once requires the
// event in its unit; Range requires it in at least one span unit (mode "any")
// or in every span unit (mode "all"); Periodic requires it at every unit
// start, start+interval, ... within the document. Matching is substring
// containment on whitespace-normalized text, case-folded unless
// case_sensitive. Throws UnitMissing when a required unit has no segment.
ConstraintVerdict check_constraint(const DocumentRun& doc, const ConstraintSpec& c,
                                   const MatchConfig& cfg);

// One verdict per task constraint, order preserved.
std::vector<ConstraintVerdict> evaluate_document(const DocumentRun& doc, const TaskSpec& task,
                                                 const MatchConfig& cfg);

// Per-kind accuracy (satisfied / count, null when a kind is absent) and the
// mean over the kinds that are present. Throws EmptyInput on no verdicts.
AccuracyReport accuracy_summary(const std::vector<ConstraintVerdict>& verdicts);

}  // namespace loom
