#include "loom/constraints.hpp"

#include <algorithm>

#include "loom/errors.hpp"
#include "loom/text.hpp"

namespace loom {

ConstraintVerdict check_constraint(const DocumentRun& doc, const ConstraintSpec& c,
                                   const MatchConfig& cfg) {
  ConstraintVerdict verdict;
  verdict.constraint = c;

  // The document's span, not the segment count, bounds the requirement, so a
  // document with a gap raises UnitMissing instead of silently shrinking it.
  int max_unit = 0;
  for (const auto& segment : doc.segments) max_unit = std::max(max_unit, segment.unit_id);
  verdict.required_units = c.required_units(max_unit);
  if (c.kind == ConstraintKind::Once && c.unit > max_unit) {
    throw UnitMissing("document has no segment for unit " + std::to_string(c.unit), c.unit);
  }
  if (c.kind == ConstraintKind::Range && c.end > max_unit) {
    throw UnitMissing("document has no segment for unit " + std::to_string(c.end), c.end);
  }

  for (int unit : verdict.required_units) {
    const Segment* segment = doc.segment_for(unit);
    if (segment == nullptr) {
      throw UnitMissing("document has no segment for unit " + std::to_string(unit), unit);
    }
    if (contains_phrase(segment->text, c.event, cfg.case_sensitive)) {
      verdict.matched_units.push_back(unit);
    }
  }

  const std::size_t required = verdict.required_units.size();
  const std::size_t matched = verdict.matched_units.size();
  verdict.coverage = required == 0 ? 0.0
                                   : static_cast<double>(matched) / static_cast<double>(required);
  switch (c.kind) {
    case ConstraintKind::Once:
      verdict.satisfied = matched == 1;
      break;
    case ConstraintKind::Range:
      verdict.satisfied =
          cfg.range_mode == RangeMode::Any ? matched >= 1 : (required > 0 && matched == required);
      break;
    case ConstraintKind::Periodic:
      verdict.satisfied = required > 0 && matched == required;
      break;
  }
  return verdict;
}

std::vector<ConstraintVerdict> evaluate_document(const DocumentRun& doc, const TaskSpec& task,
                                                 const MatchConfig& cfg) {
  std::vector<ConstraintVerdict> verdicts;
  verdicts.reserve(task.constraints.size());
  for (const auto& c : task.constraints) {
    verdicts.push_back(check_constraint(doc, c, cfg));
  }
  return verdicts;
}

AccuracyReport accuracy_summary(const std::vector<ConstraintVerdict>& verdicts) {
  if (verdicts.empty()) throw EmptyInput("accuracy_summary needs at least one verdict");

  AccuracyReport report;
  int sat_once = 0;
  int sat_range = 0;
  int sat_periodic = 0;
  for (const auto& v : verdicts) {
    switch (v.constraint.kind) {
      case ConstraintKind::Once:
        ++report.n_once;
        sat_once += v.satisfied ? 1 : 0;
        break;
      case ConstraintKind::Range:
        ++report.n_range;
        sat_range += v.satisfied ? 1 : 0;
        break;
      case ConstraintKind::Periodic:
        ++report.n_periodic;
        sat_periodic += v.satisfied ? 1 : 0;
        break;
    }
  }

  double sum = 0.0;
  int kinds = 0;
  if (report.n_once > 0) {
    report.acc_once = static_cast<double>(sat_once) / report.n_once;
    sum += *report.acc_once;
    ++kinds;
  }
  if (report.n_range > 0) {
    report.acc_range = static_cast<double>(sat_range) / report.n_range;
    sum += *report.acc_range;
    ++kinds;
  }
  if (report.n_periodic > 0) {
    report.acc_periodic = static_cast<double>(sat_periodic) / report.n_periodic;
    sum += *report.acc_periodic;
    ++kinds;
  }
  report.avg = kinds > 0 ? sum / kinds : 0.0;
  return report;
}

}  // namespace loom
