#include <algorithm>
#include <cctype>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "loom/constraints.hpp"
#include "loom/errors.hpp"
#include "loom/text.hpp"

using namespace loom;

namespace {

DocumentRun make_doc(int num_units) {
  DocumentRun doc;
  doc.task_id = "t-test";
  for (int u = 1; u <= num_units; ++u) {
    doc.segments.push_back({u, "", "unit " + std::to_string(u) + " filler text"});
  }
  return doc;
}

void plant(DocumentRun& doc, int unit, const std::string& event) {
  doc.segments[static_cast<std::size_t>(unit - 1)].text += " " + event;
}

// Independent re-implementation used as the oracle: linear scan per unit with
// its own normalization, no shared helpers from the library.
bool oracle_satisfied(const DocumentRun& doc, const ConstraintSpec& c, RangeMode mode) {
  auto unit_has = [&doc](int unit, const std::string& event) {
    std::string hay;
    for (const auto& seg : doc.segments) {
      if (seg.unit_id == unit) hay = seg.text;
    }
    auto squash = [](const std::string& s) {
      std::string out;
      bool pending = false;
      for (char ch : s) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v') {
          pending = !out.empty();
          continue;
        }
        if (pending) out += ' ';
        pending = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      }
      return out;
    };
    const std::string needle = squash(event);
    if (needle.empty()) return false;
    return squash(hay).find(needle) != std::string::npos;
  };

  const int n = static_cast<int>(doc.segments.size());
  switch (c.kind) {
    case ConstraintKind::Once:
      return unit_has(c.unit, c.event);
    case ConstraintKind::Range: {
      if (mode == RangeMode::Any) {
        for (int u = c.start; u <= c.end; ++u) {
          if (unit_has(u, c.event)) return true;
        }
        return false;
      }
      for (int u = c.start; u <= c.end; ++u) {
        if (!unit_has(u, c.event)) return false;
      }
      return true;
    }
    case ConstraintKind::Periodic: {
      bool any_due = false;
      for (int u = c.start; u <= n; u += c.interval) {
        any_due = true;
        if (!unit_has(u, c.event)) return false;
      }
      return any_due;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("a planted once event satisfies its constraint") {
  DocumentRun doc = make_doc(12);
  plant(doc, 5, "ran the Marathon");
  ConstraintSpec c{ConstraintKind::Once, "marathon", 5, 0, 0, 0};
  const auto verdict = check_constraint(doc, c, {});
  CHECK(verdict.satisfied);
  CHECK(verdict.matched_units == std::vector<int>{5});
  CHECK(verdict.required_units == std::vector<int>{5});
}

TEST_CASE("periodic demands the full progression") {
  DocumentRun doc = make_doc(12);
  plant(doc, 4, "review");
  plant(doc, 8, "review");
  ConstraintSpec c{ConstraintKind::Periodic, "review", 0, 4, 0, 4};
  const auto verdict = check_constraint(doc, c, {});
  CHECK_FALSE(verdict.satisfied);
  CHECK(verdict.required_units == std::vector<int>{4, 8, 12});
  CHECK(verdict.matched_units == std::vector<int>{4, 8});
  CHECK(verdict.coverage == doctest::Approx(2.0 / 3.0));

  plant(doc, 12, "review");
  CHECK(check_constraint(doc, c, {}).satisfied);
}

TEST_CASE("range any accepts one hit inside the span") {
  DocumentRun doc = make_doc(20);
  plant(doc, 13, "gala");
  ConstraintSpec c{ConstraintKind::Range, "gala", 0, 10, 15, 0};
  CHECK(check_constraint(doc, c, {}).satisfied);

  MatchConfig all_mode;
  all_mode.range_mode = RangeMode::All;
  CHECK_FALSE(check_constraint(doc, c, all_mode).satisfied);
}

TEST_CASE("range all demands every unit in the span") {
  DocumentRun doc = make_doc(6);
  for (int u = 2; u <= 4; ++u) plant(doc, u, "inspection");
  ConstraintSpec c{ConstraintKind::Range, "inspection", 0, 2, 4, 0};
  MatchConfig all_mode;
  all_mode.range_mode = RangeMode::All;
  CHECK(check_constraint(doc, c, all_mode).satisfied);
}

TEST_CASE("a document missing a required unit raises") {
  DocumentRun doc = make_doc(10);
  doc.segments.erase(doc.segments.begin() + 4);
  ConstraintSpec c{ConstraintKind::Once, "marathon", 5, 0, 0, 0};
  CHECK_THROWS_AS(check_constraint(doc, c, {}), UnitMissing);

  DocumentRun shallow = make_doc(8);
  ConstraintSpec far{ConstraintKind::Once, "marathon", 9, 0, 0, 0};
  CHECK_THROWS_AS(check_constraint(shallow, far, {}), UnitMissing);
}

TEST_CASE("matching ignores case and segment whitespace shape") {
  DocumentRun doc = make_doc(3);
  doc.segments[1].text = "  The\tGRAND   opening \n happened";
  ConstraintSpec c{ConstraintKind::Once, "grand opening", 2, 0, 0, 0};
  CHECK(check_constraint(doc, c, {}).satisfied);

  MatchConfig strict;
  strict.case_sensitive = true;
  CHECK_FALSE(check_constraint(doc, c, strict).satisfied);
}

TEST_CASE("verdicts agree with a brute-force oracle on random instances") {
  std::mt19937_64 rng(20260816);
  const std::vector<std::string> events = {"marathon", "gala night", "review", "tasting",
                                           "fire drill", "deep clean"};
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 17);
    DocumentRun doc = make_doc(n);
    for (int u = 1; u <= n; ++u) {
      if (rng() % 2 == 0) plant(doc, u, events[rng() % events.size()]);
      if (rng() % 4 == 0) plant(doc, u, events[rng() % events.size()]);
    }

    ConstraintSpec c;
    c.event = events[rng() % events.size()];
    const int kind_pick = static_cast<int>(rng() % 3);
    if (kind_pick == 0) {
      c.kind = ConstraintKind::Once;
      c.unit = 1 + static_cast<int>(rng() % n);
    } else if (kind_pick == 1) {
      c.kind = ConstraintKind::Range;
      c.start = 1 + static_cast<int>(rng() % n);
      c.end = c.start + static_cast<int>(rng() % (n - c.start + 1));
    } else {
      c.kind = ConstraintKind::Periodic;
      c.start = 1 + static_cast<int>(rng() % n);
      c.interval = 1 + static_cast<int>(rng() % 5);
    }
    MatchConfig cfg;
    cfg.range_mode = rng() % 2 == 0 ? RangeMode::Any : RangeMode::All;

    const auto verdict = check_constraint(doc, c, cfg);
    CHECK(verdict.satisfied == oracle_satisfied(doc, c, cfg.range_mode));
  }
}

TEST_CASE("adding the event anywhere never unsatisfies a verdict") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 6 + static_cast<int>(rng() % 10);
    DocumentRun doc = make_doc(n);
    ConstraintSpec c{ConstraintKind::Periodic, "audit", 0,
                     1 + static_cast<int>(rng() % n), 0, 1 + static_cast<int>(rng() % 4)};
    for (int u = 1; u <= n; ++u) {
      if (rng() % 3 == 0) plant(doc, u, "audit");
    }
    const bool before = check_constraint(doc, c, {}).satisfied;
    plant(doc, 1 + static_cast<int>(rng() % n), "audit");
    const bool after = check_constraint(doc, c, {}).satisfied;
    if (before) CHECK(after);
  }
}

TEST_CASE("evaluate_document preserves constraint order") {
  DocumentRun doc = make_doc(12);
  plant(doc, 3, "kickoff");
  TaskSpec task;
  task.task_id = "t-test";
  task.num_units = 12;
  task.constraints.push_back({ConstraintKind::Once, "kickoff", 3, 0, 0, 0});
  task.constraints.push_back({ConstraintKind::Once, "wrap party", 9, 0, 0, 0});
  const auto verdicts = evaluate_document(doc, task, {});
  REQUIRE(verdicts.size() == 2);
  CHECK(verdicts[0].satisfied);
  CHECK_FALSE(verdicts[1].satisfied);
  CHECK(evaluate_document(doc, TaskSpec{"t", Scenario::Diary, 12, {}, ""}, {}).empty());
}

TEST_CASE("accuracy summary follows the per-kind mean") {
  std::vector<ConstraintVerdict> verdicts;
  auto add = [&verdicts](ConstraintKind kind, int satisfied, int total) {
    for (int i = 0; i < total; ++i) {
      ConstraintVerdict v;
      v.constraint.kind = kind;
      v.satisfied = i < satisfied;
      verdicts.push_back(v);
    }
  };
  add(ConstraintKind::Once, 2, 4);      // 0.5
  add(ConstraintKind::Range, 1, 4);     // 0.25
  add(ConstraintKind::Periodic, 3, 4);  // 0.75

  const auto report = accuracy_summary(verdicts);
  CHECK(*report.acc_once == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*report.acc_range == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(*report.acc_periodic == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.avg == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.n_once == 4);
}

TEST_CASE("all satisfied yields ones everywhere") {
  std::vector<ConstraintVerdict> verdicts(3);
  verdicts[0].constraint.kind = ConstraintKind::Once;
  verdicts[1].constraint.kind = ConstraintKind::Range;
  verdicts[2].constraint.kind = ConstraintKind::Periodic;
  for (auto& v : verdicts) v.satisfied = true;
  const auto report = accuracy_summary(verdicts);
  CHECK(report.avg == doctest::Approx(1.0));
}

TEST_CASE("absent kinds drop out of the average") {
  std::vector<ConstraintVerdict> verdicts;
  ConstraintVerdict once;
  once.constraint.kind = ConstraintKind::Once;
  once.satisfied = true;
  ConstraintVerdict periodic;
  periodic.constraint.kind = ConstraintKind::Periodic;
  periodic.satisfied = false;
  verdicts.push_back(once);
  verdicts.push_back(periodic);

  const auto report = accuracy_summary(verdicts);
  CHECK_FALSE(report.acc_range.has_value());
  CHECK(report.avg == doctest::Approx(0.5));
}

TEST_CASE("no verdicts at all is an error") {
  CHECK_THROWS_AS(accuracy_summary({}), EmptyInput);
}
