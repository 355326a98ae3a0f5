#include <cmath>
#include <vector>

#include "doctest.h"
#include "loom/backends.hpp"
#include "loom/errors.hpp"
#include "loom/json_codec.hpp"
#include "loom/prompts.hpp"
#include "loom/rollout.hpp"

using namespace loom;

namespace {

TaskSpec rollout_task() {
  TaskSpec task;
  task.task_id = "t-rollout";
  task.scenario = Scenario::Menu;
  task.num_units = 8;
  task.prompt = "Plan eight weeks of menus.";
  task.constraints.push_back({ConstraintKind::Once, "truffle tasting", 2, 0, 0, 0});
  task.constraints.push_back({ConstraintKind::Once, "harvest feast", 5, 0, 0, 0});
  task.constraints.push_back({ConstraintKind::Periodic, "soup special", 0, 1, 0, 3});
  return task;
}

std::vector<Segment> segments_for(const TaskSpec& task,
                                  const std::vector<std::string>& contents) {
  std::vector<Segment> segments;
  for (std::size_t i = 0; i < contents.size(); ++i) {
    segments.push_back({static_cast<int>(i + 1), "", contents[i]});
  }
  (void)task;
  return segments;
}

double sample_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST_CASE("rollout lines parse into segments") {
  const auto segments = parse_rollout_lines("#1: opening week\n#2: truffle tasting\n");
  REQUIRE(segments.size() == 2);
  CHECK(segments[0].unit_id == 1);
  CHECK(segments[0].text == "opening week");
  CHECK(segments[1].text == "truffle tasting");
}

TEST_CASE("malformed rollout lines are skipped and duplicates resolve to the last") {
  const auto segments = parse_rollout_lines(
      "preamble chatter\n#x: bad unit\n#0: below range\n#3: first try\n#3: second try\n#4:\n");
  REQUIRE(segments.size() == 1);
  CHECK(segments[0].unit_id == 3);
  CHECK(segments[0].text == "second try");
}

TEST_CASE("rollout scoring blends constraint satisfaction and coverage") {
  const TaskSpec task = rollout_task();
  // soup special is due at 1, 4, 7; truffle at 2; harvest at 5
  const auto segments = segments_for(
      task, {"soup special", "truffle tasting", "calm week", "soup special", "quiet week",
             "steady week", "soup special", "closing week"});

  ScorerConfig constraint_only;
  // harvest feast at 5 is missing: 2 of 3 constraints hold
  CHECK(score_rollout(task, segments, constraint_only, MatchConfig{}) ==
        doctest::Approx(2.0 / 3.0));

  ScorerConfig coverage_only;
  coverage_only.constraint_weight = 0.0;
  coverage_only.coverage_weight = 1.0;
  CHECK(score_rollout(task, segments, coverage_only, MatchConfig{}) == doctest::Approx(1.0));

  ScorerConfig blended;
  blended.constraint_weight = 3.0;
  blended.coverage_weight = 1.0;
  CHECK(score_rollout(task, segments, blended, MatchConfig{}) ==
        doctest::Approx((3.0 * (2.0 / 3.0) + 1.0 * 1.0) / 4.0));
}

TEST_CASE("short documents shrink requirements while gaps count as misses") {
  const TaskSpec task = rollout_task();
  const std::vector<Segment> half = {{1, "", "soup special"}, {2, "", "truffle tasting"}};
  ScorerConfig coverage_only;
  coverage_only.constraint_weight = 0.0;
  coverage_only.coverage_weight = 1.0;
  CHECK(score_rollout(task, half, coverage_only, MatchConfig{}) == doctest::Approx(2.0 / 8.0));

  // Requirements are bounded by the document span: the periodic event is only
  // due at unit 1 here, while harvest feast at 5 lies beyond the span and is
  // a miss. 2 of 3 constraints hold.
  ScorerConfig constraint_only;
  CHECK(score_rollout(task, half, constraint_only, MatchConfig{}) == doctest::Approx(2.0 / 3.0));

  // A gap inside the span is a miss: unit 6 extends the span so harvest feast
  // at 5 and the periodic slot at 4 both land on absent units.
  const std::vector<Segment> gapped = {
      {1, "", "soup special"}, {2, "", "truffle tasting"}, {6, "", "quiet week"}};
  CHECK(score_rollout(task, gapped, constraint_only, MatchConfig{}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("zero scorer weights are rejected") {
  const TaskSpec task = rollout_task();
  ScorerConfig zero;
  zero.constraint_weight = 0.0;
  zero.coverage_weight = 0.0;
  CHECK_THROWS_AS(score_rollout(task, {}, zero, MatchConfig{}), ScorerError);
}

TEST_CASE("a task with no constraints scores the constraint term as one") {
  TaskSpec task = rollout_task();
  task.constraints.clear();
  const auto segments = segments_for(task, {"a", "b", "c", "d", "e", "f", "g", "h"});
  CHECK(score_rollout(task, segments, ScorerConfig{}, MatchConfig{}) == doctest::Approx(1.0));
}

TEST_CASE("roll_out estimates the mean over per-rollout scores") {
  const TaskSpec task = rollout_task();
  SimulatedProfile profile;
  profile.compliance_rate = 0.5;
  SimulatedBackend backend(profile, task, 17);
  const GlobalPlan plan =
      parse_plan_json(backend.complete([&] {
        GenerationRequest r;
        r.prompt = plan_prompt(task, "");
        return r;
      }()),
                      task.num_units);

  const RolloutOutcome outcome =
      roll_out(task, plan, {}, 1, 6, backend, ScorerConfig{}, MatchConfig{});
  CHECK(outcome.reward.n_rollouts == 6);
  CHECK(outcome.reward.per_rollout.size() == 6);
  CHECK(outcome.replies.size() == 6);
  double mean = 0.0;
  for (double v : outcome.reward.per_rollout) mean += v;
  mean /= 6.0;
  CHECK(outcome.reward.value == doctest::Approx(mean));

  const RolloutOutcome again =
      roll_out(task, plan, {}, 1, 6, backend, ScorerConfig{}, MatchConfig{});
  CHECK(again.reward.value == doctest::Approx(outcome.reward.value));
  CHECK(again.replies == outcome.replies);

  CHECK_THROWS_AS(roll_out(task, plan, {}, 1, 0, backend, ScorerConfig{}, MatchConfig{}),
                  EmptyInput);
}

TEST_CASE("prefix segments are kept and rollouts only fill the tail") {
  const TaskSpec task = rollout_task();
  SimulatedProfile profile;
  profile.compliance_rate = 1.0;
  SimulatedBackend backend(profile, task, 23);
  const GlobalPlan plan =
      parse_plan_json(backend.complete([&] {
        GenerationRequest r;
        r.prompt = plan_prompt(task, "");
        return r;
      }()),
                      task.num_units);

  const std::vector<Segment> prefix = {{1, "", "hand written opener"},
                                       {2, "", "truffle tasting day"}};
  ScorerConfig coverage_only;
  coverage_only.constraint_weight = 0.0;
  coverage_only.coverage_weight = 1.0;
  const RolloutOutcome outcome =
      roll_out(task, plan, prefix, 3, 2, backend, coverage_only, MatchConfig{});
  // prefix plus the continuation covers every unit
  CHECK(outcome.reward.value == doctest::Approx(1.0));
}

TEST_CASE("averaging more rollouts shrinks the estimator variance") {
  const TaskSpec task = rollout_task();
  SimulatedProfile profile;
  profile.compliance_rate = 0.5;
  SimulatedBackend backend(profile, task, 29);

  // Independent replicas come from distinct candidate indices.
  std::vector<double> singles;
  std::vector<double> averaged;
  for (int k = 0; k < 40; ++k) {
    GenerationRequest request;
    request.prompt = plan_prompt(task, "");
    request.tag.candidate_index = k;
    GlobalPlan plan = parse_plan_json(backend.complete(request), task.num_units);
    plan.candidate_index = k;
    singles.push_back(
        roll_out(task, plan, {}, 1, 1, backend, ScorerConfig{}, MatchConfig{}).reward.value);
    averaged.push_back(
        roll_out(task, plan, {}, 1, 8, backend, ScorerConfig{}, MatchConfig{}).reward.value);
  }
  CHECK(sample_variance(averaged) < sample_variance(singles));
}
