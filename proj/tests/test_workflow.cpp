#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "loom/backends.hpp"
#include "loom/errors.hpp"
#include "loom/json_codec.hpp"
#include "loom/parallel.hpp"
#include "loom/plan_audit.hpp"
#include "loom/taskgen.hpp"
#include "loom/workflow.hpp"

using namespace loom;

namespace {

TaskSpec tower_task(const std::string& id = "t-tower") {
  TaskSpec task;
  task.task_id = id;
  task.scenario = Scenario::Floor;
  task.num_units = 10;
  task.prompt = "Lay out a ten floor tower.";
  task.constraints.push_back({ConstraintKind::Once, "rooftop observatory", 9, 0, 0, 0});
  task.constraints.push_back({ConstraintKind::Once, "lap pool", 4, 0, 0, 0});
  task.constraints.push_back({ConstraintKind::Range, "art gallery", 0, 2, 6, 0});
  task.constraints.push_back({ConstraintKind::Periodic, "server vault", 0, 3, 0, 4});
  return task;
}

PipelineConfig fast_config() {
  PipelineConfig cfg;
  cfg.candidates = 3;
  cfg.rollouts = 3;
  cfg.max_refine_iters = 2;
  return cfg;
}

SimulatedBackendFactory factory_with(double compliance, double noise = 0.0) {
  SimulatedProfile profile;
  profile.compliance_rate = compliance;
  profile.parse_noise_rate = noise;
  return SimulatedBackendFactory(profile);
}

}  // namespace

TEST_CASE("task seeds depend on both the run seed and the task id") {
  CHECK(derive_task_seed(0, "t000") == derive_task_seed(0, "t000"));
  CHECK(derive_task_seed(0, "t000") != derive_task_seed(0, "t001"));
  CHECK(derive_task_seed(0, "t000") != derive_task_seed(1, "t000"));
}

TEST_CASE("a compliant backend drives the full pipeline to a perfect document") {
  const TaskSpec task = tower_task();
  const auto factory = factory_with(1.0);
  const RunResult run = run_pipeline(task, factory, fast_config());

  CHECK(run.backend == "simulated");
  CHECK(run.task_seed == derive_task_seed(0, task.task_id));
  CHECK(run.accuracy.avg == doctest::Approx(1.0));
  CHECK(static_cast<int>(run.segments.size()) == task.num_units);
  CHECK(run.selected_candidate == run.ranked.front());
  CHECK(!run.filter.fallback_used);
  for (const auto& verdict : run.verdicts) CHECK(verdict.satisfied);
}

TEST_CASE("the pipeline rejects structurally invalid tasks") {
  TaskSpec task = tower_task();
  task.num_units = 0;
  const auto factory = factory_with(1.0);
  CHECK_THROWS_AS(run_pipeline(task, factory, fast_config()), ConfigError);
}

TEST_CASE("runs are reproducible and thread count cannot touch the bytes") {
  std::vector<TaskSpec> tasks;
  for (int i = 0; i < 6; ++i) tasks.push_back(tower_task("t-par-" + std::to_string(i)));
  const auto factory = factory_with(0.55);
  PipelineConfig cfg = fast_config();
  cfg.seed = 12;

  std::vector<std::string> serial(tasks.size());
  parallel_for(tasks.size(), 1, [&](std::size_t i) {
    serial[i] = serialize_run(run_pipeline(tasks[i], factory, cfg));
  });
  std::vector<std::string> threaded(tasks.size());
  parallel_for(tasks.size(), 8, [&](std::size_t i) {
    threaded[i] = serialize_run(run_pipeline(tasks[i], factory, cfg));
  });
  CHECK(serial == threaded);

  // and a repeat run of one task is byte-identical
  CHECK(serialize_run(run_pipeline(tasks[2], factory, cfg)) == serial[2]);
}

TEST_CASE("refinement only rewrites the units it reports and never loses coverage") {
  const TaskSpec task = tower_task();
  SimulatedProfile profile;
  profile.compliance_rate = 0.45;
  SimulatedBackend backend(profile, task, derive_task_seed(3, task.task_id));
  PipelineConfig cfg = fast_config();
  cfg.max_refine_iters = 6;

  GlobalPlan plan = generate_plan(task, backend, cfg, 0);
  const GlobalPlan original = plan;
  const double initial_coverage = audit_plan(plan, task, cfg.match).coverage();

  const RuleJudge judge(cfg.grading, cfg.match);
  const auto trace = refine_plan(plan, task, backend, judge, cfg);

  CHECK(audit_plan(plan, task, cfg.match).coverage() >= initial_coverage);

  std::set<int> accepted_units;
  for (const auto& entry : trace) {
    if (entry.accepted) accepted_units.insert(entry.unit);
  }
  REQUIRE(plan.items.size() == original.items.size());
  for (std::size_t i = 0; i < plan.items.size(); ++i) {
    if (plan.items[i].content != original.items[i].content) {
      CHECK(accepted_units.count(plan.items[i].unit_index) == 1);
    }
  }
}

TEST_CASE("refinement on a compliant backend completes the plan") {
  const TaskSpec task = tower_task();
  SimulatedProfile profile;
  profile.compliance_rate = 0.4;
  SimulatedBackend weak_planner(profile, task, 8);
  PipelineConfig cfg = fast_config();
  GlobalPlan plan = generate_plan(task, weak_planner, cfg, 1);
  if (audit_plan(plan, task, cfg.match).complete()) return;

  // refine with a fully compliant reviser
  profile.compliance_rate = 1.0;
  SimulatedBackend reviser(profile, task, 8);
  cfg.max_refine_iters = 16;
  const RuleJudge judge(cfg.grading, cfg.match);
  refine_plan(plan, task, reviser, judge, cfg);
  CHECK(audit_plan(plan, task, cfg.match).complete());
}

TEST_CASE("reward ranking puts the highest observed reward first") {
  const TaskSpec task = tower_task();
  const auto factory = factory_with(0.5);
  PipelineConfig cfg = fast_config();
  cfg.seed = 21;
  cfg.enable_refine = false;
  cfg.top_k = 3;
  const RunResult run = run_pipeline(task, factory, cfg);

  double best = -1.0;
  for (const auto& record : run.candidates) {
    if (record.reward.has_value()) best = std::max(best, record.reward->value);
  }
  REQUIRE(!run.ranked.empty());
  const auto& first = *std::find_if(run.candidates.begin(), run.candidates.end(),
                                    [&](const CandidateRecord& r) {
                                      return r.plan.candidate_index == run.ranked.front();
                                    });
  CHECK(first.reward->value == doctest::Approx(best));
  CHECK(static_cast<int>(first.rollout_replies.size()) == cfg.rollouts);

  // ranked rewards are non-increasing
  double prev = first.reward->value;
  for (std::size_t i = 1; i < run.ranked.size(); ++i) {
    const auto& record = *std::find_if(run.candidates.begin(), run.candidates.end(),
                                       [&](const CandidateRecord& r) {
                                         return r.plan.candidate_index == run.ranked[i];
                                       });
    CHECK(record.reward->value <= prev + 1e-12);
    prev = record.reward->value;
  }
}

TEST_CASE("disabling reward ranking keeps candidate order and skips rollouts") {
  const TaskSpec task = tower_task();
  const auto factory = factory_with(0.6);
  PipelineConfig cfg = fast_config();
  cfg.enable_reward_ranking = false;
  const RunResult run = run_pipeline(task, factory, cfg);
  for (const auto& record : run.candidates) {
    CHECK(!record.reward.has_value());
    CHECK(record.rollout_replies.empty());
  }
  REQUIRE(!run.ranked.empty());
  // the earliest surviving candidate wins
  for (const auto& record : run.candidates) {
    if (record.plan.candidate_index < run.ranked.front()) {
      // anything before the winner must have been screened out
      bool rejected = false;
      for (const auto& entry : run.filter.log) {
        if (entry.candidate_index == record.plan.candidate_index && entry.delta == 0) {
          rejected = true;
        }
      }
      CHECK(rejected);
    }
  }
}

TEST_CASE("a hopeless batch falls back to the best scoring reject") {
  const TaskSpec task = tower_task();
  const auto factory = factory_with(0.0);
  PipelineConfig cfg = fast_config();
  const RunResult run = run_pipeline(task, factory, cfg);

  CHECK(run.filter.fallback_used);
  CHECK(run.filter.rounds == cfg.filter.max_retries + 1);
  CHECK(static_cast<int>(run.candidates.size()) == cfg.candidates * run.filter.rounds);
  CHECK(static_cast<int>(run.filter.log.size()) == static_cast<int>(run.candidates.size()));
  for (const auto& entry : run.filter.log) CHECK(entry.delta == 0);

  double best_score = -1.0;
  for (const auto& entry : run.filter.log) best_score = std::max(best_score, entry.score);
  const auto& selected = *std::find_if(run.candidates.begin(), run.candidates.end(),
                                       [&](const CandidateRecord& r) {
                                         return r.plan.candidate_index == run.selected_candidate;
                                       });
  CHECK(selected.score == doctest::Approx(best_score));
}

TEST_CASE("unparseable candidates end in AllCandidatesFailed") {
  const TaskSpec task = tower_task();
  const auto factory = factory_with(1.0, 1.0);
  PipelineConfig cfg = fast_config();
  cfg.max_parse_retries = 1;
  CHECK_THROWS_AS(run_pipeline(task, factory, cfg), AllCandidatesFailed);
}

TEST_CASE("the backend judge and the strict rule judge produce the same run") {
  const TaskSpec task = tower_task();
  const auto factory = factory_with(0.5);
  PipelineConfig strict_rule = fast_config();
  strict_rule.seed = 5;
  strict_rule.grading = RuleJudge::Grading::Strict;

  PipelineConfig via_backend = strict_rule;
  via_backend.judge = JudgeKind::Backend;

  CHECK(serialize_run(run_pipeline(task, factory, strict_rule)) ==
        serialize_run(run_pipeline(task, factory, via_backend)));
}

TEST_CASE("run records survive a serialization round trip byte for byte") {
  const TaskSpec task = tower_task();
  const auto factory = factory_with(0.5);
  PipelineConfig cfg = fast_config();
  cfg.seed = 31;
  cfg.config_digest = "0123456789abcdef";
  const RunResult run = run_pipeline(task, factory, cfg);
  const std::string once = serialize_run(run);
  const std::string twice = serialize_run(run_from_json(once));
  CHECK(once == twice);
  CHECK_THROWS_AS(run_from_json("{p broken"), ParseError);
  CHECK_THROWS_AS(run_from_json("{}"), ParseError);
}

TEST_CASE("generated datasets run end to end") {
  TaskGenConfig gen;
  gen.count = 3;
  gen.seed = 4;
  gen.scenarios = {Scenario::Floor};
  gen.open_unit_count = 12;
  const auto tasks = generate_tasks(gen);
  const auto factory = factory_with(0.8);
  for (const auto& task : tasks) {
    const RunResult run = run_pipeline(task, factory, fast_config());
    CHECK(static_cast<int>(run.segments.size()) == task.num_units);
  }
}
