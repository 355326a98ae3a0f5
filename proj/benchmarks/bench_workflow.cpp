#include <benchmark/benchmark.h>

#include "loom/backends.hpp"
#include "loom/taskgen.hpp"
#include "loom/workflow.hpp"

namespace {

loom::TaskSpec benchmark_task(int units) {
  loom::TaskGenConfig cfg;
  cfg.count = 1;
  cfg.seed = 13;
  cfg.scenarios = {loom::Scenario::Floor};
  cfg.open_unit_count = units;
  return loom::generate_tasks(cfg).front();
}

void plan_generation(benchmark::State& state) {
  const auto task = benchmark_task(static_cast<int>(state.range(0)));
  loom::SimulatedProfile profile;
  profile.compliance_rate = 0.6;
  const loom::SimulatedBackendFactory factory(profile);
  const auto backend = factory.make(task, 17);
  const loom::PipelineConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::generate_plan(task, *backend, cfg, 0));
  }
}
BENCHMARK(plan_generation)->Arg(10)->Arg(52);

void plan_refinement(benchmark::State& state) {
  const auto task = benchmark_task(10);
  loom::SimulatedProfile profile;
  profile.compliance_rate = 0.4;
  const loom::SimulatedBackendFactory factory(profile);
  const auto backend = factory.make(task, 17);
  loom::PipelineConfig cfg;
  cfg.max_refine_iters = 3;
  const loom::RuleJudge judge;
  const auto plan = loom::generate_plan(task, *backend, cfg, 0);
  for (auto _ : state) {
    loom::GlobalPlan work = plan;
    benchmark::DoNotOptimize(loom::refine_plan(work, task, *backend, judge, cfg));
  }
}
BENCHMARK(plan_refinement);

void full_pipeline(benchmark::State& state) {
  const auto task = benchmark_task(10);
  loom::SimulatedProfile profile;
  profile.compliance_rate = 0.6;
  const loom::SimulatedBackendFactory factory(profile);
  loom::PipelineConfig cfg;
  cfg.seed = 17;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::run_pipeline(task, factory, cfg));
  }
}
BENCHMARK(full_pipeline);

void dataset_generation(benchmark::State& state) {
  loom::TaskGenConfig cfg;
  cfg.count = static_cast<int>(state.range(0));
  cfg.seed = 29;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::generate_tasks(cfg));
  }
}
BENCHMARK(dataset_generation)->Arg(10)->Arg(100);

}  // namespace
