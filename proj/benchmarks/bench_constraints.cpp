#include <benchmark/benchmark.h>

#include <string>

#include "loom/constraints.hpp"

namespace {

loom::DocumentRun benchmark_doc(int num_units) {
  loom::DocumentRun doc;
  doc.task_id = "bench";
  for (int u = 1; u <= num_units; ++u) {
    std::string text = "unit " + std::to_string(u) + " routine filler entry with detail";
    if (u % 4 == 0) text += " quarterly review";
    doc.segments.push_back({u, "", text});
  }
  return doc;
}

void constraint_check_periodic(benchmark::State& state) {
  const auto doc = benchmark_doc(static_cast<int>(state.range(0)));
  loom::ConstraintSpec c{loom::ConstraintKind::Periodic, "quarterly review", 0, 4, 0, 4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::check_constraint(doc, c, {}));
  }
}
BENCHMARK(constraint_check_periodic)->Arg(52)->Arg(100);

void document_evaluation(benchmark::State& state) {
  const auto doc = benchmark_doc(52);
  loom::TaskSpec task;
  task.task_id = "bench";
  task.num_units = 52;
  task.constraints.push_back({loom::ConstraintKind::Once, "quarterly review", 8, 0, 0, 0});
  task.constraints.push_back({loom::ConstraintKind::Range, "routine filler", 0, 10, 30, 0});
  task.constraints.push_back({loom::ConstraintKind::Periodic, "quarterly review", 0, 4, 0, 4});
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::evaluate_document(doc, task, {}));
  }
}
BENCHMARK(document_evaluation);

}  // namespace
