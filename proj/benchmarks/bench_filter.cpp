#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "loom/filter.hpp"
#include "loom/rng.hpp"

namespace {

loom::CriteriaVector benchmark_criteria(std::uint64_t i) {
  std::array<double, 6> values{};
  for (std::uint64_t k = 0; k < 6; ++k) {
    values[k] = 0.5 + 0.5 * loom::counter_uniform(9, loom::Stream::Generic, i, k);
  }
  return loom::criteria_from_array(values);
}

void feasibility_score(benchmark::State& state) {
  const auto v = benchmark_criteria(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::feasibility_score(v));
  }
}
BENCHMARK(feasibility_score);

void screen_deterministic(benchmark::State& state) {
  const auto v = benchmark_criteria(1);
  loom::FilterConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::screen(v, cfg, 7, 3));
  }
}
BENCHMARK(screen_deterministic);

void screen_bernoulli(benchmark::State& state) {
  const auto v = benchmark_criteria(2);
  loom::FilterConfig cfg;
  cfg.mode = loom::ScreenMode::Bernoulli;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::screen(v, cfg, 7, 3));
  }
}
BENCHMARK(screen_bernoulli);

void filter_candidate_set(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  std::vector<std::pair<loom::GlobalPlan, loom::CriteriaVector>> candidates;
  for (std::uint64_t i = 0; i < n; ++i) {
    loom::GlobalPlan plan;
    plan.candidate_index = static_cast<int>(i);
    plan.items.push_back({1, "entry"});
    candidates.emplace_back(std::move(plan), benchmark_criteria(i));
  }
  loom::FilterConfig cfg;
  cfg.mode = loom::ScreenMode::Bernoulli;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::filter_set(candidates, cfg, 11));
  }
}
BENCHMARK(filter_candidate_set)->Arg(4)->Arg(16)->Arg(64);

}  // namespace
