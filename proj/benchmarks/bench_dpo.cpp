#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "loom/dpo.hpp"
#include "loom/rng.hpp"

namespace {

struct ToySetup {
  std::vector<std::string> vocab;
  loom::ToyPolicy policy;
  loom::ToyPolicy reference;
  std::vector<loom::PreferencePair> pairs;
};

ToySetup benchmark_setup(int vocab_n, int pair_n) {
  std::vector<std::string> vocab;
  std::vector<double> logits;
  std::vector<double> ref_logits;
  for (int k = 0; k < vocab_n; ++k) {
    vocab.push_back("tok" + std::to_string(k));
    logits.push_back(2.0 * loom::counter_uniform(5, loom::Stream::Generic, 1, k) - 1.0);
    ref_logits.push_back(2.0 * loom::counter_uniform(5, loom::Stream::Generic, 2, k) - 1.0);
  }
  std::vector<loom::PreferencePair> pairs;
  const auto n = static_cast<std::uint64_t>(vocab_n);
  for (int j = 0; j < pair_n; ++j) {
    const auto w = loom::counter_pick(n, 5, loom::Stream::Generic, 3, j);
    auto l = loom::counter_pick(n - 1, 5, loom::Stream::Generic, 4, j);
    if (l >= w) ++l;
    loom::PreferencePair pair;
    pair.winner_text = vocab[w];
    pair.loser_text = vocab[l];
    pairs.push_back(std::move(pair));
  }
  return {vocab, loom::ToyPolicy(vocab, logits), loom::ToyPolicy(vocab, ref_logits),
          std::move(pairs)};
}

void preference_loss(benchmark::State& state) {
  const auto setup = benchmark_setup(16, static_cast<int>(state.range(0)));
  const loom::DpoConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::dpo_loss(setup.pairs, setup.policy, setup.reference, cfg));
  }
}
BENCHMARK(preference_loss)->Arg(8)->Arg(64);

void preference_grad(benchmark::State& state) {
  const auto setup = benchmark_setup(16, static_cast<int>(state.range(0)));
  const loom::DpoConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loom::dpo_grad(setup.pairs, setup.policy, setup.reference, cfg));
  }
}
BENCHMARK(preference_grad)->Arg(8)->Arg(64);

void toy_training_step(benchmark::State& state) {
  auto setup = benchmark_setup(16, 32);
  const loom::DpoConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        loom::toy_train_step(setup.policy, setup.pairs, setup.reference, 0.05, cfg));
  }
}
BENCHMARK(toy_training_step);

}  // namespace
