// Serial reference versus OpenMP-parallel kernels on the same inputs.

#include <benchmark/benchmark.h>

#include "rassoc/association.hpp"
#include "rassoc/core/taskgen.hpp"
#include "rassoc/harness.hpp"
#include "rassoc/model/train.hpp"
#include "rassoc/parallel.hpp"
#include "rassoc/robustness.hpp"

using namespace rassoc;

namespace {

Dataset bench_data(std::size_t n, std::uint64_t seed) {
  SufficiencyConfig c;
  c.s = 0.5;
  c.n = n;
  c.seed = seed;
  return generate_dataset(c);
}

// Briefly trained I->OR and R->O models, so decodes parse and attribution
// does real work.
const ConfigSuite& suite() {
  static const ConfigSuite s = [] {
    TrainConfig tc;
    tc.max_epochs = 6;
    tc.patience = 6;
    tc.seed = 3;
    const Mode modes[] = {Mode::i_or, Mode::r_o};
    return train_suite(bench_data(400, 77), tc, modes);
  }();
  return s;
}

Execution policy(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel (" + std::to_string(max_threads()) + " threads)");
}

void BM_BatchGradient(benchmark::State& state) {
  const auto& p = suite().model(Mode::i_or);
  const auto data = bench_data(128, 5);
  const auto examples = make_examples(data, Mode::i_or, p.vocab());
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradient(p, examples, policy(state)));
  label(state);
}

void BM_NoiseSweep(benchmark::State& state) {
  BuiltinTarget target(suite().model(Mode::i_or));
  const auto data = bench_data(64, 6);
  NoiseConfig cfg;
  cfg.sigma2_grid = {0, 10, 50};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sweep_and_classify(target, suite().model(Mode::r_o), data, cfg, {}, policy(state)));
  }
  label(state);
}

void BM_AttributionCorpus(benchmark::State& state) {
  BuiltinTarget target(suite().model(Mode::i_or));
  const auto data = bench_data(64, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_attribution_corpus(target, data, kDefaultTopK, policy(state)));
  }
  label(state);
}

}  // namespace

BENCHMARK(BM_BatchGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NoiseSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttributionCorpus)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
