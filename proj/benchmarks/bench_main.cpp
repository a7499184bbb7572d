#include <benchmark/benchmark.h>

#include <trustnav/generator.hpp>
#include <trustnav/headless.hpp>

using namespace trustnav;

namespace {

const std::vector<GridConfig>& configs() {
  static const auto c = generate_configs(2, 16, {});
  return c;
}

void BM_ValueIteration(benchmark::State& state) {
  const auto& g = configs()[static_cast<std::size_t>(state.range(0))];
  for (auto _ : state) benchmark::DoNotOptimize(solve_value_iteration(g));
}
BENCHMARK(BM_ValueIteration)->DenseRange(0, 3);

void BM_RewardDistribution(benchmark::State& state) {
  const auto& g = configs()[0];
  const auto s = solve_value_iteration(g);
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reward_distribution(g, s.policy, static_cast<int>(state.range(0)), rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RewardDistribution)->Arg(100)->Arg(1000);

void BM_LibraryBuild(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(TaskLibrary::build(configs()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(configs().size()));
}
BENCHMARK(BM_LibraryBuild)->Unit(benchmark::kMillisecond);

void BM_HeadlessSession(benchmark::State& state) {
  static const auto lib = TaskLibrary::build(load_configs({TRUSTNAV_DATA_DIR "/configs"}));
  RunManifest m;
  m.n_sessions = 1;
  m.op.kind = static_cast<OperatorKind>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    m.seed = seed++;
    MemoryEventSink sink;
    benchmark::DoNotOptimize(run_headless(lib, m, sink));
  }
}
BENCHMARK(BM_HeadlessSession)
    ->Arg(static_cast<int>(OperatorKind::AutoOnly))
    ->Arg(static_cast<int>(OperatorKind::ReportFollowing))
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
