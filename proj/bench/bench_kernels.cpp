// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "topogap/activation_io.hpp"
#include "topogap/functional_graph.hpp"
#include "topogap/persistence.hpp"
#include "topogap/random.hpp"

using namespace topogap;

namespace {

ActivationMatrix make_activations(std::size_t nodes, std::size_t inputs) {
  SplitMix64 rng(1);
  ActivationMatrix m;
  m.values = Matrix(nodes, inputs);
  for (double& v : m.values.data()) v = rng.uniform() - 0.5;
  for (std::uint32_t i = 0; i < nodes; ++i) m.node_ids.push_back({0, i});
  return m;
}

void BM_Correlation(benchmark::State& state) {
  const auto m = make_activations(state.range(0), 2000);
  for (auto _ : state) benchmark::DoNotOptimize(correlation_distance_matrix(m));
}

void BM_CorrelationReference(benchmark::State& state) {
  const auto m = make_activations(state.range(0), 2000);
  for (auto _ : state) benchmark::DoNotOptimize(reference::correlation_distance_matrix(m));
}

void BM_Importance(benchmark::State& state) {
  const auto m = make_activations(state.range(0), 2000);
  for (auto _ : state) benchmark::DoNotOptimize(importance_scores(m));
}

void BM_ImportanceReference(benchmark::State& state) {
  const auto m = make_activations(state.range(0), 2000);
  for (auto _ : state) benchmark::DoNotOptimize(reference::importance_scores(m));
}

void BM_MetricCorrection(benchmark::State& state) {
  const auto g = correlation_distance_matrix(make_activations(state.range(0), 200));
  for (auto _ : state) benchmark::DoNotOptimize(apply_metric_correction(g));
}

void BM_MetricCorrectionReference(benchmark::State& state) {
  const auto g = correlation_distance_matrix(make_activations(state.range(0), 200));
  for (auto _ : state) benchmark::DoNotOptimize(reference::apply_metric_correction(g));
}

void BM_PersistenceDim1(benchmark::State& state) {
  const auto g = correlation_distance_matrix(make_activations(state.range(0), 200));
  for (auto _ : state) benchmark::DoNotOptimize(persistence_dim1(g));
}

}  // namespace

BENCHMARK(BM_Correlation)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrelationReference)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Importance)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImportanceReference)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MetricCorrection)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MetricCorrectionReference)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PersistenceDim1)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
