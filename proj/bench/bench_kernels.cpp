// Serial reference kernels against their OpenMP counterparts. The argument is
// the number of objects; OpenMP runs use the default thread count.

#include <benchmark/benchmark.h>

#include "d2ke/datasets.hpp"
#include "d2ke/embedding.hpp"
#include "d2ke/parallel.hpp"
#include "d2ke/sampling.hpp"

namespace {

using namespace d2ke;

const Dataset& pool(SyntheticTask task) {
  static const Dataset strings = gen_synthetic(SyntheticTask::kMotifString, 1024, 7);
  static const Dataset series = gen_synthetic(SyntheticTask::kShiftedSine, 1024, 7);
  return task == SyntheticTask::kMotifString ? strings : series;
}

std::span<const StructuredObject> head(const Dataset& d, std::int64_t n) {
  return std::span<const StructuredObject>(d.objects).first(static_cast<std::size_t>(n));
}

void BM_Pairwise(benchmark::State& state, SyntheticTask task, bool parallel) {
  const auto& d = pool(task);
  const auto m = DistanceMeasure::for_kind(d.kind);
  for (auto _ : state) {
    auto D = parallel ? pairwise_distances(head(d, state.range(0)), m)
                      : pairwise_distances_serial(head(d, state.range(0)), m);
    benchmark::DoNotOptimize(D.data());
  }
}

void BM_DistanceMatrix(benchmark::State& state, bool parallel) {
  const auto& d = pool(SyntheticTask::kMotifString);
  const auto m = DistanceMeasure::for_kind(d.kind);
  auto cols = head(d, 128);
  for (auto _ : state) {
    auto D = parallel ? distance_matrix(head(d, state.range(0)), cols, m)
                      : distance_matrix_serial(head(d, state.range(0)), cols, m);
    benchmark::DoNotOptimize(D.data());
  }
}

void BM_Embed(benchmark::State& state, SyntheticTask task, bool parallel) {
  const auto& d = pool(task);
  EmbeddingModel model(sample_omegas(OmegaDistribution::synthetic_default(d), 256, 11), 0.5,
                       DistanceMeasure::for_kind(d.kind));
  for (auto _ : state) {
    auto F = parallel ? embed_dataset(model, head(d, state.range(0)))
                      : embed_dataset_serial(model, head(d, state.range(0)));
    benchmark::DoNotOptimize(F.data());
  }
}

BENCHMARK_CAPTURE(BM_Pairwise, edit_serial, SyntheticTask::kMotifString, false)->Range(128, 1024);
BENCHMARK_CAPTURE(BM_Pairwise, edit_omp, SyntheticTask::kMotifString, true)->Range(128, 1024);
BENCHMARK_CAPTURE(BM_Pairwise, dtw_serial, SyntheticTask::kShiftedSine, false)->Range(128, 512);
BENCHMARK_CAPTURE(BM_Pairwise, dtw_omp, SyntheticTask::kShiftedSine, true)->Range(128, 512);
BENCHMARK_CAPTURE(BM_DistanceMatrix, edit_serial, false)->Range(128, 1024);
BENCHMARK_CAPTURE(BM_DistanceMatrix, edit_omp, true)->Range(128, 1024);
BENCHMARK_CAPTURE(BM_Embed, edit_serial, SyntheticTask::kMotifString, false)->Range(128, 1024);
BENCHMARK_CAPTURE(BM_Embed, edit_omp, SyntheticTask::kMotifString, true)->Range(128, 1024);

}  // namespace

BENCHMARK_MAIN();
