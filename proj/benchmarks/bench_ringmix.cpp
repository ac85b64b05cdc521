#include <benchmark/benchmark.h>

#include "ringmix/mixing.hpp"
#include "ringmix/objectives.hpp"
#include "ringmix/simkit.hpp"
#include "ringmix/spectral.hpp"

namespace {

using namespace ringmix;

void BM_BuildRing(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_ring_matrix(n));
}
BENCHMARK(BM_BuildRing)->RangeMultiplier(4)->Range(4, 256);

void BM_SamplePermutation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_permutation(n, 1, k++));
}
BENCHMARK(BM_SamplePermutation)->RangeMultiplier(4)->Range(4, 256);

void BM_Conjugate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const MixingMatrix ring = build_ring_matrix(n);
  const Permutation p = sample_permutation(n, 3, 0);
  for (auto _ : state) benchmark::DoNotOptimize(conjugate_by_permutation(ring, p));
}
BENCHMARK(BM_Conjugate)->RangeMultiplier(4)->Range(4, 256);

// d x L weights, the per-iteration mixing cost of the ring strategies.
void BM_ApplyMixing(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = state.range(1);
  const MixingMatrix ring = build_ring_matrix(n);
  const WeightsMatrix w = WeightsMatrix::Random(d, static_cast<Eigen::Index>(n));
  for (auto _ : state) benchmark::DoNotOptimize(apply_mixing(w, ring));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * d);
}
BENCHMARK(BM_ApplyMixing)->ArgsProduct({{16, 64}, {10, 1000}});

void BM_SpectralRho(benchmark::State& state) {
  const MixingMatrix ring = build_ring_matrix(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_rho(ring));
}
BENCHMARK(BM_SpectralRho)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMicrosecond);

void BM_ProductPath(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto norm = state.range(1) == 0 ? NormKind::Frobenius : NormKind::Spectral;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(randomized_product_path(n, 20, seed++, norm));
}
BENCHMARK(BM_ProductPath)->ArgsProduct({{16, 64}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_TrainingStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto oracle = quadratic_oracle(100, 10.0, Eigen::VectorXd::Zero(100), 1.0, 1);
  ClusterState cluster = ClusterState::initial(WeightsMatrix::Random(100, static_cast<Eigen::Index>(n)), 1);
  const StepContext ctx{*oracle, 0.01, 32, 1, false};
  for (auto _ : state) {
    switch (state.range(1)) {
      case 0: step_adpsgd_fixed(cluster, ctx); break;
      case 1: step_rand_psgd(cluster, ctx, 7, Staleness::Async); break;
      default: step_d1d(cluster, ctx); break;
    }
  }
}
BENCHMARK(BM_TrainingStep)->ArgsProduct({{16, 64}, {0, 1, 2}})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
