#include <benchmark/benchmark.h>

#include "msl/penalties.hpp"
#include "msl/rng.hpp"

namespace {

msl::Matrix gaussian(msl::Index rows, msl::Index cols, std::uint64_t seed) {
  auto rng = msl::rng_stream(seed, 0);
  msl::Matrix m(rows, cols);
  for (msl::Index j = 0; j < cols; ++j)
    for (msl::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

void BM_ProxSortedL1(benchmark::State& state) {
  const auto k = state.range(0);
  const msl::Vector v = gaussian(k, 1, 1).col(0);
  const msl::Vector w = msl::group_slope_weights(k, 1, 100);
  for (auto _ : state) benchmark::DoNotOptimize(msl::prox_sorted_l1(v, w, 1.0));
  state.SetComplexityN(k);
}
BENCHMARK(BM_ProxSortedL1)->RangeMultiplier(4)->Range(16, 16384)->Complexity(benchmark::oNLogN);

void BM_ProxGroupSlope(benchmark::State& state) {
  const auto d = state.range(0);
  const msl::Matrix b = gaussian(d, 10, 2);
  const msl::Vector lambda = msl::group_slope_weights(d, 10, 200);
  for (auto _ : state) benchmark::DoNotOptimize(msl::prox_group_slope(b, lambda, 1.0));
}
BENCHMARK(BM_ProxGroupSlope)->Arg(50)->Arg(500)->Arg(5000);

void BM_ProxSparseGroupSlope(benchmark::State& state) {
  const auto d = state.range(0);
  const bool dykstra = state.range(1) != 0;
  const msl::Matrix b = gaussian(d, 10, 3);
  const auto [lambda, kappa] = msl::sparse_group_slope_weights(d, 10, 200);
  msl::SgsProxOptions opt;
  opt.force_dykstra = dykstra;
  for (auto _ : state) {
    benchmark::DoNotOptimize(msl::prox_sparse_group_slope(b, lambda * 3, kappa * 3, 1.0, opt));
  }
}
BENCHMARK(BM_ProxSparseGroupSlope)->Args({50, 0})->Args({50, 1})->Args({500, 0})->Args({500, 1});

void BM_ProxNuclear(benchmark::State& state) {
  const auto d = state.range(0);
  const msl::Matrix b = gaussian(d, 10, 4);
  for (auto _ : state) benchmark::DoNotOptimize(msl::prox_nuclear(b, 1.0, 1.0));
}
BENCHMARK(BM_ProxNuclear)->Arg(50)->Arg(500);

void BM_DualNormSparseGroupSlope(benchmark::State& state) {
  const msl::Matrix a = gaussian(50, 5, 5);
  const auto [lambda, kappa] = msl::sparse_group_slope_weights(50, 5, 200);
  const auto spec = msl::PenaltySpec::sparse_group_slope(lambda, kappa);
  for (auto _ : state) benchmark::DoNotOptimize(msl::dual_norm(spec, a));
}
BENCHMARK(BM_DualNormSparseGroupSlope);

}  // namespace
