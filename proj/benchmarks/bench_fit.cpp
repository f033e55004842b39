#include <benchmark/benchmark.h>

#include <algorithm>

#include "msl/eval.hpp"
#include "msl/model.hpp"
#include "msl/penalties.hpp"
#include "msl/solver.hpp"

namespace {

msl::GeneratedData problem(int n, int d, int L) {
  msl::SyntheticSpec s;
  s.n = n;
  s.d = d;
  s.num_classes = L;
  s.structure = msl::GlobalRowSparse{std::min(5, d)};
  s.seed = 1;
  return msl::generate(s);
}

void BM_NllWithGrad(benchmark::State& state) {
  const auto g = problem(static_cast<int>(state.range(0)), 50, 5);
  msl::Matrix grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(msl::nll_with_grad(g.truth.values(), g.data, grad));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NllWithGrad)->Arg(500)->Arg(5000);

void BM_Fit(benchmark::State& state) {
  const auto family = static_cast<msl::PenaltyFamily>(state.range(0));
  const auto g = problem(1000, 50, 5);
  msl::WeightConfig w;
  w.c0 = 4.0;
  w.c1 = w.c2 = 0.25;
  w.c_nuclear = 0.25;
  const auto spec = msl::formula_penalty(family, g.data.features(), 5, w);
  int iterations = 0;
  for (auto _ : state) {
    const auto r = msl::fit(g.data, spec);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.objective);
  }
  state.counters["fista_iterations"] = iterations;
  state.SetLabel(msl::to_string(family));
}
BENCHMARK(BM_Fit)
    ->Arg(static_cast<int>(msl::PenaltyFamily::kGroupSlope))
    ->Arg(static_cast<int>(msl::PenaltyFamily::kSparseGroupSlope))
    ->Arg(static_cast<int>(msl::PenaltyFamily::kNuclear))
    ->Unit(benchmark::kMillisecond);

void BM_Exhaustive(benchmark::State& state) {
  const auto g = problem(200, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(msl::fit_exhaustive_complexity(g.data, 1.0, 1.0, 3).criterion);
  }
}
BENCHMARK(BM_Exhaustive)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
