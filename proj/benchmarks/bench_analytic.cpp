#include <vector>

#include <benchmark/benchmark.h>

#include "sfelab/analytic_sfe.hpp"

using namespace sfelab;

static void BM_SolveDuopoly(benchmark::State& state) {
  const market::CostLadder ladder{0.0, 1.0, 2.0};
  for (auto _ : state) {
    auto s = sfe::solve_duopoly({5, 0, 0}, {0, 4, 0}, ladder);
    benchmark::DoNotOptimize(s.c1);
  }
}
BENCHMARK(BM_SolveDuopoly);

static void BM_SolveAndClear(benchmark::State& state) {
  const market::CostLadder ladder{0.0, 1.0, 2.0};
  for (auto _ : state) {
    auto s = sfe::solve_duopoly({9, 0, 0}, {0, 4, 0}, ladder);
    benchmark::DoNotOptimize(sfe::sfe_clearing_price(s, 6.0));
  }
}
BENCHMARK(BM_SolveAndClear);

static void BM_TransferSweep(benchmark::State& state) {
  const market::CostLadder ladder{0.0, 1.0, 2.0};
  std::vector<double> deltas;
  for (int i = 0; i < state.range(0); ++i) deltas.push_back(4.0 * i / state.range(0));
  for (auto _ : state) {
    auto pts = sfe::transfer_sweep({9, 0, 0}, {0, 4, 0}, ladder, deltas, 6.0);
    benchmark::DoNotOptimize(pts.data());
  }
}
BENCHMARK(BM_TransferSweep)->Arg(10)->Arg(100);
