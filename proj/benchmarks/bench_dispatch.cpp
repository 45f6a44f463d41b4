#include <benchmark/benchmark.h>

#include "sfelab/best_response.hpp"

using namespace sfelab;

namespace {

dispatch::DailyProblem day(int hours, int steps) {
  dispatch::DailyProblem p;
  for (int h = 0; h < hours; ++h) {
    dispatch::ResidualSteps rs;
    const double peak = 1.0 + 0.5 * (h % 12) / 12.0;
    for (int z = 0; z < 12; ++z) rs.steps.push_back({peak * (60.0 - 4.0 * z), 10.0 * z});
    p.hours.push_back(rs);
    p.thermal_capacity.push_back(40.0);
  }
  p.thermal_cost = 25.0;
  p.hydro_capacity = 60.0;
  p.state = {3000.0, 0.0, 6000.0};
  p.value = hydro::ValueSpline({0.0, 1500.0, 3000.0, 4500.0, 6000.0}, {0.0, 60000.0, 100000.0, 120000.0, 130000.0});
  p.expected_inflow = 200.0;
  p.days_per_period = 7;
  p.supply_steps = steps;
  p.value_steps = steps;
  return p;
}

}  // namespace

static void BM_SolveDaily(benchmark::State& state) {
  const auto p = day(24, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto s = dispatch::solve_daily(p);
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_SolveDaily)->Arg(5)->Arg(10)->Arg(20);
