#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "sfelab/market.hpp"

using namespace sfelab::market;

namespace {

std::vector<FirmSchedule> random_schedules(int firms, int offers_per_firm) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> price(0.0, 100.0), qty(1.0, 50.0);
  std::vector<FirmSchedule> out;
  for (int f = 0; f < firms; ++f) {
    std::vector<std::pair<double, double>> offers;
    for (int i = 0; i < offers_per_firm; ++i) offers.emplace_back(price(gen), qty(gen));
    out.push_back({"F" + std::to_string(f), StepSchedule::from_offers(offers)});
  }
  return out;
}

}  // namespace

static void BM_ClearMarket(benchmark::State& state) {
  const auto schedules = random_schedules(static_cast<int>(state.range(0)), 20);
  double total = 0.0;
  for (const auto& s : schedules) total += s.schedule.max_quantity();
  for (auto _ : state) {
    auto r = clear_market(schedules, 0.6 * total, 120.0, 1e9);
    benchmark::DoNotOptimize(r.price);
  }
}
BENCHMARK(BM_ClearMarket)->Arg(4)->Arg(16)->Arg(64);
