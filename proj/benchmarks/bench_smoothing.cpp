#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "sfelab/smoothing.hpp"

using namespace sfelab;

namespace {

std::vector<market::UnitBid> bids(int units) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> price(0.0, 100.0), qty(1.0, 50.0);
  std::vector<market::UnitBid> out;
  for (int i = 0; i < units; ++i) {
    market::UnitBid b;
    b.unit_id = "u" + std::to_string(i);
    b.firm_id = i % 3 == 0 ? "A" : "B";
    b.technology = i % 2 ? market::Technology::thermal : market::Technology::hydro;
    b.price_bid = price(gen);
    b.capacity = qty(gen);
    b.hourly_quantities.fill(b.capacity);
    b.bids_in_hour.set();
    out.push_back(b);
  }
  return out;
}

}  // namespace

static void BM_SmoothedSupply(benchmark::State& state) {
  const auto b = bids(static_cast<int>(state.range(0)));
  const smoothing::SmoothingConfig cfg{2.0};
  for (auto _ : state) benchmark::DoNotOptimize(smoothing::smoothed_supply(b, 0, 50.0, cfg));
}
BENCHMARK(BM_SmoothedSupply)->Arg(30)->Arg(300);

static void BM_SmoothedDerivatives(benchmark::State& state) {
  const auto b = bids(static_cast<int>(state.range(0)));
  const smoothing::SmoothingConfig cfg{2.0};
  for (auto _ : state) {
    auto d = smoothing::smoothed_derivatives(b, 0, b[0].price_bid, cfg, "A", "u0");
    benchmark::DoNotOptimize(d.dp_dq);
  }
}
BENCHMARK(BM_SmoothedDerivatives)->Arg(30)->Arg(300);
