#include <gtest/gtest.h>

#include <random>

#include "sfelab/error.hpp"
#include "sfelab/market.hpp"

using namespace sfelab;
using namespace sfelab::market;

namespace {

StepSchedule sched(std::vector<Breakpoint> pts) { return StepSchedule(std::move(pts)); }

const CostLadder kLadder{0.0, 1.0, 2.0};

}  // namespace

TEST(StepSchedule, BelowFirstBreakpointIsZero) { EXPECT_EQ(evaluate_schedule(sched({{1.0, 3}}), 0.5), 0.0); }

TEST(StepSchedule, RightContinuousAtBreakpoint) { EXPECT_EQ(evaluate_schedule(sched({{1.0, 3}}), 1.0), 3.0); }

TEST(StepSchedule, BetweenBreakpoints) {
  EXPECT_EQ(evaluate_schedule(sched({{1.0, 3}, {1.5, 5}}), 1.2), 3.0);
}

TEST(StepSchedule, RejectsUnorderedPrices) {
  EXPECT_THROW(sched({{1.5, 3}, {1.0, 5}}), ValidationError);
  EXPECT_THROW(sched({{1.0, 3}, {1.5, 2}}), ValidationError);
}

TEST(StepSchedule, FromOffersMergesEqualPrices) {
  const auto s = StepSchedule::from_offers({{2.0, 1.0}, {1.0, 2.0}, {2.0, 0.5}, {3.0, 0.0}});
  ASSERT_EQ(s.breakpoints().size(), 2u);
  EXPECT_DOUBLE_EQ(s.evaluate(2.0), 3.5);
  EXPECT_DOUBLE_EQ(s.step_at(2.0), 1.5);
}

TEST(StepSchedule, AggregationCommutesWithEvaluation) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<double, double>> a, b;
    for (int i = 0; i < 4; ++i) a.emplace_back(std::round(u(gen) * 4) / 4, u(gen));
    for (int i = 0; i < 3; ++i) b.emplace_back(std::round(u(gen) * 4) / 4, u(gen));
    const auto sa = StepSchedule::from_offers(a);
    const auto sb = StepSchedule::from_offers(b);
    const auto agg = aggregate(sa, sb);
    std::vector<double> grid{-1.0, 10.0};
    for (const auto* s : {&sa, &sb}) {
      for (const auto& bp : s->breakpoints()) {
        grid.push_back(bp.price);
        grid.push_back(bp.price + 0.125);
        grid.push_back(bp.price - 0.125);
      }
    }
    for (double p : grid) EXPECT_NEAR(agg.evaluate(p), sa.evaluate(p) + sb.evaluate(p), 1e-12);
  }
}

TEST(MeritOrder, LowCapacityCostsNothing) { EXPECT_EQ(merit_order_cost({9, 0, 0}, kLadder, 5.0), 0.0); }

TEST(MeritOrder, FillsHighAfterLow) { EXPECT_DOUBLE_EQ(merit_order_cost({5, 0.5, 0}, kLadder, 5.25), 0.25); }

TEST(MeritOrder, AboveCapacityIsInfeasible) {
  EXPECT_THROW(merit_order_cost({5, 0.5, 0}, kLadder, 6.0), InfeasibleQuantityError);
}

TEST(MeritOrder, ConvexWithKinksAtCapacityBoundaries) {
  const TechnologyPortfolio port{3.0, 2.0, 4.0};
  const double h = 1e-3;
  auto slope = [&](double q) { return (merit_order_cost(port, kLadder, q + h) - merit_order_cost(port, kLadder, q)) / h; };
  EXPECT_NEAR(slope(1.0), 0.0, 1e-9);
  EXPECT_NEAR(slope(4.0), 1.0, 1e-9);
  EXPECT_NEAR(slope(7.0), 2.0, 1e-9);
  double prev = -1.0;
  for (double q = 0.0; q + h <= port.total(); q += 0.01) {
    const double s = slope(q);
    EXPECT_GE(s, prev - 1e-9);
    prev = s;
  }
}

TEST(ClearMarket, MarginalFirmIsRationed) {
  const std::vector<FirmSchedule> s{{"A", sched({{1.0, 3}})}, {"B", sched({{1.5, 2}})}};
  const auto r = clear_market(s, 4.0, 2.0, 10.0);
  EXPECT_EQ(r.price, 1.5);
  EXPECT_NEAR(r.per_firm_quantity.at("A"), 3.0, 1e-12);
  EXPECT_NEAR(r.per_firm_quantity.at("B"), 1.0, 1e-12);
  EXPECT_EQ(r.marginal_firm_set, std::vector<std::string>{"B"});
}

TEST(ClearMarket, StrategicFirmsServedBeforeFringe) {
  const std::vector<FirmSchedule> s{{"A", sched({{1.0, 3}})}, {"B", sched({{1.5, 2}})}};
  const auto r = clear_market(s, 6.0, 2.0, 10.0);
  EXPECT_EQ(r.price, 2.0);
  EXPECT_NEAR(r.per_firm_quantity.at("A"), 3.0, 1e-12);
  EXPECT_NEAR(r.per_firm_quantity.at("B"), 2.0, 1e-12);
  EXPECT_NEAR(r.fringe_quantity, 1.0, 1e-12);
}

TEST(ClearMarket, SingleSupplierCrossing) {
  const std::vector<FirmSchedule> s{{"A", sched({{1.0, 3}})}, {"B", StepSchedule()}};
  const auto r = clear_market(s, 3.0, 2.0, 10.0);
  EXPECT_EQ(r.price, 1.0);
  EXPECT_NEAR(r.per_firm_quantity.at("A"), 3.0, 1e-12);
}

TEST(ClearMarket, DemandAboveCapacityFails) {
  const std::vector<FirmSchedule> s{{"A", sched({{1.0, 3}})}};
  EXPECT_THROW(clear_market(s, 20.0, 2.0, 10.0), MarketFailureError);
}

TEST(ClearMarket, ProRataAmongEqualPriceBids) {
  const std::vector<FirmSchedule> s{{"A", sched({{1.0, 3}})}, {"B", sched({{1.0, 1}})}};
  const auto r = clear_market(s, 2.0, 2.0, 10.0);
  EXPECT_NEAR(r.per_firm_quantity.at("A"), 1.5, 1e-12);
  EXPECT_NEAR(r.per_firm_quantity.at("B"), 0.5, 1e-12);
}

TEST(ClearMarket, RandomInstancesBalanceAndRespectCap) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<FirmSchedule> s;
    double cap = 0.0;
    for (int f = 0; f < 3; ++f) {
      std::vector<std::pair<double, double>> offers;
      for (int i = 0; i < 3; ++i) offers.emplace_back(std::round(u(gen) * 20) / 10, u(gen) * 5);
      s.push_back({"F" + std::to_string(f), StepSchedule::from_offers(offers)});
      cap += s.back().schedule.max_quantity();
    }
    const double fringe_cap = 3.0;
    const double demand = u(gen) * (cap + fringe_cap);
    const auto r = clear_market(s, demand, 2.5, fringe_cap);
    EXPECT_NEAR(r.total_allocated(), demand, 1e-9 * std::max(1.0, demand));
    EXPECT_LE(r.price, 2.5);

    // Adding quantity at a breakpoint never raises the price.
    auto shifted = s;
    auto pts = shifted[0].schedule.breakpoints();
    if (!pts.empty()) {
      const std::size_t k = static_cast<std::size_t>(u(gen) * pts.size()) % pts.size();
      for (std::size_t i = k; i < pts.size(); ++i) pts[i].cumulative += 1.0;
      shifted[0].schedule = StepSchedule(pts);
      EXPECT_LE(clear_market(shifted, demand, 2.5, fringe_cap).price, r.price);
    }
  }
}

TEST(ResidualDemand, RivalSupplyIsSubtracted) {
  const std::vector<FirmSchedule> s{{"1", sched({{0.0, 9}})}, {"2", sched({{1.25, 1}})}};
  EXPECT_DOUBLE_EQ(residual_demand("1", s, 6.0, 1.25, 2.0, 9.0), 5.0);
}

TEST(ResidualDemand, ZeroAboveFringeCost) {
  const std::vector<FirmSchedule> s{{"2", sched({{1.0, 1}})}};
  EXPECT_EQ(residual_demand("1", s, 6.0, 2.5, 2.0, 9.0), 0.0);
}

TEST(ResidualDemand, CappedByOwnCapacityAtFringeCost) {
  const std::vector<FirmSchedule> s{{"2", sched({{1.0, 4}})}};
  EXPECT_DOUBLE_EQ(residual_demand("1", s, 6.0, 2.0, 2.0, 9.0), 2.0);
  EXPECT_DOUBLE_EQ(residual_demand("1", s, 6.0, 2.0, 2.0, 1.5), 1.5);
}

TEST(UnitBid, QuantityAboveCapacityRejected) {
  UnitBid b;
  b.unit_id = "u";
  b.firm_id = "f";
  b.capacity = 1.0;
  b.hourly_quantities[3] = 2.0;
  EXPECT_THROW(b.validate(), ValidationError);
}

TEST(CostLadder, OrderingEnforced) {
  EXPECT_THROW((CostLadder{0, 2, 2}.validate()), ValidationError);
  EXPECT_THROW((CostLadder{-1, 1, 2}.validate()), ValidationError);
  EXPECT_NO_THROW(kLadder.validate());
}
