#include <gtest/gtest.h>

#include <random>

#include "sfelab/counterfactual.hpp"
#include "sfelab/error.hpp"

using namespace sfelab;
using namespace sfelab::cf;
using market::Technology;
using market::UnitBid;

namespace {

UnitBid unit(std::string id, std::string firm, Technology t, double price, double cap, double q) {
  UnitBid b;
  b.unit_id = std::move(id);
  b.firm_id = std::move(firm);
  b.technology = t;
  b.price_bid = price;
  b.capacity = cap;
  b.hourly_quantities.fill(q);
  b.bids_in_hour.set();
  return b;
}

TransferSpec spec(double kappa, SourceSet s = SourceSet::non_hydro_firms) {
  TransferSpec t;
  t.kappa = kappa;
  t.source = s;
  t.leader = "L";
  return t;
}

std::vector<UnitBid> market_bids() {
  return {unit("LH", "L", Technology::hydro, 0.0, 20.0, 20.0), unit("HH", "H", Technology::hydro, 10.0, 15.0, 15.0),
          unit("HT", "H", Technology::thermal, 40.0, 20.0, 20.0), unit("T1", "T", Technology::thermal, 30.0, 15.0, 10.0),
          unit("T2", "T", Technology::thermal, 55.0, 15.0, 15.0), unit("F1", "F", Technology::fringe, 80.0, 10.0, 6.0)};
}

sim::SimulationConfig small_sim() {
  sim::SimulationConfig c;
  c.leader = "L";
  c.bids = market_bids();
  c.fringe_cost = 120.0;
  c.demand.kind = sim::DemandSpec::Kind::stochastic;
  c.demand.mean.fill(50.0);
  c.demand.sd = 5.0;
  c.hydro = {2000.0, 0.0, 4000.0};
  c.inflow.intercept = 600.0;
  c.inflow.lag_coefficients = {0.2};
  c.inflow.residual_sd = 300.0;
  c.value = hydro::ValueSpline({0.0, 1000.0, 2000.0, 3000.0, 4000.0}, {0.0, 50000.0, 85000.0, 105000.0, 112000.0});
  c.weeks = 20;
  c.days_per_period = 7;
  c.supply_steps = 6;
  c.demand_steps = 6;
  c.value_steps = 6;
  c.seed = 4;
  return c;
}

}  // namespace

TEST(Transfer, UnusedCapacityAbsorbsTheCut) {
  const std::vector<UnitBid> bids{unit("LH", "L", Technology::hydro, 0, 10, 10), unit("U", "T", Technology::thermal, 5, 100, 60)};
  const auto r = transfer_capacity(bids, spec(0.3));
  EXPECT_DOUBLE_EQ(r.bids[1].capacity, 70.0);
  EXPECT_DOUBLE_EQ(r.bids[1].hourly_quantities[0], 60.0);
  EXPECT_DOUBLE_EQ(r.leader_increment, 30.0);
}

TEST(Transfer, BidCutToNewCapacity) {
  const std::vector<UnitBid> bids{unit("LH", "L", Technology::hydro, 0, 10, 10), unit("U", "T", Technology::thermal, 5, 100, 80)};
  const auto r = transfer_capacity(bids, spec(0.3));
  EXPECT_DOUBLE_EQ(r.bids[1].capacity, 70.0);
  EXPECT_DOUBLE_EQ(r.bids[1].hourly_quantities[0], 70.0);
}

TEST(Transfer, ZeroKappaIsIdentity) {
  const auto bids = market_bids();
  const auto r = transfer_capacity(bids, spec(0.0));
  EXPECT_EQ(r.leader_increment, 0.0);
  for (std::size_t i = 0; i < bids.size(); ++i) {
    EXPECT_EQ(r.bids[i].capacity, bids[i].capacity);
    EXPECT_EQ(r.bids[i].hourly_quantities, bids[i].hourly_quantities);
  }
}

TEST(Transfer, SourceSetsDiffer) {
  const auto bids = market_bids();
  // Non-hydro firms: T and F. All rivals adds H's thermal unit.
  EXPECT_NEAR(transfer_capacity(bids, spec(0.5)).leader_increment, 0.5 * (15 + 15 + 10), 1e-12);
  EXPECT_NEAR(transfer_capacity(bids, spec(0.5, SourceSet::all_rivals)).leader_increment, 0.5 * (20 + 15 + 15 + 10), 1e-12);
}

TEST(Transfer, InactiveHoursExcluded) {
  auto bids = market_bids();
  bids[3].bids_in_hour.reset(7);
  const auto r = transfer_capacity(bids, spec(0.5));
  EXPECT_NEAR(r.hourly_increment[7], r.hourly_increment[6] - 7.5, 1e-12);
}

TEST(Transfer, ConservesCapacityAndFeasibility) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<UnitBid> bids{unit("LH", "L", Technology::hydro, 0, 10, 10)};
    for (int k = 0; k < 8; ++k) {
      const double cap = 1 + 50 * u(gen);
      const auto tech = k % 3 == 0 ? Technology::hydro : (k % 3 == 1 ? Technology::thermal : Technology::fringe);
      bids.push_back(unit("u" + std::to_string(k), "F" + std::to_string(k % 4), tech, 10 * u(gen), cap, cap * u(gen)));
    }
    const double before = industry_thermal_capacity(bids);
    for (auto src : {SourceSet::non_hydro_firms, SourceSet::all_rivals}) {
      for (auto mode : {CapacityMode::declared, CapacityMode::max_observed_bid}) {
        auto s = spec(u(gen), src);
        s.capacity_mode = mode;
        const auto r = transfer_capacity(bids, s);
        EXPECT_NEAR(industry_thermal_capacity(r.bids) + r.leader_increment, before, 1e-9 * before);
        for (const auto& b : r.bids) {
          for (double q : b.hourly_quantities) EXPECT_LE(q, b.capacity + 1e-12);
          EXPECT_GE(b.capacity, 0.0);
        }
      }
    }
  }
}

TEST(Transfer, RejectsBadSpecs) {
  const auto bids = market_bids();
  EXPECT_THROW(transfer_capacity(bids, spec(1.5)), ValidationError);
  auto s = spec(0.1);
  s.leader = "nobody";
  EXPECT_THROW(transfer_capacity(bids, s), ValidationError);
  EXPECT_EQ(source_set_from_string("all"), SourceSet::all_rivals);
  EXPECT_EQ(source_set_from_string("nonhydro"), SourceSet::non_hydro_firms);
  EXPECT_THROW(source_set_from_string("some"), ValidationError);
}

TEST(AnalyticCounterfactual, ScarcityPriceDrops) {
  const market::CostLadder ladder{0, 1, 2};
  const std::vector<double> kappas{0.0, 0.125};
  const auto g = run_analytic_counterfactual({5, 0, 0}, {0, 4, 0}, ladder, 6.0, kappas);
  EXPECT_EQ(g.cell(0, 1).mean_abs_diff, 0.0);
  EXPECT_NEAR(g.cell(1, 1).mean_abs_diff, -0.1, 1e-9);
  EXPECT_NEAR(g.kappa_profile[1], -0.1, 1e-9);
}

TEST(AnalyticCounterfactual, AbundancePriceRises) {
  const market::CostLadder ladder{0, 1, 2};
  const std::vector<double> kappas{0.0, 0.125};
  const auto g = run_analytic_counterfactual({9, 0, 0}, {0, 4, 0}, ladder, 6.0, kappas);
  EXPECT_NEAR(g.cell(1, 1).mean_abs_diff, 19.0 / 14.0 - 1.25, 1e-10);
  EXPECT_NEAR(g.cell(1, 1).mean_rel_diff, (19.0 / 14.0 - 1.25) / 1.25, 1e-10);
}

TEST(AnalyticCounterfactual, OutOfRegionFlagged) {
  const market::CostLadder ladder{0, 1, 2};
  const std::vector<double> kappas{0.0, 1.0};
  const auto g = run_analytic_counterfactual({5, 0, 0}, {0, 4, 0}, ladder, 6.0, kappas);
  EXPECT_EQ(g.cell(1, 1).failures, 1u);
}

TEST(SimulatedCounterfactual, ZeroKappaRowIsZero) {
  const auto c = small_sim();
  const std::vector<double> kappas{0.0, 0.5};
  const auto g = run_counterfactual(c, kappas, SourceSet::non_hydro_firms, CapacityMode::declared);
  std::size_t total = 0;
  for (int d = 1; d <= 10; ++d) {
    EXPECT_EQ(g.cell(0, d).mean_abs_diff, 0.0);
    EXPECT_EQ(g.cell(0, d).mean_rel_diff, 0.0);
    total += g.cell(0, d).count;
  }
  EXPECT_EQ(total, static_cast<std::size_t>(c.weeks) * 24);
  EXPECT_EQ(g.kappa_profile[0], 0.0);
  EXPECT_EQ(g.decile_edges.size(), 11u);
  for (double cap : g.industry_capacity) EXPECT_NEAR(cap, g.industry_capacity[0], 1e-9 * g.industry_capacity[0]);
}

TEST(SimulatedCounterfactual, ThreadsDoNotChangeTheGrid) {
  const auto c = small_sim();
  const std::vector<double> kappas{0.0, 0.2, 0.4, 0.6};
  const auto one = run_counterfactual(c, kappas, SourceSet::all_rivals, CapacityMode::declared, 1);
  const auto three = run_counterfactual(c, kappas, SourceSet::all_rivals, CapacityMode::declared, 3);
  EXPECT_EQ(grid_to_csv(one), grid_to_csv(three));
  EXPECT_EQ(grid_to_svg(one), grid_to_svg(three));
}

TEST(SimulatedCounterfactual, CsvAndSvgLayout) {
  const auto c = small_sim();
  const std::vector<double> kappas{0.0, 0.3};
  const auto g = run_counterfactual(c, kappas, SourceSet::non_hydro_firms, CapacityMode::declared);
  const auto csv = grid_to_csv(g);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "kappa,decile,mean_abs_diff,mean_rel_diff,count,failures");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 10);
  const auto svg = grid_to_svg(g);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Concentration, Examples) {
  using hydro::ForecastClass;
  const std::vector<FirmPosition> one{{"A", 10.0, ForecastClass::adverse}};
  EXPECT_DOUBLE_EQ(concentration_metrics(one).hhi, 1.0);
  const std::vector<FirmPosition> two{{"A", 60.0, ForecastClass::adverse}, {"B", 40.0, ForecastClass::favorable}};
  const auto s = concentration_metrics(two);
  EXPECT_NEAR(s.delta, 0.20, 1e-12);
  EXPECT_NEAR(s.hhi, 0.52, 1e-12);
  EXPECT_EQ(s.net_adverse, (std::vector<int>{1, -1}));
  const std::vector<FirmPosition> calm{{"A", 60.0, ForecastClass::moderate}, {"B", 40.0, ForecastClass::moderate}};
  EXPECT_EQ(concentration_metrics(calm).delta, 0.0);
  const std::vector<FirmPosition> empty{{"A", 0.0, ForecastClass::moderate}};
  EXPECT_THROW(concentration_metrics(empty), ValidationError);
}

TEST(Concentration, SharesSumToOne) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<FirmPosition> firms;
    for (int k = 0; k < 6; ++k) firms.push_back({"F" + std::to_string(k), u(gen), hydro::ForecastClass::moderate});
    const auto s = concentration_metrics(firms);
    double sum = 0.0, hhi = 0.0;
    for (double x : s.shares) {
      sum += x;
      hhi += x * x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_NEAR(s.hhi, hhi, 1e-12);
    EXPECT_GT(s.hhi, 0.0);
    EXPECT_LE(s.hhi, 1.0);
  }
}
