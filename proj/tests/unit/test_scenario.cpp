#include <gtest/gtest.h>

#include <filesystem>

#include "sfelab/bid_io.hpp"
#include "sfelab/csv.hpp"
#include "sfelab/error.hpp"
#include "sfelab/scenario.hpp"

using namespace sfelab;
using namespace sfelab::scenario;

namespace {

const std::filesystem::path kScenarios = SFELAB_SCENARIO_DIR;

std::string error_of(const std::string& json) {
  try {
    parse_scenario(json, kScenarios);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Scenario, AbundanceLoads) {
  const auto s = load_scenario(kScenarios / "abundance.json");
  ASSERT_TRUE(s.ladder && s.analytic);
  EXPECT_EQ(s.ladder->c_high, 1.0);
  EXPECT_EQ(s.analytic->k1.k_low, 9.0);
  EXPECT_EQ(s.analytic->k2.k_high, 4.0);
  EXPECT_EQ(s.analytic->demand, 6.0);
  EXPECT_EQ(s.seed, 1u);
}

TEST(Scenario, BundledScenariosLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    if (entry.path().extension() == ".json") EXPECT_NO_THROW(load_scenario(entry.path())) << entry.path();
  }
  const auto sim = load_scenario(kScenarios / "sim_scarcity.json");
  ASSERT_TRUE(sim.simulation);
  EXPECT_EQ(sim.simulation->config.leader, "L");
  EXPECT_EQ(sim.simulation->config.seed, sim.seed);
}

TEST(Scenario, LadderOrderNamesTheField) {
  const auto msg = error_of(R"({"ladder": {"c_low": 0, "c_high": 3, "c_fringe": 2}, "k1": [1,0,0], "k2": [0,1,0], "demand": 1})");
  EXPECT_NE(msg.find("ladder.c_high"), std::string::npos) << msg;
}

TEST(Scenario, EmptyDemandRejected) {
  const auto msg = error_of(R"({"ladder": {"c_low": 0, "c_high": 1, "c_fringe": 2}, "k1": [9,0,0], "k2": [0,4,0]})");
  EXPECT_NE(msg.find("demand"), std::string::npos) << msg;
  const auto sim = error_of(R"({"simulation": {"leader": "L", "bids_csv": "scarcity_bids.csv", "demand": {}}})");
  EXPECT_NE(sim.find("demand"), std::string::npos) << sim;
}

TEST(Scenario, EveryViolationListed) {
  const auto msg = error_of(R"({"ladder": {"c_low": -1, "c_high": 1, "c_fringe": 2}, "k1": [9,0], "k2": [0,4,0], "demand": "x"})");
  EXPECT_NE(msg.find("ladder.c_low"), std::string::npos) << msg;
  EXPECT_NE(msg.find("k1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("demand"), std::string::npos) << msg;
}

TEST(Scenario, MalformedJsonAndMissingFile) {
  EXPECT_THROW(parse_scenario("{not json", kScenarios), ValidationError);
  EXPECT_THROW(load_scenario(kScenarios / "does_not_exist.json"), IoError);
}

TEST(Scenario, UnknownLeaderRejected) {
  const auto msg = error_of(R"({"simulation": {"leader": "nobody", "bids_csv": "scarcity_bids.csv", "demand": {"constant": 100},
    "fringe": {"cost": 150, "capacity": 1000}, "hydro": {"stock": 10, "lower": 0, "upper": 20},
    "inflow": {"model": {"intercept": 1, "coefficients": [0.1], "residual_sd": 1}}}})");
  EXPECT_NE(msg.find("leader"), std::string::npos) << msg;
}

TEST(Scenario, BidCsvRoundTrip) {
  const auto bids = io::read_bids(kScenarios / "scarcity_bids.csv");
  const auto again = io::bids_from_table(io::parse_csv(io::bids_to_csv(bids)), "roundtrip");
  ASSERT_EQ(bids.size(), again.size());
  for (std::size_t i = 0; i < bids.size(); ++i) {
    EXPECT_EQ(bids[i].unit_id, again[i].unit_id);
    EXPECT_EQ(bids[i].price_bid, again[i].price_bid);
    EXPECT_EQ(bids[i].hourly_quantities, again[i].hourly_quantities);
    EXPECT_EQ(bids[i].bids_in_hour, again[i].bids_in_hour);
  }
}

TEST(Scenario, SimulationCsvReparses) {
  auto s = load_scenario(kScenarios / "sim_scarcity.json");
  s.simulation->config.weeks = 2;
  const auto csv = sim::records_to_csv(sim::simulate_horizon(s.simulation->config));
  const auto table = io::parse_csv(csv);
  EXPECT_EQ(table.rows.size(), 48u);
}
