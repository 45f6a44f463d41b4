#pragma once

// Rolling multi-week simulation of the leader's best response.
//
// Each week is represented by one day of 24 hourly markets that repeats
// days_per_period times; water moves once per week by the balance
// stock' = stock - days * daily_release + weekly_inflow (spill above the cap).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfelab/best_response.hpp"
#include "sfelab/inflow.hpp"
#include "sfelab/market.hpp"
#include "sfelab/value_spline.hpp"

namespace sfelab::sim {

using HourArray = std::array<double, market::kHoursPerDay>;

struct DemandSpec {
  enum class Kind { constant, hourly, stochastic };
  Kind kind = Kind::constant;
  /// Mean demand per hour (all equal for the constant kind).
  HourArray mean{};
  /// Standard deviation of the hourly noise for the stochastic kind.
  double sd = 0.0;

  void validate() const;
};

struct SimulationConfig {
  std::vector<market::UnitBid> bids;
  std::string leader;
  double fringe_cost = 0.0;
  DemandSpec demand;
  double thermal_cost = 0.0;
  double hydro_cost = 0.0;
  hydro::HydroState hydro;
  hydro::InflowModel inflow;
  /// Most recent observed inflows, oldest first; seeds forecasts and draws.
  std::vector<double> inflow_history;
  std::optional<hydro::ValueSpline> value;
  int supply_steps = 10;  // G
  int demand_steps = 10;  // Z
  int value_steps = 10;   // M
  int weeks = 52;
  int days_per_period = 7;
  dispatch::ScarcityCharge scarcity;
  std::vector<double> contracts;  // 24 values or empty
  /// Extra leader thermal capacity per hour (filled by capacity transfers).
  HourArray extra_thermal{};
  std::uint64_t seed = 0;

  void validate() const;
  double leader_hydro_capacity() const;
  double leader_thermal_capacity(int hour) const;
};

/// Exogenous draws shared by every run with the same seed.
struct Realization {
  std::vector<double> inflows;          // one per week, clamped at zero
  std::vector<HourArray> demand;        // one row per week
};

Realization draw_realization(const SimulationConfig& cfg);

struct HourRecord {
  int week = 0;
  int hour = 0;
  double price = 0.0;
  double hydro = 0.0;
  double thermal = 0.0;
  /// Leader stock at the start of the week.
  double water_stock = 0.0;
  bool failed = false;
};

struct WeekFailure {
  int week = 0;
  std::string message;
};

struct HorizonResult {
  std::vector<HourRecord> records;
  std::vector<double> stock_path;  // weeks + 1 values
  std::vector<double> released;    // per week, days * daily release
  std::vector<double> spilled;     // per week
  std::vector<double> inflows;
  std::vector<WeekFailure> failures;
};

/// When `fail_fast` is set the first failing week throws; otherwise the week
/// is recorded as failed, releases no water and the run continues.
HorizonResult simulate_horizon(const SimulationConfig& cfg, const Realization& draws, bool fail_fast);
HorizonResult simulate_horizon(const SimulationConfig& cfg, bool fail_fast = true);

/// `week,hour,price,hydro,thermal,water_stock`
std::string records_to_csv(const HorizonResult& result);

struct FitStatistics {
  std::size_t matched = 0;
  double mean_simulated = 0.0;
  double mean_observed = 0.0;
  double mean_abs_error = 0.0;
  double rmse = 0.0;
  double correlation = 0.0;
};

/// Compares simulated prices with observed (week, hour, price) rows on the
/// cells both contain.
FitStatistics compare_prices(const HorizonResult& result,
                             const std::vector<std::array<double, 3>>& observed);

}  // namespace sfelab::sim
