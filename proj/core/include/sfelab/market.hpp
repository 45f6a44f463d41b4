#pragma once

// Portfolios, bids, step schedules and uniform-price clearing.

#include <array>
#include <bitset>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sfelab::market {

inline constexpr int kHoursPerDay = 24;

/// Constant marginal costs of the low-cost, high-cost and fringe technologies.
struct CostLadder {
  double c_low = 0.0;
  double c_high = 0.0;
  double c_fringe = 0.0;

  /// Throws ValidationError unless 0 <= c_low < c_high < c_fringe < inf.
  void validate() const;
};

struct TechnologyPortfolio {
  double k_low = 0.0;
  double k_high = 0.0;
  double k_fringe = 0.0;

  double total() const { return k_low + k_high + k_fringe; }
  void validate() const;
};

struct Breakpoint {
  double price;
  double cumulative;
};

/// Right-continuous, non-decreasing price -> cumulative quantity step function.
///
/// The quantity at breakpoint i becomes available at exactly breakpoints[i].price,
/// matching the 1[b <= p] convention of a price bid b.
class StepSchedule {
 public:
  StepSchedule() = default;

  /// Takes breakpoints as (price, cumulative) pairs. Prices must be strictly
  /// increasing and cumulative quantities non-decreasing and non-negative.
  explicit StepSchedule(std::vector<Breakpoint> breakpoints);

  /// Builds a schedule from independent (price, quantity) offers. Offers at the
  /// same price are merged; zero quantities are dropped.
  static StepSchedule from_offers(std::vector<std::pair<double, double>> offers);

  double evaluate(double price) const;
  /// Quantity offered strictly below `price` (left limit).
  double evaluate_below(double price) const;
  /// Quantity offered at exactly `price` (the jump at that price).
  double step_at(double price) const;

  double max_quantity() const { return points_.empty() ? 0.0 : points_.back().cumulative; }
  bool empty() const { return points_.empty(); }
  const std::vector<Breakpoint>& breakpoints() const { return points_; }

 private:
  std::vector<Breakpoint> points_;
};

double evaluate_schedule(const StepSchedule& s, double price);

/// Pointwise sum of two schedules.
StepSchedule aggregate(const StepSchedule& a, const StepSchedule& b);
StepSchedule aggregate(std::span<const StepSchedule> schedules);

enum class Technology { hydro, thermal, fringe };

std::string to_string(Technology t);
Technology technology_from_string(const std::string& s);

/// One generating unit's daily offer: a single price bid and 24 hourly quantities.
struct UnitBid {
  std::string unit_id;
  std::string firm_id;
  Technology technology = Technology::thermal;
  double price_bid = 0.0;
  std::array<double, kHoursPerDay> hourly_quantities{};
  /// Hours in which the unit submitted a quantity. Units absent from an hour
  /// do not participate in that hour's market.
  std::bitset<kHoursPerDay> bids_in_hour;
  double capacity = 0.0;

  bool active(int hour) const { return bids_in_hour.test(static_cast<std::size_t>(hour)); }
  double quantity(int hour) const {
    return active(hour) ? hourly_quantities[static_cast<std::size_t>(hour)] : 0.0;
  }
  void validate() const;
};

/// A firm's schedule in one hourly market, built from its units' bids.
StepSchedule firm_schedule(std::span<const UnitBid> bids, const std::string& firm_id, int hour);

struct FirmSchedule {
  std::string firm_id;
  StepSchedule schedule;
};

std::vector<FirmSchedule> hourly_schedules(std::span<const UnitBid> bids, int hour);

struct ClearingResult {
  double price = 0.0;
  std::map<std::string, double> per_firm_quantity;
  double fringe_quantity = 0.0;
  /// Firms holding a step exactly at the clearing price.
  std::vector<std::string> marginal_firm_set;

  double total_allocated() const;
};

/// Minimal cost of producing q by filling low, then high, then fringe capacity.
double merit_order_cost(const TechnologyPortfolio& port, const CostLadder& ladder, double q);

/// Uniform-price clearing with strategic priority over the fringe at c_fringe.
///
/// Price is min(fringe_cost, lowest p with aggregate strategic supply >= demand).
/// Bids below the price are dispatched in full; bids sitting exactly at the price
/// are rationed pro-rata by their step size.
ClearingResult clear_market(std::span<const FirmSchedule> schedules, double demand,
                            double fringe_cost, double fringe_capacity);

/// Residual demand D - S_{-i}(p) with the fringe branches at and above c_fringe.
double residual_demand(const std::string& firm_id, std::span<const FirmSchedule> schedules,
                       double demand, double price, double fringe_cost,
                       double total_capacity_of_firm);

}  // namespace sfelab::market
