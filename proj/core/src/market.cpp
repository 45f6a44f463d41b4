#include "sfelab/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "sfelab/error.hpp"

namespace sfelab::market {

namespace {

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void CostLadder::validate() const {
  if (!finite_nonneg(c_low)) {
    throw ValidationError(fmt::format("ladder.c_low: must be finite and >= 0 (got {})", c_low));
  }
  if (!std::isfinite(c_high) || !(c_high > c_low)) {
    throw ValidationError(fmt::format("ladder.c_high: must exceed c_low (got {})", c_high));
  }
  if (!std::isfinite(c_fringe) || !(c_fringe > c_high)) {
    throw ValidationError(fmt::format("ladder.c_fringe: must exceed c_high (got {})", c_fringe));
  }
}

void TechnologyPortfolio::validate() const {
  if (!finite_nonneg(k_low) || !finite_nonneg(k_high) || !finite_nonneg(k_fringe)) {
    throw ValidationError(fmt::format("portfolio: capacities must be finite and >= 0 ({}, {}, {})",
                                      k_low, k_high, k_fringe));
  }
}

StepSchedule::StepSchedule(std::vector<Breakpoint> breakpoints) : points_(std::move(breakpoints)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& bp = points_[i];
    if (!std::isfinite(bp.price) || !finite_nonneg(bp.cumulative)) {
      throw ValidationError("step schedule: breakpoints must be finite with quantity >= 0");
    }
    if (i > 0) {
      if (!(bp.price > points_[i - 1].price)) {
        throw ValidationError("step schedule: prices must be strictly increasing");
      }
      if (bp.cumulative < points_[i - 1].cumulative) {
        throw ValidationError("step schedule: cumulative quantities must be non-decreasing");
      }
    }
  }
}

StepSchedule StepSchedule::from_offers(std::vector<std::pair<double, double>> offers) {
  std::erase_if(offers, [](const auto& o) { return o.second == 0.0; });
  for (const auto& [price, qty] : offers) {
    if (!std::isfinite(price) || !finite_nonneg(qty)) {
      throw ValidationError("offer: price must be finite and quantity >= 0");
    }
  }
  std::stable_sort(offers.begin(), offers.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Breakpoint> pts;
  double cum = 0.0;
  for (const auto& [price, qty] : offers) {
    cum += qty;
    if (!pts.empty() && pts.back().price == price) {
      pts.back().cumulative = cum;
    } else {
      pts.push_back({price, cum});
    }
  }
  return StepSchedule(std::move(pts));
}

double StepSchedule::evaluate(double price) const {
  // Largest breakpoint with bp.price <= price.
  auto it = std::upper_bound(points_.begin(), points_.end(), price,
                             [](double p, const Breakpoint& bp) { return p < bp.price; });
  if (it == points_.begin()) return 0.0;
  return std::prev(it)->cumulative;
}

double StepSchedule::evaluate_below(double price) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), price,
                             [](const Breakpoint& bp, double p) { return bp.price < p; });
  if (it == points_.begin()) return 0.0;
  return std::prev(it)->cumulative;
}

double StepSchedule::step_at(double price) const { return evaluate(price) - evaluate_below(price); }

double evaluate_schedule(const StepSchedule& s, double price) { return s.evaluate(price); }

StepSchedule aggregate(const StepSchedule& a, const StepSchedule& b) {
  const StepSchedule both[] = {a, b};
  return aggregate(std::span<const StepSchedule>(both));
}

StepSchedule aggregate(std::span<const StepSchedule> schedules) {
  std::set<double> prices;
  for (const auto& s : schedules) {
    for (const auto& bp : s.breakpoints()) prices.insert(bp.price);
  }
  std::vector<Breakpoint> pts;
  pts.reserve(prices.size());
  for (double p : prices) {
    double q = 0.0;
    for (const auto& s : schedules) q += s.evaluate(p);
    pts.push_back({p, q});
  }
  return StepSchedule(std::move(pts));
}

std::string to_string(Technology t) {
  switch (t) {
    case Technology::hydro:
      return "hydro";
    case Technology::thermal:
      return "thermal";
    case Technology::fringe:
      return "fringe";
  }
  return "unknown";
}

Technology technology_from_string(const std::string& s) {
  if (s == "hydro") return Technology::hydro;
  if (s == "thermal") return Technology::thermal;
  if (s == "fringe") return Technology::fringe;
  throw ValidationError(fmt::format("technology: unknown value '{}'", s));
}

void UnitBid::validate() const {
  if (unit_id.empty() || firm_id.empty()) {
    throw ValidationError("bid: unit_id and firm_id must be non-empty");
  }
  if (!std::isfinite(price_bid)) {
    throw ValidationError(fmt::format("bid {}: price_bid must be finite", unit_id));
  }
  if (!finite_nonneg(capacity)) {
    throw ValidationError(fmt::format("bid {}: capacity must be finite and >= 0", unit_id));
  }
  for (int h = 0; h < kHoursPerDay; ++h) {
    const double q = hourly_quantities[static_cast<std::size_t>(h)];
    if (!finite_nonneg(q) || q > capacity) {
      throw ValidationError(
          fmt::format("bid {} hour {}: quantity {} outside [0, capacity {}]", unit_id, h, q, capacity));
    }
  }
}

StepSchedule firm_schedule(std::span<const UnitBid> bids, const std::string& firm_id, int hour) {
  std::vector<std::pair<double, double>> offers;
  for (const auto& b : bids) {
    if (b.firm_id == firm_id && b.active(hour)) offers.emplace_back(b.price_bid, b.quantity(hour));
  }
  return StepSchedule::from_offers(std::move(offers));
}

std::vector<FirmSchedule> hourly_schedules(std::span<const UnitBid> bids, int hour) {
  std::vector<std::string> firms;
  for (const auto& b : bids) {
    if (std::find(firms.begin(), firms.end(), b.firm_id) == firms.end()) firms.push_back(b.firm_id);
  }
  std::vector<FirmSchedule> out;
  out.reserve(firms.size());
  for (const auto& f : firms) out.push_back({f, firm_schedule(bids, f, hour)});
  return out;
}

double ClearingResult::total_allocated() const {
  double total = fringe_quantity;
  for (const auto& [_, q] : per_firm_quantity) total += q;
  return total;
}

double merit_order_cost(const TechnologyPortfolio& port, const CostLadder& ladder, double q) {
  port.validate();
  if (!std::isfinite(q) || q < 0.0) {
    throw ValidationError(fmt::format("merit_order_cost: quantity must be >= 0 (got {})", q));
  }
  if (q > port.total()) throw InfeasibleQuantityError(q, port.total());
  const double low = std::min(q, port.k_low);
  const double high = std::min(q - low, port.k_high);
  const double fringe = q - low - high;
  return low * ladder.c_low + high * ladder.c_high + fringe * ladder.c_fringe;
}

ClearingResult clear_market(std::span<const FirmSchedule> schedules, double demand,
                            double fringe_cost, double fringe_capacity) {
  if (!std::isfinite(demand) || demand < 0.0) {
    throw ValidationError(fmt::format("clear_market: demand must be >= 0 (got {})", demand));
  }
  if (!std::isfinite(fringe_cost) || !finite_nonneg(fringe_capacity)) {
    throw ValidationError("clear_market: fringe cost and capacity must be finite");
  }

  ClearingResult result;
  for (const auto& fs : schedules) result.per_firm_quantity[fs.firm_id] = 0.0;
  if (demand == 0.0) return result;

  double strategic_capacity = 0.0;
  std::set<double> prices;
  for (const auto& fs : schedules) {
    strategic_capacity += fs.schedule.max_quantity();
    for (const auto& bp : fs.schedule.breakpoints()) prices.insert(bp.price);
  }
  if (demand > strategic_capacity + fringe_capacity) {
    throw MarketFailureError(demand, strategic_capacity + fringe_capacity);
  }

  auto supply_at = [&](double p) {
    double s = 0.0;
    for (const auto& fs : schedules) s += fs.schedule.evaluate(p);
    return s;
  };

  // Relative slack so that a supply of 4.999999999999999 still covers a demand of 5.
  const double eps = 1e-12 * std::max(1.0, demand);
  double price = fringe_cost;
  for (double p : prices) {
    if (p > fringe_cost) break;
    if (supply_at(p) >= demand - eps) {
      price = p;
      break;
    }
  }
  result.price = price;

  double below = 0.0;
  double at = 0.0;
  for (const auto& fs : schedules) {
    below += fs.schedule.evaluate_below(price);
    at += fs.schedule.step_at(price);
    if (fs.schedule.step_at(price) > 0.0) result.marginal_firm_set.push_back(fs.firm_id);
  }

  const double remaining = demand - below;
  if (below + at >= demand - eps) {
    // Strategic supply covers demand; ration the marginal steps pro-rata.
    const double share = at > 0.0 ? std::clamp(remaining / at, 0.0, 1.0) : 0.0;
    for (const auto& fs : schedules) {
      result.per_firm_quantity[fs.firm_id] =
          fs.schedule.evaluate_below(price) + fs.schedule.step_at(price) * share;
    }
  } else {
    // Fringe sets the price; strategic firms are served first.
    for (const auto& fs : schedules) result.per_firm_quantity[fs.firm_id] = fs.schedule.evaluate(price);
    result.fringe_quantity = demand - below - at;
  }
  return result;
}

double residual_demand(const std::string& firm_id, std::span<const FirmSchedule> schedules,
                       double demand, double price, double fringe_cost,
                       double total_capacity_of_firm) {
  if (price > fringe_cost) return 0.0;
  double rivals = 0.0;
  for (const auto& fs : schedules) {
    if (fs.firm_id != firm_id) rivals += fs.schedule.evaluate(price);
  }
  double r = demand - rivals;
  if (price == fringe_cost) r = std::min(r, total_capacity_of_firm);
  return std::max(r, 0.0);
}

}  // namespace sfelab::market
