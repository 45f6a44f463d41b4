#pragma once

// Leader best response against fixed rival bids on a discretised day.
//
// Each hour the leader picks a residual-demand step z (dispatch D_z, price p_z)
// and a hydro level x = g * hydro_capacity / G, g = 0..G; thermal fills the
// rest, y = D_z - x in [0, K^T]. Daily hydro release is bounded by the water
// budget and valued by a continuation function that is piecewise linear over
// M release segments. The day repeats days_per_period times, so the objective
// is days * spot profit + continuation. The problem is solved exactly by
// dynamic programming over hours with the number of hydro packets used as
// the state.

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfelab/density.hpp"
#include "sfelab/hydro.hpp"
#include "sfelab/market.hpp"
#include "sfelab/smoothing.hpp"
#include "sfelab/value_spline.hpp"

namespace sfelab::dispatch {

struct DemandStep {
  double price = 0.0;
  double quantity = 0.0;
};

/// Leader residual demand as steps: dispatching D_z clears at p_z. Prices
/// non-increasing, quantities strictly increasing.
struct ResidualSteps {
  std::vector<DemandStep> steps;

  void validate() const;
  /// Index of the first step with quantity >= q; throws InfeasibleQuantityError
  /// above the last step.
  std::size_t index_for(double q) const;
  double price_at(double q) const { return steps[index_for(q)].price; }
  double max_quantity() const { return steps.empty() ? 0.0 : steps.back().quantity; }
};

/// Residual demand faced by a leader with capacity `leader_capacity` given the
/// rivals' schedules, keeping at most `max_steps` steps (the zero-dispatch step
/// and the largest dispatch are always kept).
ResidualSteps build_residual_steps(std::span<const market::FirmSchedule> rivals, double demand,
                                   double fringe_cost, double leader_capacity, int max_steps);

struct ScarcityCharge {
  double price = std::numeric_limits<double>::infinity();
  double quantity = 0.0;
};

/// p*q - p*QC + 1[p > p_bar] (p_bar - p) q_bar at the price implied by q.
double gross_revenue(const ResidualSteps& rd, double dispatch, double contract_quantity,
                     const ScarcityCharge& scarcity);

struct DailyProblem {
  std::vector<ResidualSteps> hours;
  std::vector<double> contract_quantity;  // per hour; empty means none
  double thermal_cost = 0.0;
  double hydro_cost = 0.0;
  /// Continuation value of next period's stock; absent means zero.
  std::optional<hydro::ValueSpline> value;
  /// Distribution of the period inflow; when absent the inflow is
  /// `expected_inflow` with certainty.
  std::optional<hydro::TransitionDensity> inflow;
  double expected_inflow = 0.0;
  hydro::HydroState state;
  std::vector<double> thermal_capacity;  // per hour
  double hydro_capacity = 0.0;           // per hour
  /// Upper bound on the day's hydro release; the usable stock divided by
  /// days_per_period always applies.
  std::optional<double> water_budget;
  /// Days represented by this day; next stock = stock - days * release + inflow.
  int days_per_period = 1;
  int supply_steps = 10;  // G
  int value_steps = 10;   // M
  ScarcityCharge scarcity;

  void validate() const;
  double packet() const;
  int max_packets() const;
  double contract(std::size_t h) const {
    return contract_quantity.empty() ? 0.0 : contract_quantity[h];
  }
};

struct HourDispatch {
  std::size_t step = 0;
  int packets = 0;
  double price = 0.0;
  double dispatch = 0.0;
  double hydro = 0.0;
  double thermal = 0.0;
};

struct DailySolution {
  std::vector<HourDispatch> hours;
  double total_hydro = 0.0;
  double spot_profit = 0.0;  // one day
  double continuation = 0.0;
  double objective = 0.0;
  /// Stock after days_per_period days of release, before inflow.
  hydro::HydroState next_state;
};

/// Piecewise-linear expected continuation value over daily release.
struct ContinuationTable {
  std::vector<double> release;  // M+1 nodes from 0 to the maximal release
  std::vector<double> value;

  double operator()(double x) const;
};

ContinuationTable continuation_table(const DailyProblem& prob);

/// Profit of one hour for (step, packets); -inf when infeasible.
double hour_profit(const DailyProblem& prob, std::size_t hour, std::size_t step, int packets);

/// Objective of a full plan of (step, packets) per hour; -inf when infeasible.
double evaluate_plan(const DailyProblem& prob, const ContinuationTable& cont,
                     std::span<const std::pair<std::size_t, int>> plan);

/// Exact optimum. Ties go to less total hydro, then to less hydro in later
/// hours, then to the lower step index. Throws ValidationError listing the
/// hours with no feasible action.
DailySolution solve_daily(const DailyProblem& prob);

struct FocInputs {
  std::span<const market::UnitBid> bids;
  int hour = 0;
  std::string firm_id;
  std::string unit_id;
  smoothing::SmoothingConfig smoothing;
  double price = 0.0;
  double demand = 0.0;
  double contract_quantity = 0.0;
  ScarcityCharge scarcity;
  double thermal_cost = 0.0;
  double hydro_cost = 0.0;
  std::optional<hydro::ValueSpline> value;
  std::optional<hydro::TransitionDensity> inflow;
  hydro::HydroState state;
  /// Hydro released over the period, which locates the transition density.
  double hydro_supply = 0.0;
};

struct FocBreakdown {
  double marginal_revenue = 0.0;
  double x_hydro = 0.0;
  double x_thermal = 0.0;
  double x_rival_hydro = 0.0;
  double marginal_water_value = 0.0;
  double dp_dq = 0.0;
  double residual = 0.0;
};

/// mr - X^T c^T - X^H c^H + X^H * MV. Rivals' water only enters through
/// their own stocks, so its term is zero; X~^H is reported for reference.
/// Fringe-technology units of the firm are costed as thermal.
FocBreakdown foc_residual(const FocInputs& in);

/// Two-period problem with gross revenue a*Q - (b/2)*Q^2 each period, hydro
/// and thermal costs, and all remaining water used in period two.
struct TwoPeriodInstance {
  double a = 10.0;
  double b = 1.0;
  double thermal_cost = 4.0;
  double hydro_cost = 0.0;
  double inflow = 0.0;

  /// max over period-one hydro h in [0, w] of both periods' profit.
  double value(double water, double thermal_capacity) const;
  /// Central cross-difference of value() in (water, thermal capacity).
  double cross_partial(double water, double thermal_capacity, double step = 1e-3) const;
};

}  // namespace sfelab::dispatch
