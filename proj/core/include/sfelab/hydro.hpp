#pragma once

// Reservoir water balance and the integrals linking the value spline to
// the water-stock transition density.
//
// Next stock: w' = w - S_hydro + inflow. With `inflow` distributed as the
// density g, w' has density f(u) = g(u - w + S_hydro), so
// d f / d S_hydro = g'(u - w + S_hydro).

#include <functional>
#include <utility>

#include "sfelab/density.hpp"
#include "sfelab/value_spline.hpp"

namespace sfelab::hydro {

struct HydroState {
  double stock = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;

  void validate() const;
  double usable() const { return stock - lower_bound; }
};

struct WaterUpdate {
  HydroState state;
  double spilled = 0.0;
};

/// Throws DeficitError below the lower bound; spills (and reports) above the upper.
WaterUpdate water_update(const HydroState& state, double hydro_supplied, double inflow);

/// Integral of B_r(u) * d f(u) / d S_hydro over the basis support.
double marginal_value_integral(const ValueSpline& spline, const TransitionDensity& inflow,
                               const HydroState& state, double hydro_supply, std::size_t r);

/// Same with an arbitrary basis integrated over the real line.
double marginal_value_integral(const std::function<double(double)>& basis,
                               const TransitionDensity& inflow, const HydroState& state,
                               double hydro_supply);

/// sum_r gamma_r * marginal_value_integral(r): the marginal value of holding water.
double marginal_water_value(const ValueSpline& spline, const TransitionDensity& inflow,
                            const HydroState& state, double hydro_supply);

/// E[V(w')] for w' = stock_after_release + inflow.
double expected_value(const ValueSpline& spline, const TransitionDensity& inflow,
                      double stock_after_release);

}  // namespace sfelab::hydro
