#pragma once

// Gaussian-smoothed bid schedules and the envelope-theorem price derivatives.
//
// A step 1[b <= p] is replaced by Phi((p - b)/bw), so every derivative with
// respect to price, quantity or price bid is available in closed form.

#include <array>
#include <span>
#include <string>

#include "sfelab/market.hpp"

namespace sfelab::smoothing {

struct SmoothingConfig {
  double bandwidth = 0.0;

  void validate() const;
  /// bandwidth = fraction * expected price
  static SmoothingConfig from_expected_price(double expected_price, double fraction = 0.10);
};

/// Derivatives of the firm's smoothed supply restricted to one technology.
struct TechnologyTerms {
  double dS_dp = 0.0;
  double dS_dq = 0.0;
  double dS_db = 0.0;
};

struct SmoothedDerivatives {
  double dS_dp = 0.0;   // firm supply w.r.t. price
  double dS_dq = 0.0;   // firm supply w.r.t. the unit's quantity bid
  double dS_db = 0.0;   // firm supply w.r.t. the unit's price bid
  double dDR_dp = 0.0;  // firm residual demand w.r.t. price
  double dp_dq = 0.0;
  double dp_db = 0.0;
  /// Rivals' hydro supply slope times dp/dq.
  double rival_hydro_dp = 0.0;
  std::array<TechnologyTerms, 3> by_technology{};  // indexed by market::Technology

  const TechnologyTerms& tech(market::Technology t) const {
    return by_technology[static_cast<std::size_t>(t)];
  }
};

double kernel(double z);             // standard normal CDF
double kernel_derivative(double z);  // standard normal density

/// Sum over every bid active in `hour` of q * Phi((p - b)/bw).
double smoothed_supply(std::span<const market::UnitBid> bids, int hour, double p,
                       const SmoothingConfig& cfg);
/// Restricted to one firm's units.
double smoothed_firm_supply(std::span<const market::UnitBid> bids, int hour, double p,
                            const SmoothingConfig& cfg, const std::string& firm_id);

/// Throws FlatMarketError unless dDR_dp - dS_dp < 0, ValidationError if the
/// unit does not belong to the firm.
SmoothedDerivatives smoothed_derivatives(std::span<const market::UnitBid> bids, int hour, double p,
                                         const SmoothingConfig& cfg, const std::string& firm_id,
                                         const std::string& unit_id);

struct SlopeDiagnostics {
  /// dDR/dp * dp/dq with dS/dq = 1; in [0, 1], 1 for a price taker.
  double residual_demand_slope = 0.0;
  /// dS/dp * dp/dq with dS/dq = 1; in [-1, 0], 0 for a price taker.
  double own_supply_slope = 0.0;
};

SlopeDiagnostics slope_diagnostics(std::span<const market::UnitBid> bids, int hour, double p,
                                   const SmoothingConfig& cfg, const std::string& firm_id);

}  // namespace sfelab::smoothing
