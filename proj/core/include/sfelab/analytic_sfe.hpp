#pragma once

// Closed-form supply function equilibria for the two-firm, three-technology
// market: an asymmetric duopoly (leader holds low-cost capacity, follower holds
// only high-cost capacity) and the symmetric case.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sfelab/market.hpp"

namespace sfelab::sfe {

enum class Regime { abundance, scarcity, symmetric };

std::string to_string(Regime r);

struct PiecewiseSFE {
  market::CostLadder ladder;
  market::TechnologyPortfolio k1;
  market::TechnologyPortfolio k2;
  Regime regime = Regime::abundance;
  double c1 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  /// Price at which the leader exhausts its low-cost capacity. When p_hat >=
  /// c_fringe the hyperbolic branch is never reached.
  double p_hat = 0.0;
  double alpha = 0.0;
  /// Left limits of each firm's supply at c_fringe.
  double limit1 = 0.0;
  double limit2 = 0.0;
  /// Both firms bind at c_fringe (regime boundary).
  bool knife_edge = false;
};

/// Leader k1 = (K^l, K^h, 0) with K^l > 0, follower k2 = (0, K^h, 0) with K^h > 0.
/// Throws RegimeViolationError in scarcity when the leader's high-cost
/// capacity is large enough that the follower would bind first; the error
/// carries the largest admissible leader high-cost capacity.
PiecewiseSFE solve_duopoly(const market::TechnologyPortfolio& k1,
                           const market::TechnologyPortfolio& k2,
                           const market::CostLadder& ladder);

/// Both supply limits at c_fringe for a candidate slope c1 in (0, alpha).
std::array<double, 2> supply_limits(const market::CostLadder& ladder, double k1_low, double c1);

/// Supply of firm 1 or 2 at price p.
double eval_sfe_supply(const PiecewiseSFE& sfe, int firm, double p);
/// Derivative of a firm's supply; only meaningful off the kinks.
double eval_sfe_slope(const PiecewiseSFE& sfe, int firm, double p);
double aggregate_supply(const PiecewiseSFE& sfe, double p);

/// Lowest price at which both firms (plus the fringe at c_fringe) cover demand.
double sfe_clearing_price(const PiecewiseSFE& sfe, double demand);

struct TransferPoint {
  double delta = 0.0;
  double price = 0.0;
  Regime regime = Regime::abundance;
  double c1 = 0.0;
  double p_hat = 0.0;
};

/// Moves delta units of high-cost capacity from follower to leader and
/// re-solves at fixed demand.
std::vector<TransferPoint> transfer_sweep(const market::TechnologyPortfolio& k1,
                                          const market::TechnologyPortfolio& k2,
                                          const market::CostLadder& ladder,
                                          std::span<const double> deltas, double demand);

/// Symmetric firms with (K^l, K^h) each after firm 2 hands delta of high-cost
/// capacity to firm 1. Below c_fringe both firms offer the same schedule.
struct SymmetricSFE {
  market::CostLadder ladder;
  double k_low = 0.0;
  double k_high = 0.0;
  double delta = 0.0;
  double low_slope = 0.0;
  double high_slope = 0.0;
  double p_hat = 0.0;

  /// Per-firm supply below c_fringe; at or above it firm 1 offers
  /// K^l+K^h+delta and firm 2 K^l+K^h-delta.
  double firm_supply(int firm, double p) const;
  double aggregate(double p) const;
  double clearing_price(double demand) const;
};

SymmetricSFE solve_symmetric(double k_low, double k_high, const market::CostLadder& ladder,
                             double delta);

/// Markup identity residual per firm at a clearing price p:
///   (p - C'_i)/p - (s_i/eta) * (1 - S_i'/D_i^R')
/// with s_i = S_i/D, eta = S' p / D and D_i^R' = -S_{-i}'.
/// Throws NonDifferentiablePointError at or outside the kinks c_high, p_hat,
/// c_fringe, and ValidationError if demand does not clear at p.
std::array<double, 2> verify_markup(const PiecewiseSFE& sfe, double p, double demand);

}  // namespace sfelab::sfe
