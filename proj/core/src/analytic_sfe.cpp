#include "sfelab/analytic_sfe.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sfelab/error.hpp"

namespace sfelab::sfe {

using market::CostLadder;
using market::TechnologyPortfolio;

std::string to_string(Regime r) {
  switch (r) {
    case Regime::abundance:
      return "abundance";
    case Regime::scarcity:
      return "scarcity";
    case Regime::symmetric:
      return "symmetric";
  }
  return "unknown";
}

namespace {

struct Coefficients {
  double c3;
  double c4;
  double p_hat;
};

Coefficients coefficients(const CostLadder& ladder, double alpha, double c1) {
  const double gap = ladder.c_high - ladder.c_low;
  const double c4 = 0.5 * gap * gap * (alpha - c1);
  const double c3 = 0.5 * c1 * (1.0 + alpha / (alpha - c1));
  const double p_hat = ladder.c_high + gap * (alpha - c1) / c1;
  return {c3, c4, p_hat};
}

// Bisection on an increasing function over (lo, hi); returns the sign-change point.
template <class F>
double bisect_increasing(F&& f, double lo, double hi) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

void check_duopoly_inputs(const TechnologyPortfolio& k1, const TechnologyPortfolio& k2,
                          const CostLadder& ladder) {
  ladder.validate();
  k1.validate();
  k2.validate();
  if (!(k1.k_low > 0.0)) throw ValidationError("k1.k_low: leader low-cost capacity must be > 0");
  if (k1.k_fringe != 0.0) throw ValidationError("k1.k_fringe: must be 0");
  if (k2.k_low != 0.0 || k2.k_fringe != 0.0) {
    throw ValidationError("k2: follower may hold only high-cost capacity");
  }
  if (!(k2.k_high > 0.0)) throw ValidationError("k2.k_high: follower capacity must be > 0");
}

}  // namespace

std::array<double, 2> supply_limits(const CostLadder& ladder, double k1_low, double c1) {
  const double alpha = k1_low / (ladder.c_high - ladder.c_low);
  const double span_high = ladder.c_fringe - ladder.c_high;
  if (c1 * (ladder.c_fringe - ladder.c_low) <= k1_low) {
    return {c1 * (ladder.c_fringe - ladder.c_low), c1 * span_high};
  }
  const auto co = coefficients(ladder, alpha, c1);
  return {co.c3 * span_high + co.c4 / span_high, co.c3 * span_high - co.c4 / span_high};
}

PiecewiseSFE solve_duopoly(const TechnologyPortfolio& k1, const TechnologyPortfolio& k2,
                           const CostLadder& ladder) {
  check_duopoly_inputs(k1, k2, ladder);

  PiecewiseSFE sfe;
  sfe.ladder = ladder;
  sfe.k1 = k1;
  sfe.k2 = k2;
  sfe.alpha = k1.k_low / (ladder.c_high - ladder.c_low);

  const double ratio = (ladder.c_fringe - ladder.c_low) / (ladder.c_fringe - ladder.c_high);
  const double boundary = ratio * k2.k_high;
  const double k1_total = k1.k_low + k1.k_high;
  sfe.regime = k1.k_low >= boundary ? Regime::abundance : Regime::scarcity;

  if (sfe.regime == Regime::scarcity) {
    // Slope at which the follower would exhaust its capacity.
    const double c1_follower = bisect_increasing(
        [&](double c) { return supply_limits(ladder, k1.k_low, c)[1] - k2.k_high; }, 0.0, sfe.alpha);
    const double threshold = supply_limits(ladder, k1.k_low, c1_follower)[0] - k1.k_low;
    if (!(k1.k_high < threshold)) {
      throw RegimeViolationError(
          fmt::format("k1.k_high: {} too large for the scarcity regime (must be < {})", k1.k_high,
                      threshold),
          threshold);
    }
  }

  sfe.c1 = bisect_increasing(
      [&](double c) {
        const auto lim = supply_limits(ladder, k1.k_low, c);
        return std::max(lim[0] - k1_total, lim[1] - k2.k_high);
      },
      0.0, sfe.alpha);

  const auto co = coefficients(ladder, sfe.alpha, sfe.c1);
  sfe.c3 = co.c3;
  sfe.c4 = co.c4;
  sfe.p_hat = co.p_hat;
  const auto lim = supply_limits(ladder, k1.k_low, sfe.c1);
  sfe.limit1 = lim[0];
  sfe.limit2 = lim[1];
  const double tol = 1e-9 * std::max(1.0, k1_total + k2.k_high);
  sfe.knife_edge = std::abs(lim[0] - k1_total) <= tol && std::abs(lim[1] - k2.k_high) <= tol;
  return sfe;
}

double eval_sfe_supply(const PiecewiseSFE& sfe, int firm, double p) {
  if (firm != 1 && firm != 2) throw ValidationError("firm must be 1 or 2");
  const auto& L = sfe.ladder;
  if (p >= L.c_fringe) return firm == 1 ? sfe.k1.k_low + sfe.k1.k_high : sfe.k2.k_high;
  if (p < L.c_high) return 0.0;
  if (p < sfe.p_hat) return firm == 1 ? sfe.c1 * (p - L.c_low) : sfe.c1 * (p - L.c_high);
  const double x = p - L.c_high;
  return firm == 1 ? sfe.c3 * x + sfe.c4 / x : sfe.c3 * x - sfe.c4 / x;
}

double eval_sfe_slope(const PiecewiseSFE& sfe, int firm, double p) {
  if (firm != 1 && firm != 2) throw ValidationError("firm must be 1 or 2");
  const auto& L = sfe.ladder;
  if (p >= L.c_fringe || p < L.c_high) return 0.0;
  if (p < sfe.p_hat) return sfe.c1;
  const double x = p - L.c_high;
  return firm == 1 ? sfe.c3 - sfe.c4 / (x * x) : sfe.c3 + sfe.c4 / (x * x);
}

double aggregate_supply(const PiecewiseSFE& sfe, double p) {
  return eval_sfe_supply(sfe, 1, p) + eval_sfe_supply(sfe, 2, p);
}

double sfe_clearing_price(const PiecewiseSFE& sfe, double demand) {
  if (!std::isfinite(demand) || demand < 0.0) {
    throw ValidationError(fmt::format("demand must be >= 0 (got {})", demand));
  }
  if (demand == 0.0) return 0.0;
  const auto& L = sfe.ladder;
  if (demand <= sfe.c1 * (L.c_high - L.c_low)) return L.c_high;
  const double linear_end = std::min(sfe.p_hat, L.c_fringe);
  if (demand < sfe.c1 * (2.0 * linear_end - L.c_low - L.c_high)) {
    return 0.5 * (demand / sfe.c1 + L.c_low + L.c_high);
  }
  if (sfe.p_hat < L.c_fringe && demand < 2.0 * sfe.c3 * (L.c_fringe - L.c_high)) {
    return L.c_high + demand / (2.0 * sfe.c3);
  }
  return L.c_fringe;
}

std::vector<TransferPoint> transfer_sweep(const TechnologyPortfolio& k1, const TechnologyPortfolio& k2,
                                          const CostLadder& ladder, std::span<const double> deltas,
                                          double demand) {
  std::vector<TransferPoint> out;
  out.reserve(deltas.size());
  for (double d : deltas) {
    if (!std::isfinite(d) || d < 0.0 || d > k2.k_high) {
      throw ValidationError(fmt::format("deltas: {} outside [0, {}]", d, k2.k_high));
    }
    TechnologyPortfolio a = k1;
    TechnologyPortfolio b = k2;
    a.k_high += d;
    b.k_high -= d;
    const auto sfe = solve_duopoly(a, b, ladder);
    out.push_back({d, sfe_clearing_price(sfe, demand), sfe.regime, sfe.c1, sfe.p_hat});
  }
  return out;
}

double SymmetricSFE::firm_supply(int firm, double p) const {
  if (firm != 1 && firm != 2) throw ValidationError("firm must be 1 or 2");
  if (p >= ladder.c_fringe) return k_low + k_high + (firm == 1 ? delta : -delta);
  if (p < ladder.c_low) return 0.0;
  if (p < p_hat) return low_slope * (p - ladder.c_low);
  return high_slope * (p - ladder.c_high);
}

double SymmetricSFE::aggregate(double p) const { return firm_supply(1, p) + firm_supply(2, p); }

double SymmetricSFE::clearing_price(double demand) const {
  if (!std::isfinite(demand) || demand < 0.0) {
    throw ValidationError(fmt::format("demand must be >= 0 (got {})", demand));
  }
  if (demand == 0.0) return ladder.c_low;
  if (demand < 2.0 * k_low) return ladder.c_low + demand / (2.0 * low_slope);
  if (demand < 2.0 * (k_low + k_high - delta)) return ladder.c_high + demand / (2.0 * high_slope);
  return ladder.c_fringe;
}

SymmetricSFE solve_symmetric(double k_low, double k_high, const CostLadder& ladder, double delta) {
  ladder.validate();
  if (!std::isfinite(k_low) || !(k_low > 0.0)) throw ValidationError("k_low: must be > 0");
  if (!std::isfinite(k_high) || k_high < 0.0) throw ValidationError("k_high: must be >= 0");
  if (!std::isfinite(delta) || delta < 0.0 || delta > k_high) {
    throw ValidationError(fmt::format("delta: {} outside [0, k_high = {}]", delta, k_high));
  }
  SymmetricSFE s;
  s.ladder = ladder;
  s.k_low = k_low;
  s.k_high = k_high;
  s.delta = delta;
  const double kept_high = k_high - delta;
  const double total = k_low + kept_high;
  s.low_slope = k_low * total /
                ((ladder.c_high - ladder.c_low) * kept_high + (ladder.c_fringe - ladder.c_low) * k_low);
  s.high_slope = total / (ladder.c_fringe - ladder.c_high);
  s.p_hat = (ladder.c_high * kept_high + ladder.c_fringe * k_low) / total;
  return s;
}

std::array<double, 2> verify_markup(const PiecewiseSFE& sfe, double p, double demand) {
  const auto& L = sfe.ladder;
  const double kink_tol = 1e-12 * std::max(1.0, std::abs(p));
  if (!(p > L.c_high + kink_tol) || !(p < L.c_fringe - kink_tol)) {
    throw NonDifferentiablePointError(
        fmt::format("price {} not inside ({}, {})", p, L.c_high, L.c_fringe), p);
  }
  if (std::abs(p - sfe.p_hat) <= kink_tol) {
    throw NonDifferentiablePointError(fmt::format("price {} is the switching price", p), p);
  }
  const double s1 = eval_sfe_supply(sfe, 1, p);
  const double s2 = eval_sfe_supply(sfe, 2, p);
  if (std::abs(s1 + s2 - demand) > 1e-9 * std::max(1.0, demand)) {
    throw ValidationError(
        fmt::format("demand {} does not clear at price {} (supply {})", demand, p, s1 + s2));
  }
  const double d1 = eval_sfe_slope(sfe, 1, p);
  const double d2 = eval_sfe_slope(sfe, 2, p);
  const double eta = (d1 + d2) * p / demand;

  const double mc1 = s1 < sfe.k1.k_low ? L.c_low : L.c_high;
  const double mc2 = L.c_high;
  auto residual = [&](double s_own, double own_slope, double rival_slope, double mc) {
    const double share = s_own / demand;
    const double rd_slope = -rival_slope;
    return (p - mc) / p - (share / eta) * (1.0 - own_slope / rd_slope);
  };
  return {residual(s1, d1, d2, mc1), residual(s2, d2, d1, mc2)};
}

}  // namespace sfelab::sfe
