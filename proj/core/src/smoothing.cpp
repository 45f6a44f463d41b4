#include "sfelab/smoothing.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "sfelab/error.hpp"

namespace sfelab::smoothing {

using market::Technology;
using market::UnitBid;

void SmoothingConfig::validate() const {
  if (!std::isfinite(bandwidth) || !(bandwidth > 0.0)) {
    throw ValidationError(fmt::format("smoothing.bandwidth: must be > 0 (got {})", bandwidth));
  }
}

SmoothingConfig SmoothingConfig::from_expected_price(double expected_price, double fraction) {
  SmoothingConfig cfg{fraction * expected_price};
  cfg.validate();
  return cfg;
}

double kernel(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double kernel_derivative(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double smoothed_supply(std::span<const UnitBid> bids, int hour, double p, const SmoothingConfig& cfg) {
  cfg.validate();
  double s = 0.0;
  for (const auto& b : bids) {
    if (b.active(hour)) s += b.quantity(hour) * kernel((p - b.price_bid) / cfg.bandwidth);
  }
  return s;
}

double smoothed_firm_supply(std::span<const UnitBid> bids, int hour, double p,
                            const SmoothingConfig& cfg, const std::string& firm_id) {
  cfg.validate();
  double s = 0.0;
  for (const auto& b : bids) {
    if (b.firm_id == firm_id && b.active(hour)) {
      s += b.quantity(hour) * kernel((p - b.price_bid) / cfg.bandwidth);
    }
  }
  return s;
}

namespace {

struct Slopes {
  double own = 0.0;
  double rival = 0.0;
  double rival_hydro = 0.0;
  std::array<double, 3> own_by_tech{};
};

Slopes slopes(std::span<const UnitBid> bids, int hour, double p, double bw,
              const std::string& firm_id) {
  Slopes s;
  for (const auto& b : bids) {
    if (!b.active(hour)) continue;
    const double d = b.quantity(hour) * kernel_derivative((p - b.price_bid) / bw) / bw;
    if (b.firm_id == firm_id) {
      s.own_by_tech[static_cast<std::size_t>(b.technology)] += d;
    } else {
      s.rival += d;
      if (b.technology == Technology::hydro) s.rival_hydro += d;
    }
  }
  for (double d : s.own_by_tech) s.own += d;
  return s;
}

double envelope_denominator(const Slopes& s, double p) {
  const double denom = -s.rival - s.own;
  if (!(denom < 0.0)) {
    throw FlatMarketError(fmt::format("no smoothed supply mass near price {}", p));
  }
  return denom;
}

}  // namespace

SmoothedDerivatives smoothed_derivatives(std::span<const UnitBid> bids, int hour, double p,
                                         const SmoothingConfig& cfg, const std::string& firm_id,
                                         const std::string& unit_id) {
  cfg.validate();
  const UnitBid* unit = nullptr;
  for (const auto& b : bids) {
    if (b.unit_id == unit_id) unit = &b;
  }
  if (unit == nullptr) throw ValidationError(fmt::format("unit '{}' not found", unit_id));
  if (unit->firm_id != firm_id) {
    throw ValidationError(fmt::format("unit '{}' belongs to firm '{}', not '{}'", unit_id,
                                      unit->firm_id, firm_id));
  }

  const double bw = cfg.bandwidth;
  const Slopes s = slopes(bids, hour, p, bw, firm_id);
  const double denom = envelope_denominator(s, p);

  const double z = (p - unit->price_bid) / bw;
  const double q = unit->quantity(hour);

  SmoothedDerivatives d;
  d.dS_dp = s.own;
  d.dS_dq = kernel(z);
  d.dS_db = -q * kernel_derivative(z) / bw;
  d.dDR_dp = -s.rival;
  d.dp_dq = d.dS_dq / denom;
  d.dp_db = d.dS_db / denom;
  d.rival_hydro_dp = s.rival_hydro * d.dp_dq;
  for (std::size_t t = 0; t < 3; ++t) d.by_technology[t].dS_dp = s.own_by_tech[t];
  auto& own_tech = d.by_technology[static_cast<std::size_t>(unit->technology)];
  own_tech.dS_dq = d.dS_dq;
  own_tech.dS_db = d.dS_db;
  return d;
}

SlopeDiagnostics slope_diagnostics(std::span<const UnitBid> bids, int hour, double p,
                                   const SmoothingConfig& cfg, const std::string& firm_id) {
  cfg.validate();
  const Slopes s = slopes(bids, hour, p, cfg.bandwidth, firm_id);
  const double dp_dq = 1.0 / envelope_denominator(s, p);
  return {-s.rival * dp_dq, s.own * dp_dq};
}

}  // namespace sfelab::smoothing
