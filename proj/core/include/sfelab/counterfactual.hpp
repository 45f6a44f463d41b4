#pragma once

// Capacity transfers to the leader, price-difference grids and concentration
// metrics.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sfelab/analytic_sfe.hpp"
#include "sfelab/horizon.hpp"
#include "sfelab/inflow.hpp"
#include "sfelab/market.hpp"

namespace sfelab::cf {

enum class SourceSet { non_hydro_firms, all_rivals };
std::string to_string(SourceSet s);
SourceSet source_set_from_string(const std::string& s);

/// Which capacity kappa applies to.
enum class CapacityMode { declared, max_observed_bid };
std::string to_string(CapacityMode m);
CapacityMode capacity_mode_from_string(const std::string& s);

struct TransferSpec {
  double kappa = 0.0;
  SourceSet source = SourceSet::non_hydro_firms;
  std::string leader;
  CapacityMode capacity_mode = CapacityMode::declared;

  void validate() const;
};

struct TransferResult {
  std::vector<market::UnitBid> bids;
  /// Leader thermal capacity gained in each hour, counting only source units
  /// that bid in that hour.
  sim::HourArray hourly_increment{};
  /// Total capacity moved to the leader.
  double leader_increment = 0.0;
};

/// Thermal and fringe units of the source firms lose kappa of their
/// capacity; a quantity bid is cut only where it exceeds the new capacity.
TransferResult transfer_capacity(std::span<const market::UnitBid> bids, const TransferSpec& spec);

/// Declared capacity of every non-hydro unit.
double industry_thermal_capacity(std::span<const market::UnitBid> bids);

struct GridCell {
  double kappa = 0.0;
  int decile = 1;
  /// Mean of p_kappa - p_base (price units, signed).
  double mean_abs_diff = 0.0;
  /// Mean of (p_kappa - p_base) / p_base over cells with p_base != 0.
  double mean_rel_diff = 0.0;
  std::size_t count = 0;
  std::size_t failures = 0;
};

struct CounterfactualGrid {
  std::vector<double> kappas;
  /// Baseline stock at the decile boundaries (11 values, min to max).
  std::vector<double> decile_edges;
  int deciles = 10;
  std::vector<GridCell> cells;  // kappa-major
  /// Mean price difference over every market, one per kappa.
  std::vector<double> kappa_profile;
  /// Industry thermal capacity, counting the leader's gain, one per kappa.
  std::vector<double> industry_capacity;
  std::string note;

  const GridCell& cell(std::size_t kappa_index, int decile) const;
};

/// Re-solves the leader's best response for every kappa on the baseline
/// inflow and demand draws; markets are bucketed by rank deciles of the
/// baseline start-of-week stock.
CounterfactualGrid run_counterfactual(const sim::SimulationConfig& cfg, std::span<const double> kappas,
                                      SourceSet source, CapacityMode mode, int threads = 1);

/// Duopoly version: kappa moves kappa * K2^h of follower capacity to the
/// leader; one bucket per kappa.
CounterfactualGrid run_analytic_counterfactual(const market::TechnologyPortfolio& k1,
                                               const market::TechnologyPortfolio& k2,
                                               const market::CostLadder& ladder, double demand,
                                               std::span<const double> kappas);

/// `kappa,decile,mean_abs_diff,mean_rel_diff,count,failures`
std::string grid_to_csv(const CounterfactualGrid& grid);

/// Diverging heatmap: kappa rows, decile columns, blue below zero, red above.
std::string grid_to_svg(const CounterfactualGrid& grid);

struct FirmPosition {
  std::string firm_id;
  double capacity = 0.0;
  hydro::ForecastClass forecast = hydro::ForecastClass::moderate;
};

struct ConcentrationSnapshot {
  std::vector<std::string> firms;
  std::vector<double> shares;
  std::vector<int> net_adverse;
  double hhi = 0.0;
  double delta = 0.0;
};

/// hhi = sum s_i^2, delta = sum net_adverse_i * s_i^2 with net_adverse +1 for
/// adverse, -1 for favourable and 0 otherwise.
ConcentrationSnapshot concentration_metrics(std::span<const FirmPosition> firms);

}  // namespace sfelab::cf
