#include "sfelab/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "sfelab/csv.hpp"
#include "sfelab/error.hpp"

namespace sfelab::cf {

using market::Technology;

std::string to_string(SourceSet s) { return s == SourceSet::all_rivals ? "all" : "nonhydro"; }

SourceSet source_set_from_string(const std::string& s) {
  if (s == "all" || s == "all_rivals") return SourceSet::all_rivals;
  if (s == "nonhydro" || s == "non_hydro_firms") return SourceSet::non_hydro_firms;
  throw ValidationError(fmt::format("source: expected all or nonhydro (got '{}')", s));
}

std::string to_string(CapacityMode m) {
  return m == CapacityMode::declared ? "declared" : "max_observed_bid";
}

CapacityMode capacity_mode_from_string(const std::string& s) {
  if (s == "declared") return CapacityMode::declared;
  if (s == "max_observed_bid") return CapacityMode::max_observed_bid;
  throw ValidationError(fmt::format("capacity_mode: expected declared or max_observed_bid (got '{}')", s));
}

void TransferSpec::validate() const {
  if (!std::isfinite(kappa) || kappa < 0.0 || kappa > 1.0) {
    throw ValidationError(fmt::format("kappa: must lie in [0, 1] (got {})", kappa));
  }
  if (leader.empty()) throw ValidationError("transfer: leader id is empty");
}

TransferResult transfer_capacity(std::span<const market::UnitBid> bids, const TransferSpec& spec) {
  spec.validate();
  if (std::none_of(bids.begin(), bids.end(), [&](const auto& b) { return b.firm_id == spec.leader; })) {
    throw ValidationError(fmt::format("transfer: leader '{}' owns no unit", spec.leader));
  }
  std::set<std::string> hydro_owners;
  for (const auto& b : bids) {
    if (b.technology == Technology::hydro) hydro_owners.insert(b.firm_id);
  }
  auto is_source = [&](const market::UnitBid& b) {
    if (b.firm_id == spec.leader || b.technology == Technology::hydro) return false;
    return spec.source == SourceSet::all_rivals || !hydro_owners.contains(b.firm_id);
  };

  TransferResult out;
  out.bids.assign(bids.begin(), bids.end());
  if (spec.kappa == 0.0) return out;
  for (auto& b : out.bids) {
    if (!is_source(b)) continue;
    double base = b.capacity;
    if (spec.capacity_mode == CapacityMode::max_observed_bid) {
      base = 0.0;
      for (int h = 0; h < market::kHoursPerDay; ++h) base = std::max(base, b.quantity(h));
    }
    const double moved = spec.kappa * base;
    const double usable = base - moved;
    b.capacity = std::max(b.capacity - moved, 0.0);
    for (int h = 0; h < market::kHoursPerDay; ++h) {
      auto& q = b.hourly_quantities[static_cast<std::size_t>(h)];
      q = std::min(q, std::min(usable, b.capacity));
      if (b.active(h)) out.hourly_increment[static_cast<std::size_t>(h)] += moved;
    }
    out.leader_increment += moved;
  }
  return out;
}

double industry_thermal_capacity(std::span<const market::UnitBid> bids) {
  double k = 0.0;
  for (const auto& b : bids) {
    if (b.technology != Technology::hydro) k += b.capacity;
  }
  return k;
}

const GridCell& CounterfactualGrid::cell(std::size_t kappa_index, int decile) const {
  return cells.at(kappa_index * static_cast<std::size_t>(deciles) + static_cast<std::size_t>(decile - 1));
}

namespace {

void check_kappas(std::span<const double> kappas) {
  if (kappas.empty()) throw ValidationError("kappas: at least one value required");
  for (double k : kappas) {
    if (!std::isfinite(k) || k < 0.0 || k > 1.0) {
      throw ValidationError(fmt::format("kappas: {} outside [0, 1]", k));
    }
  }
}

struct KappaRun {
  sim::HorizonResult result;
  double industry = 0.0;
  std::exception_ptr error;
};

}  // namespace

CounterfactualGrid run_counterfactual(const sim::SimulationConfig& cfg, std::span<const double> kappas,
                                      SourceSet source, CapacityMode mode, int threads) {
  check_kappas(kappas);
  if (threads < 1) throw ValidationError("threads: must be >= 1");
  cfg.validate();
  const auto draws = sim::draw_realization(cfg);
  const auto base = sim::simulate_horizon(cfg, draws, false);

  std::vector<KappaRun> runs(kappas.size());
  auto work = [&](std::size_t i) {
    try {
      TransferSpec spec{kappas[i], source, cfg.leader, mode};
      auto moved = transfer_capacity(cfg.bids, spec);
      auto c = cfg;
      c.bids = std::move(moved.bids);
      for (std::size_t h = 0; h < c.extra_thermal.size(); ++h) {
        c.extra_thermal[h] += moved.hourly_increment[h];
      }
      runs[i].industry = industry_thermal_capacity(c.bids) + moved.leader_increment;
      runs[i].result = sim::simulate_horizon(c, draws, false);
    } catch (...) {
      runs[i].error = std::current_exception();
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(threads), kappas.size());
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < kappas.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < kappas.size(); i += n_threads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& r : runs) {
    if (r.error) std::rethrow_exception(r.error);
  }

  CounterfactualGrid grid;
  grid.kappas.assign(kappas.begin(), kappas.end());
  grid.note = "rival bids held fixed; price changes are lower bounds";

  // Rank deciles of the baseline stock; ties are split by market order.
  const auto& recs = base.records;
  const std::size_t n = recs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return recs[a].water_stock < recs[b].water_stock; });
  std::vector<int> decile(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    decile[order[rank]] = static_cast<int>(rank * 10 / n) + 1;
  }
  for (int d = 0; d <= 10; ++d) {
    const std::size_t rank = std::min(n - 1, static_cast<std::size_t>(d) * n / 10);
    grid.decile_edges.push_back(recs[order[d == 10 ? n - 1 : rank]].water_stock);
  }

  for (std::size_t k = 0; k < kappas.size(); ++k) {
    const auto& rr = runs[k].result.records;
    std::vector<GridCell> row(10);
    std::vector<std::size_t> rel_count(10, 0);
    double total = 0.0;
    std::size_t total_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = row[static_cast<std::size_t>(decile[i] - 1)];
      if (recs[i].failed || rr[i].failed) {
        ++c.failures;
        continue;
      }
      const double diff = rr[i].price - recs[i].price;
      c.mean_abs_diff += diff;
      ++c.count;
      total += diff;
      ++total_n;
      if (recs[i].price != 0.0) {
        c.mean_rel_diff += diff / recs[i].price;
        ++rel_count[static_cast<std::size_t>(decile[i] - 1)];
      }
    }
    for (int d = 0; d < 10; ++d) {
      auto& c = row[static_cast<std::size_t>(d)];
      c.kappa = kappas[k];
      c.decile = d + 1;
      if (c.count > 0) c.mean_abs_diff /= static_cast<double>(c.count);
      const auto rc = rel_count[static_cast<std::size_t>(d)];
      if (rc > 0) c.mean_rel_diff /= static_cast<double>(rc);
      grid.cells.push_back(c);
    }
    grid.kappa_profile.push_back(total_n > 0 ? total / static_cast<double>(total_n) : std::nan(""));
    grid.industry_capacity.push_back(runs[k].industry);
  }
  return grid;
}

CounterfactualGrid run_analytic_counterfactual(const market::TechnologyPortfolio& k1,
                                               const market::TechnologyPortfolio& k2,
                                               const market::CostLadder& ladder, double demand,
                                               std::span<const double> kappas) {
  check_kappas(kappas);
  const double zero = 0.0;
  const double base = sfe::transfer_sweep(k1, k2, ladder, std::span<const double>(&zero, 1), demand)
                          .front()
                          .price;
  CounterfactualGrid grid;
  grid.deciles = 1;
  grid.kappas.assign(kappas.begin(), kappas.end());
  grid.decile_edges = {0.0, 0.0};
  grid.note = "analytic duopoly; kappa moves kappa * follower high-cost capacity";
  const double total = k1.k_low + k1.k_high + k2.k_low + k2.k_high;
  for (double kappa : kappas) {
    GridCell c;
    c.kappa = kappa;
    const double delta = kappa * k2.k_high;
    try {
      const auto pt = sfe::transfer_sweep(k1, k2, ladder, std::span<const double>(&delta, 1), demand);
      c.mean_abs_diff = pt.front().price - base;
      c.mean_rel_diff = base != 0.0 ? c.mean_abs_diff / base : 0.0;
      c.count = 1;
    } catch (const ValidationError&) {
      c.failures = 1;
    }
    grid.cells.push_back(c);
    grid.kappa_profile.push_back(c.count > 0 ? c.mean_abs_diff : std::nan(""));
    grid.industry_capacity.push_back(total);
  }
  return grid;
}

std::string grid_to_csv(const CounterfactualGrid& grid) {
  using io::format_number;
  std::string out = "kappa,decile,mean_abs_diff,mean_rel_diff,count,failures\n";
  for (const auto& c : grid.cells) {
    out += fmt::format("{},{},{},{},{},{}\n", format_number(c.kappa), c.decile,
                       format_number(c.mean_abs_diff), format_number(c.mean_rel_diff), c.count,
                       c.failures);
  }
  return out;
}

ConcentrationSnapshot concentration_metrics(std::span<const FirmPosition> firms) {
  if (firms.empty()) throw ValidationError("concentration: at least one firm required");
  double total = 0.0;
  for (const auto& f : firms) {
    if (!std::isfinite(f.capacity) || f.capacity < 0.0) {
      throw ValidationError(fmt::format("concentration: firm {} capacity must be >= 0", f.firm_id));
    }
    total += f.capacity;
  }
  if (!(total > 0.0)) throw ValidationError("concentration: total capacity is zero, shares undefined");
  ConcentrationSnapshot s;
  for (const auto& f : firms) {
    const double share = f.capacity / total;
    int na = 0;
    if (f.forecast == hydro::ForecastClass::adverse) na = 1;
    if (f.forecast == hydro::ForecastClass::favorable) na = -1;
    s.firms.push_back(f.firm_id);
    s.shares.push_back(share);
    s.net_adverse.push_back(na);
    s.hhi += share * share;
    s.delta += na * share * share;
  }
  return s;
}

}  // namespace sfelab::cf
