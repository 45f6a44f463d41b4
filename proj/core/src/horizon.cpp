#include "sfelab/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "sfelab/csv.hpp"
#include "sfelab/error.hpp"
#include "sfelab/rng.hpp"

namespace sfelab::sim {

using market::Technology;

void DemandSpec::validate() const {
  for (double d : mean) {
    if (!std::isfinite(d) || d < 0.0) throw ValidationError("demand: hourly values must be >= 0");
  }
  if (!std::isfinite(sd) || sd < 0.0) throw ValidationError("demand.stochastic.sd: must be >= 0");
}

void SimulationConfig::validate() const {
  if (bids.empty()) throw ValidationError("simulation.bids: no bids");
  for (const auto& b : bids) b.validate();
  if (std::none_of(bids.begin(), bids.end(), [&](const auto& b) { return b.firm_id == leader; })) {
    throw ValidationError(fmt::format("simulation.leader: firm '{}' owns no unit", leader));
  }
  if (!std::isfinite(fringe_cost)) throw ValidationError("simulation.fringe.cost: must be finite");
  demand.validate();
  hydro.validate();
  if (supply_steps < 2 || demand_steps < 2 || value_steps < 2) {
    throw ValidationError("simulation.grid: G, Z and M must be >= 2");
  }
  if (weeks < 1) throw ValidationError("simulation.weeks: must be >= 1");
  if (days_per_period < 1) throw ValidationError("simulation.days_per_period: must be >= 1");
  if (!contracts.empty() && contracts.size() != market::kHoursPerDay) {
    throw ValidationError("simulation.contracts: need 24 hourly quantities");
  }
  for (double e : extra_thermal) {
    if (!std::isfinite(e) || e < 0.0) throw ValidationError("extra thermal capacity must be >= 0");
  }
}

double SimulationConfig::leader_hydro_capacity() const {
  double k = 0.0;
  for (const auto& b : bids) {
    if (b.firm_id == leader && b.technology == Technology::hydro) k += b.capacity;
  }
  return k;
}

double SimulationConfig::leader_thermal_capacity(int hour) const {
  double k = extra_thermal[static_cast<std::size_t>(hour)];
  for (const auto& b : bids) {
    if (b.firm_id == leader && b.technology != Technology::hydro && b.active(hour)) k += b.capacity;
  }
  return k;
}

Realization draw_realization(const SimulationConfig& cfg) {
  const rng::StreamSeeder seeder(cfg.seed);
  Realization out;
  auto inflow_eng = seeder.engine(rng::kInflowStream);
  out.inflows = hydro::simulate_inflows(cfg.inflow, static_cast<std::size_t>(cfg.weeks), inflow_eng,
                                        cfg.inflow_history);
  for (double& x : out.inflows) x = std::max(x, 0.0);

  auto demand_eng = seeder.engine(rng::kDemandStream);
  out.demand.resize(static_cast<std::size_t>(cfg.weeks));
  for (auto& row : out.demand) {
    for (std::size_t h = 0; h < row.size(); ++h) {
      double d = cfg.demand.mean[h];
      if (cfg.demand.kind == DemandSpec::Kind::stochastic && cfg.demand.sd > 0.0) {
        d += cfg.demand.sd * rng::standard_normal(demand_eng);
      }
      row[h] = std::max(d, 0.0);
    }
  }
  return out;
}

namespace {

std::optional<hydro::TransitionDensity> inflow_density(const hydro::InflowModel& m, double mean) {
  if (m.residual_density) return m.residual_density->with_mean(mean);
  if (m.residual_sd > 0.0) return hydro::TransitionDensity::normal(mean, m.residual_sd);
  return std::nullopt;
}

}  // namespace

HorizonResult simulate_horizon(const SimulationConfig& cfg, const Realization& draws, bool fail_fast) {
  cfg.validate();
  const auto H = static_cast<std::size_t>(market::kHoursPerDay);

  std::vector<std::vector<market::FirmSchedule>> rivals(H);
  for (std::size_t h = 0; h < H; ++h) {
    for (auto& fs : market::hourly_schedules(cfg.bids, static_cast<int>(h))) {
      if (fs.firm_id != cfg.leader) rivals[h].push_back(std::move(fs));
    }
  }
  const double hydro_cap = cfg.leader_hydro_capacity();
  std::vector<double> thermal_cap(H);
  for (std::size_t h = 0; h < H; ++h) thermal_cap[h] = cfg.leader_thermal_capacity(static_cast<int>(h));

  HorizonResult res;
  res.inflows = draws.inflows;
  auto state = cfg.hydro;
  auto history = cfg.inflow_history;
  res.stock_path.push_back(state.stock);

  for (int w = 0; w < cfg.weeks; ++w) {
    const auto& demand = draws.demand[static_cast<std::size_t>(w)];
    const double forecast = std::max(hydro::forecast_inflows(cfg.inflow, history, 1), 0.0);

    dispatch::DailyProblem prob;
    prob.thermal_cost = cfg.thermal_cost;
    prob.hydro_cost = cfg.hydro_cost;
    prob.value = cfg.value;
    prob.inflow = inflow_density(cfg.inflow, forecast);
    prob.expected_inflow = forecast;
    prob.state = state;
    prob.thermal_capacity = thermal_cap;
    prob.hydro_capacity = hydro_cap;
    prob.days_per_period = cfg.days_per_period;
    prob.supply_steps = cfg.supply_steps;
    prob.value_steps = cfg.value_steps;
    prob.scarcity = cfg.scarcity;
    prob.contract_quantity = cfg.contracts;

    double released = 0.0;
    try {
      for (std::size_t h = 0; h < H; ++h) {
        prob.hours.push_back(dispatch::build_residual_steps(rivals[h], demand[h], cfg.fringe_cost,
                                                            thermal_cap[h] + hydro_cap, cfg.demand_steps));
      }
      const auto sol = dispatch::solve_daily(prob);
      for (std::size_t h = 0; h < H; ++h) {
        const auto& d = sol.hours[h];
        res.records.push_back({w, static_cast<int>(h), d.price, d.hydro, d.thermal, state.stock, false});
      }
      released = cfg.days_per_period * sol.total_hydro;
    } catch (const Error& e) {
      if (fail_fast) {
        throw NumericError(fmt::format("week {}: {}", w, e.what()));
      }
      res.failures.push_back({w, e.what()});
      for (std::size_t h = 0; h < H; ++h) {
        res.records.push_back({w, static_cast<int>(h), std::nan(""), 0.0, 0.0, state.stock, true});
      }
    }

    const double inflow = draws.inflows[static_cast<std::size_t>(w)];
    const auto upd = hydro::water_update(state, released, inflow);
    state = upd.state;
    res.released.push_back(released);
    res.spilled.push_back(upd.spilled);
    res.stock_path.push_back(state.stock);
    history.push_back(inflow);
  }
  return res;
}

HorizonResult simulate_horizon(const SimulationConfig& cfg, bool fail_fast) {
  return simulate_horizon(cfg, draw_realization(cfg), fail_fast);
}

std::string records_to_csv(const HorizonResult& result) {
  using io::format_number;
  std::string out = "week,hour,price,hydro,thermal,water_stock\n";
  for (const auto& r : result.records) {
    out += fmt::format("{},{},{},{},{},{}\n", r.week, r.hour, r.failed ? "nan" : format_number(r.price),
                       format_number(r.hydro), format_number(r.thermal), format_number(r.water_stock));
  }
  return out;
}

FitStatistics compare_prices(const HorizonResult& result,
                             const std::vector<std::array<double, 3>>& observed) {
  std::map<std::pair<int, int>, double> sim;
  for (const auto& r : result.records) {
    if (!r.failed) sim[{r.week, r.hour}] = r.price;
  }
  std::vector<std::pair<double, double>> pairs;
  for (const auto& [week, hour, price] : observed) {
    const auto it = sim.find({static_cast<int>(week), static_cast<int>(hour)});
    if (it != sim.end()) pairs.emplace_back(it->second, price);
  }
  FitStatistics st;
  st.matched = pairs.size();
  if (pairs.empty()) throw ValidationError("observed prices: no (week, hour) overlaps the simulation");
  const double n = static_cast<double>(pairs.size());
  double se = 0.0;
  for (const auto& [s, o] : pairs) {
    st.mean_simulated += s / n;
    st.mean_observed += o / n;
    st.mean_abs_error += std::abs(s - o) / n;
    se += (s - o) * (s - o);
  }
  st.rmse = std::sqrt(se / n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& [s, o] : pairs) {
    sxy += (s - st.mean_simulated) * (o - st.mean_observed);
    sxx += (s - st.mean_simulated) * (s - st.mean_simulated);
    syy += (o - st.mean_observed) * (o - st.mean_observed);
  }
  st.correlation = sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : std::nan("");
  return st;
}

}  // namespace sfelab::sim
