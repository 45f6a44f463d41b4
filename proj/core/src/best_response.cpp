#include "sfelab/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "sfelab/error.hpp"

namespace sfelab::dispatch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double tie_tolerance(double v) { return 1e-12 * (1.0 + std::abs(v)); }

}  // namespace

void ResidualSteps::validate() const {
  if (steps.empty()) throw ValidationError("residual demand: at least one step required");
  for (std::size_t z = 0; z < steps.size(); ++z) {
    const auto& s = steps[z];
    if (!std::isfinite(s.price) || !std::isfinite(s.quantity) || s.quantity < 0.0) {
      throw ValidationError("residual demand: steps need finite price and quantity >= 0");
    }
    if (z > 0) {
      if (s.price > steps[z - 1].price) {
        throw ValidationError("residual demand: prices must be non-increasing");
      }
      if (!(s.quantity > steps[z - 1].quantity)) {
        throw ValidationError("residual demand: quantities must be strictly increasing");
      }
    }
  }
}

std::size_t ResidualSteps::index_for(double q) const {
  if (!std::isfinite(q) || q < 0.0) {
    throw ValidationError(fmt::format("dispatch must be >= 0 (got {})", q));
  }
  const double tol = 1e-12 * std::max(1.0, max_quantity());
  for (std::size_t z = 0; z < steps.size(); ++z) {
    if (steps[z].quantity >= q - tol) return z;
  }
  throw InfeasibleQuantityError(q, max_quantity());
}

ResidualSteps build_residual_steps(std::span<const market::FirmSchedule> rivals, double demand,
                                   double fringe_cost, double leader_capacity, int max_steps) {
  if (max_steps < 2) throw ValidationError("grid.Z: must be >= 2");
  if (!std::isfinite(demand) || demand < 0.0) throw ValidationError("demand must be >= 0");
  std::set<double> prices;
  for (const auto& fs : rivals) {
    for (const auto& bp : fs.schedule.breakpoints()) {
      if (bp.price < fringe_cost) prices.insert(bp.price);
    }
  }
  prices.insert(fringe_cost);

  auto below = [&](double p) {
    double s = 0.0;
    for (const auto& fs : rivals) s += fs.schedule.evaluate_below(p);
    return s;
  };
  auto at = [&](double p) {
    double s = 0.0;
    for (const auto& fs : rivals) s += fs.schedule.evaluate(p);
    return s;
  };

  const double tol = 1e-12 * std::max(1.0, demand);
  // Ascending in price: (price, largest dispatch clearing at that price).
  std::vector<DemandStep> asc;
  double top_price = fringe_cost;
  for (double p : prices) {
    const double q = demand - below(p);
    if (q > tol) asc.push_back({p, q});
    if (p < fringe_cost && at(p) >= demand - tol) {
      top_price = p;
      break;
    }
  }

  std::vector<DemandStep> desc;
  desc.push_back({top_price, 0.0});
  for (auto it = asc.rbegin(); it != asc.rend(); ++it) {
    if (it->quantity <= desc.back().quantity + tol) continue;
    if (it->quantity > leader_capacity + tol) {
      // Largest dispatch the leader can reach at this price, if any.
      const double lowest = demand - at(it->price);
      if (lowest <= leader_capacity + tol && leader_capacity > desc.back().quantity + tol) {
        desc.push_back({it->price, leader_capacity});
      }
      break;
    }
    desc.push_back(*it);
  }

  ResidualSteps out;
  const auto n = desc.size();
  const auto keep = static_cast<std::size_t>(max_steps);
  if (n <= keep) {
    out.steps = std::move(desc);
  } else {
    std::size_t last = n;
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t idx = (i * (n - 1) + (keep - 1) / 2) / (keep - 1);
      if (idx != last) out.steps.push_back(desc[idx]);
      last = idx;
    }
  }
  out.validate();
  return out;
}

double gross_revenue(const ResidualSteps& rd, double dispatch, double contract_quantity,
                     const ScarcityCharge& scarcity) {
  const double p = rd.price_at(dispatch);
  double r = p * dispatch - p * contract_quantity;
  if (p > scarcity.price) r += (scarcity.price - p) * scarcity.quantity;
  return r;
}

void DailyProblem::validate() const {
  if (hours.empty()) throw ValidationError("daily problem: no hours");
  for (const auto& h : hours) h.validate();
  if (!contract_quantity.empty() && contract_quantity.size() != hours.size()) {
    throw ValidationError("contracts: need one quantity per hour");
  }
  if (thermal_capacity.size() != hours.size()) {
    throw ValidationError("thermal capacity: need one value per hour");
  }
  for (double k : thermal_capacity) {
    if (!std::isfinite(k) || k < 0.0) throw ValidationError("thermal capacity must be >= 0");
  }
  if (!std::isfinite(hydro_capacity) || hydro_capacity < 0.0) {
    throw ValidationError("hydro capacity must be >= 0");
  }
  if (supply_steps < 2) throw ValidationError("grid.G: must be >= 2");
  if (value_steps < 2) throw ValidationError("grid.M: must be >= 2");
  if (days_per_period < 1) throw ValidationError("days_per_period: must be >= 1");
  if (!std::isfinite(thermal_cost) || !std::isfinite(hydro_cost)) {
    throw ValidationError("costs must be finite");
  }
  state.validate();
  if (water_budget && (!std::isfinite(*water_budget) || *water_budget < 0.0)) {
    throw ValidationError("water budget must be >= 0");
  }
}

double DailyProblem::packet() const { return hydro_capacity / supply_steps; }

int DailyProblem::max_packets() const {
  const double u = packet();
  if (!(u > 0.0)) return 0;
  // The day repeats, so the stock has to cover days_per_period releases.
  const double usable = state.usable() / days_per_period;
  const double budget = water_budget ? std::min(*water_budget, usable) : usable;
  const double n = std::floor(budget / u * (1.0 + 1e-12) + 1e-12);
  const int cap = static_cast<int>(hours.size()) * supply_steps;
  return std::clamp(static_cast<int>(std::max(n, 0.0)), 0, cap);
}

double ContinuationTable::operator()(double x) const {
  if (release.size() == 1) return value.front();
  if (x <= release.front()) return value.front();
  if (x >= release.back()) return value.back();
  const auto it = std::upper_bound(release.begin(), release.end(), x);
  const auto i = static_cast<std::size_t>(it - release.begin());
  const double w = (x - release[i - 1]) / (release[i] - release[i - 1]);
  return value[i - 1] + w * (value[i] - value[i - 1]);
}

ContinuationTable continuation_table(const DailyProblem& prob) {
  ContinuationTable t;
  const double xmax = prob.max_packets() * prob.packet();
  const int nodes = xmax > 0.0 ? prob.value_steps + 1 : 1;
  for (int m = 0; m < nodes; ++m) {
    const double x = nodes == 1 ? 0.0 : xmax * m / prob.value_steps;
    const double after = prob.state.stock - prob.days_per_period * x;
    double v = 0.0;
    if (prob.value) {
      v = prob.inflow ? hydro::expected_value(*prob.value, *prob.inflow, after)
                      : prob.value->value(after + prob.expected_inflow);
    }
    t.release.push_back(x);
    t.value.push_back(v);
  }
  return t;
}

double hour_profit(const DailyProblem& prob, std::size_t hour, std::size_t step, int packets) {
  const auto& s = prob.hours[hour].steps[step];
  const double x = packets * prob.packet();
  double y = s.quantity - x;
  const double tol = 1e-12 * std::max(1.0, s.quantity);
  if (y < -tol || y > prob.thermal_capacity[hour] + tol) return kNegInf;
  y = std::clamp(y, 0.0, prob.thermal_capacity[hour]);
  double r = s.price * s.quantity - s.price * prob.contract(hour);
  if (s.price > prob.scarcity.price) r += (prob.scarcity.price - s.price) * prob.scarcity.quantity;
  return r - prob.thermal_cost * y - prob.hydro_cost * x;
}

double evaluate_plan(const DailyProblem& prob, const ContinuationTable& cont,
                     std::span<const std::pair<std::size_t, int>> plan) {
  if (plan.size() != prob.hours.size()) throw ValidationError("plan must cover every hour");
  double total = 0.0;
  int packets = 0;
  for (std::size_t h = 0; h < plan.size(); ++h) {
    const auto [z, g] = plan[h];
    if (z >= prob.hours[h].steps.size() || g < 0 || g > prob.supply_steps) return kNegInf;
    const double p = hour_profit(prob, h, z, g);
    if (p == kNegInf) return kNegInf;
    total += p;
    packets += g;
  }
  if (packets > prob.max_packets()) return kNegInf;
  return prob.days_per_period * total + cont(packets * prob.packet());
}

DailySolution solve_daily(const DailyProblem& prob) {
  prob.validate();
  const std::size_t H = prob.hours.size();
  const int G = prob.packet() > 0.0 ? prob.supply_steps : 0;
  const int K = prob.max_packets();
  const auto cont = continuation_table(prob);

  // Best step per (hour, packets).
  std::vector<std::vector<double>> best_val(H, std::vector<double>(G + 1, kNegInf));
  std::vector<std::vector<std::size_t>> best_step(H, std::vector<std::size_t>(G + 1, 0));
  std::vector<std::size_t> infeasible;
  for (std::size_t h = 0; h < H; ++h) {
    bool any = false;
    for (int g = 0; g <= G; ++g) {
      for (std::size_t z = 0; z < prob.hours[h].steps.size(); ++z) {
        const double v = hour_profit(prob, h, z, g);
        if (v > best_val[h][g]) {
          best_val[h][g] = v;
          best_step[h][g] = z;
        }
      }
      if (g <= K && best_val[h][g] > kNegInf) any = true;
    }
    if (!any) infeasible.push_back(h);
  }
  if (!infeasible.empty()) {
    std::string list;
    for (auto h : infeasible) list += (list.empty() ? "" : ",") + std::to_string(h);
    throw ValidationError(fmt::format("no feasible dispatch in hours [{}]", list));
  }

  // f[h+1][k]: best profit over hours 0..h using exactly k packets.
  std::vector<std::vector<double>> f(H + 1, std::vector<double>(K + 1, kNegInf));
  f[0][0] = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    for (int k = 0; k <= K; ++k) {
      double best = kNegInf;
      for (int g = 0; g <= std::min(G, k); ++g) {
        if (f[h][k - g] == kNegInf || best_val[h][g] == kNegInf) continue;
        best = std::max(best, f[h][k - g] + best_val[h][g]);
      }
      f[h + 1][k] = best;
    }
  }

  int k_best = -1;
  double obj_best = kNegInf;
  for (int k = 0; k <= K; ++k) {
    if (f[H][k] == kNegInf) continue;
    const double v = prob.days_per_period * f[H][k] + cont(k * prob.packet());
    if (k_best < 0 || v > obj_best + tie_tolerance(obj_best)) {
      k_best = k;
      obj_best = v;
    }
  }
  if (k_best < 0) throw ValidationError("no feasible daily plan within the water budget");

  std::vector<std::pair<std::size_t, int>> plan(H);
  int k = k_best;
  for (std::size_t h = H; h-- > 0;) {
    const double target = f[h + 1][k];
    int chosen = -1;
    for (int g = 0; g <= std::min(G, k); ++g) {
      if (f[h][k - g] == kNegInf || best_val[h][g] == kNegInf) continue;
      if (f[h][k - g] + best_val[h][g] >= target - tie_tolerance(target)) {
        chosen = g;
        break;
      }
    }
    plan[h] = {best_step[h][chosen], chosen};
    k -= chosen;
  }

  DailySolution sol;
  const double u = prob.packet();
  int packets = 0;
  for (std::size_t h = 0; h < H; ++h) {
    const auto [z, g] = plan[h];
    const auto& s = prob.hours[h].steps[z];
    HourDispatch d;
    d.step = z;
    d.packets = g;
    d.price = s.price;
    d.dispatch = s.quantity;
    d.hydro = g * u;
    d.thermal = std::clamp(s.quantity - d.hydro, 0.0, prob.thermal_capacity[h]);
    sol.spot_profit += hour_profit(prob, h, z, g);
    sol.hours.push_back(d);
    packets += g;
  }
  sol.total_hydro = packets * u;
  sol.continuation = cont(sol.total_hydro);
  sol.objective = prob.days_per_period * sol.spot_profit + sol.continuation;
  sol.next_state = prob.state;
  sol.next_state.stock = std::max(prob.state.stock - prob.days_per_period * sol.total_hydro,
                                  prob.state.lower_bound);
  return sol;
}

FocBreakdown foc_residual(const FocInputs& in) {
  using market::Technology;
  const auto d = smoothing::smoothed_derivatives(in.bids, in.hour, in.price, in.smoothing, in.firm_id,
                                                 in.unit_id);
  const double total = smoothing::smoothed_supply(in.bids, in.hour, in.price, in.smoothing);
  const double own = smoothing::smoothed_firm_supply(in.bids, in.hour, in.price, in.smoothing, in.firm_id);
  const double residual_demand = in.demand - (total - own);

  FocBreakdown out;
  out.dp_dq = d.dp_dq;
  double obligations = in.contract_quantity;
  if (in.price > in.scarcity.price) obligations += in.scarcity.quantity;
  out.marginal_revenue = (in.price * d.dDR_dp + residual_demand) * d.dp_dq - obligations * d.dp_dq;

  auto x_of = [&](Technology t) {
    const auto& tt = d.tech(t);
    return tt.dS_dq + tt.dS_dp * d.dp_dq;
  };
  out.x_hydro = x_of(Technology::hydro);
  out.x_thermal = x_of(Technology::thermal) + x_of(Technology::fringe);
  out.x_rival_hydro = d.rival_hydro_dp;

  if (in.value) {
    if (in.inflow) {
      out.marginal_water_value = hydro::marginal_water_value(*in.value, *in.inflow, in.state, in.hydro_supply);
    } else {
      // Deterministic inflow at zero: d/dS V(w - S).
      const double w = in.state.stock - in.hydro_supply;
      const double h = 1e-6 * std::max(1.0, std::abs(w));
      out.marginal_water_value = -(in.value->value(w + h) - in.value->value(w - h)) / (2.0 * h);
    }
  }
  out.residual = out.marginal_revenue - out.x_thermal * in.thermal_cost - out.x_hydro * in.hydro_cost +
                 out.x_hydro * out.marginal_water_value;
  return out;
}

namespace {

double period_profit(const TwoPeriodInstance& inst, double hydro, double thermal_capacity) {
  const double q = std::clamp((inst.a - inst.thermal_cost) / inst.b - hydro, 0.0, thermal_capacity);
  const double total = hydro + q;
  return inst.a * total - 0.5 * inst.b * total * total - inst.thermal_cost * q - inst.hydro_cost * hydro;
}

}  // namespace

double TwoPeriodInstance::value(double water, double thermal_capacity) const {
  if (!(b > 0.0)) throw ValidationError("two-period instance: b must be > 0 for strict concavity");
  if (water < 0.0 || thermal_capacity < 0.0) throw ValidationError("water and capacity must be >= 0");
  auto total = [&](double h1) {
    return period_profit(*this, h1, thermal_capacity) +
           period_profit(*this, water - h1 + inflow, thermal_capacity);
  };
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0;
  double hi = water;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = total(x1);
  double f2 = total(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, water); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = total(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = total(x1);
    }
  }
  return std::max({total(0.5 * (lo + hi)), total(0.0), total(water)});
}

double TwoPeriodInstance::cross_partial(double water, double thermal_capacity, double step) const {
  const double s = step;
  return (value(water + s, thermal_capacity + s) - value(water + s, thermal_capacity - s) -
          value(water - s, thermal_capacity + s) + value(water - s, thermal_capacity - s)) /
         (4.0 * s * s);
}

}  // namespace sfelab::dispatch
