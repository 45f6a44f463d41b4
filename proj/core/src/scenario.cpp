#include "sfelab/scenario.hpp"

#include <cmath>
#include <functional>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "sfelab/bid_io.hpp"
#include "sfelab/csv.hpp"
#include "sfelab/error.hpp"
#include "sfelab/inflow.hpp"

namespace sfelab::scenario {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Collects every violation instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  const json* child(const json& obj, const std::string& key, const std::string& path, bool required) {
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) {
      if (required) fail(join(path, key), "required");
      return nullptr;
    }
    return &obj.at(key);
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                               bool required = true) {
    const json* v = child(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_number() || !std::isfinite(v->get<double>())) {
      fail(join(path, key), "must be a finite number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  double nonneg(const json& obj, const std::string& key, const std::string& path, double fallback,
                bool required = true) {
    const auto v = number(obj, key, path, required);
    if (!v) return fallback;
    if (*v < 0.0) fail(join(path, key), fmt::format("must be >= 0 (got {})", *v));
    return *v;
  }

  std::optional<long> integer(const json& obj, const std::string& key, const std::string& path,
                              bool required = true) {
    const json* v = child(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(join(path, key), "must be an integer");
      return std::nullopt;
    }
    return v->get<long>();
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path,
                                    bool required = true) {
    const json* v = child(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_string() || v->get<std::string>().empty()) {
      fail(join(path, key), "must be a non-empty string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::vector<double> numbers(const json& v, const std::string& path) {
    std::vector<double> out;
    if (!v.is_array()) {
      fail(path, "must be an array of numbers");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(fmt::format("{}[{}]", path, i), "must be a finite number");
        out.push_back(0.0);
      } else {
        out.push_back(v[i].get<double>());
      }
    }
    return out;
  }

  /// Either one number (same every hour) or 24 numbers.
  sim::HourArray hourly(const json& v, const std::string& path) {
    sim::HourArray out{};
    if (v.is_number()) {
      out.fill(v.get<double>());
    } else {
      const auto xs = numbers(v, path);
      if (xs.size() != out.size()) {
        if (v.is_array()) fail(path, fmt::format("need 24 hourly values (got {})", xs.size()));
      } else {
        std::copy(xs.begin(), xs.end(), out.begin());
      }
    }
    for (std::size_t h = 0; h < out.size(); ++h) {
      if (!std::isfinite(out[h]) || out[h] < 0.0) fail(fmt::format("{}[{}]", path, h), "must be >= 0");
    }
    return out;
  }
};

market::CostLadder read_ladder(Reader& r, const json& v, const std::string& path) {
  market::CostLadder l;
  if (v.is_array()) {
    const auto xs = r.numbers(v, path);
    if (xs.size() != 3) {
      r.fail(path, "need [c_low, c_high, c_fringe]");
      return l;
    }
    l = {xs[0], xs[1], xs[2]};
  } else {
    l.c_low = r.number(v, "c_low", path).value_or(NAN);
    l.c_high = r.number(v, "c_high", path).value_or(NAN);
    l.c_fringe = r.number(v, "c_fringe", path).value_or(NAN);
  }
  if (std::isfinite(l.c_low) && l.c_low < 0.0) r.fail(join(path, "c_low"), "must be >= 0");
  if (std::isfinite(l.c_low) && std::isfinite(l.c_high) && !(l.c_high > l.c_low)) {
    r.fail(join(path, "c_high"), fmt::format("must exceed c_low ({} <= {})", l.c_high, l.c_low));
  }
  if (std::isfinite(l.c_high) && std::isfinite(l.c_fringe) && !(l.c_high < l.c_fringe)) {
    r.fail(join(path, "c_high"), fmt::format("must be below c_fringe ({} >= {})", l.c_high, l.c_fringe));
  }
  return l;
}

market::TechnologyPortfolio read_portfolio(Reader& r, const json& v, const std::string& path) {
  market::TechnologyPortfolio p;
  const auto xs = r.numbers(v, path);
  if (v.is_array() && xs.size() != 3) {
    r.fail(path, "need [k_low, k_high, k_fringe]");
    return p;
  }
  if (xs.size() == 3) p = {xs[0], xs[1], xs[2]};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < 0.0) r.fail(fmt::format("{}[{}]", path, i), "must be >= 0");
  }
  return p;
}

double read_demand_scalar(Reader& r, const json& obj, const std::string& path) {
  const json* v = r.child(obj, "demand", path, true);
  if (!v) return 0.0;
  if (!v->is_number()) {
    r.fail(join(path, "demand"), "must be a number");
    return 0.0;
  }
  const double d = v->get<double>();
  if (!std::isfinite(d) || d < 0.0) r.fail(join(path, "demand"), "must be >= 0");
  return d;
}

std::vector<double> read_deltas(Reader& r, const json& obj, const std::string& path) {
  const json* v = r.child(obj, "deltas", path, false);
  if (!v) return {0.0};
  auto xs = r.numbers(*v, join(path, "deltas"));
  if (xs.empty()) r.fail(join(path, "deltas"), "must not be empty");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < 0.0) r.fail(fmt::format("{}[{}]", join(path, "deltas"), i), "must be >= 0");
  }
  return xs;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<market::UnitBid> read_inline_bids(Reader& r, const json& v, const std::string& path) {
  std::vector<market::UnitBid> out;
  if (!v.is_array() || v.empty()) {
    r.fail(path, "must be a non-empty array");
    return out;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = fmt::format("{}[{}]", path, i);
    const json& e = v[i];
    market::UnitBid b;
    b.unit_id = r.string(e, "unit_id", p).value_or("");
    b.firm_id = r.string(e, "firm_id", p).value_or("");
    if (auto t = r.string(e, "technology", p)) {
      try {
        b.technology = market::technology_from_string(*t);
      } catch (const ValidationError&) {
        r.fail(join(p, "technology"), fmt::format("unknown technology '{}'", *t));
      }
    }
    b.price_bid = r.number(e, "price", p).value_or(0.0);
    b.capacity = r.nonneg(e, "capacity", p, 0.0);
    if (const json* q = r.child(e, "quantity", p, true)) {
      b.hourly_quantities = r.hourly(*q, join(p, "quantity"));
    }
    if (const json* hs = r.child(e, "hours", p, false)) {
      for (double h : r.numbers(*hs, join(p, "hours"))) {
        if (h < 0 || h >= market::kHoursPerDay || h != std::floor(h)) {
          r.fail(join(p, "hours"), fmt::format("hour {} outside 0-23", h));
        } else {
          b.bids_in_hour.set(static_cast<std::size_t>(h));
        }
      }
    } else {
      b.bids_in_hour.set();
    }
    for (int h = 0; h < market::kHoursPerDay; ++h) {
      if (b.hourly_quantities[static_cast<std::size_t>(h)] > b.capacity) {
        r.fail(join(p, "quantity"), fmt::format("hour {} quantity exceeds capacity {}", h, b.capacity));
        break;
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

void read_inflow(Reader& r, const json& v, const std::string& path, const std::filesystem::path& base,
                 const std::string& leader, sim::SimulationConfig& cfg) {
  auto family = hydro::DensityFamily::normal;
  if (auto f = r.string(v, "family", path, false)) {
    try {
      family = hydro::density_family_from_string(*f);
    } catch (const ValidationError&) {
      r.fail(join(path, "family"), fmt::format("unknown family '{}'", *f));
    }
  }
  const json* model = r.child(v, "model", path, false);
  const json* series = r.child(v, "series", path, false);
  const json* series_csv = r.child(v, "series_csv", path, false);
  if ((model != nullptr) + (series != nullptr) + (series_csv != nullptr) != 1) {
    r.fail(path, "exactly one of model, series or series_csv is required");
    return;
  }
  if (model) {
    const std::string mp = join(path, "model");
    auto& m = cfg.inflow;
    m.intercept = r.number(*model, "intercept", mp).value_or(0.0);
    if (const json* c = r.child(*model, "coefficients", mp, true)) {
      m.lag_coefficients = r.numbers(*c, join(mp, "coefficients"));
      if (m.lag_coefficients.empty()) r.fail(join(mp, "coefficients"), "need at least one lag");
    }
    m.lag_order = std::max<int>(1, static_cast<int>(m.lag_coefficients.size()));
    if (m.lag_coefficients.empty()) m.lag_coefficients.assign(1, 0.0);
    m.residual_sd = r.nonneg(*model, "residual_sd", mp, 0.0);
    double sum = 0.0;
    for (double c : m.lag_coefficients) sum += std::abs(c);
    if (sum >= 1.0) r.fail(join(mp, "coefficients"), "sum of |coefficients| must be < 1 (stationarity)");
    m.stationary = sum < 1.0;
    m.degenerate = m.residual_sd == 0.0;
    if (const json* h = r.child(v, "history", path, false)) cfg.inflow_history = r.numbers(*h, join(path, "history"));
    return;
  }
  std::vector<double> xs;
  if (series) {
    xs = r.numbers(*series, join(path, "series"));
  } else if (series_csv->is_string()) {
    try {
      const auto all = hydro::read_inflow_csv(resolve(base, series_csv->get<std::string>()));
      const auto it = all.find(leader);
      if (it == all.end()) {
        r.fail(join(path, "series_csv"), fmt::format("no rows for firm '{}'", leader));
        return;
      }
      xs = it->second;
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      r.fail(join(path, "series_csv"), e.what());
      return;
    }
  } else {
    r.fail(join(path, "series_csv"), "must be a path");
    return;
  }
  const int lag = static_cast<int>(r.integer(v, "lag_order", path, false).value_or(1));
  if (!r.errors.empty()) return;
  try {
    cfg.inflow = hydro::fit_inflow_model(xs, lag, family);
    cfg.inflow_history = xs;
  } catch (const Error& e) {
    r.fail(path, e.what());
  }
}

SimulationSection read_simulation(Reader& r, const json& v, const std::filesystem::path& base,
                                  std::optional<market::CostLadder> ladder) {
  const std::string path = "simulation";
  SimulationSection s;
  auto& c = s.config;
  c.leader = r.string(v, "leader", path).value_or("");

  const json* bids = r.child(v, "bids", path, false);
  const json* bids_csv = r.child(v, "bids_csv", path, false);
  if ((bids != nullptr) == (bids_csv != nullptr)) {
    r.fail(join(path, "bids"), "exactly one of bids or bids_csv is required");
  } else if (bids) {
    c.bids = read_inline_bids(r, *bids, join(path, "bids"));
  } else if (!bids_csv->is_string()) {
    r.fail(join(path, "bids_csv"), "must be a path");
  } else {
    try {
      c.bids = io::read_bids(resolve(base, bids_csv->get<std::string>()));
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      r.fail(join(path, "bids_csv"), e.what());
    }
  }
  if (!c.leader.empty() && !c.bids.empty() &&
      std::none_of(c.bids.begin(), c.bids.end(), [&](const auto& b) { return b.firm_id == c.leader; })) {
    r.fail(join(path, "leader"), fmt::format("firm '{}' owns no unit", c.leader));
  }
  {
    std::set<std::string> ids;
    for (const auto& b : c.bids) {
      if (!b.unit_id.empty() && !ids.insert(b.unit_id).second) {
        r.fail(join(path, "bids"), fmt::format("duplicate unit_id '{}'", b.unit_id));
      }
    }
  }

  if (const json* d = r.child(v, "demand", path, true)) {
    const std::string dp = join(path, "demand");
    int sources = 0;
    if (d->is_object()) {
      if (d->contains("constant")) {
        ++sources;
        c.demand.kind = sim::DemandSpec::Kind::constant;
        if (!(*d)["constant"].is_number()) {
          r.fail(join(dp, "constant"), "must be a number");
        } else {
          c.demand.mean = r.hourly((*d)["constant"], join(dp, "constant"));
        }
      }
      if (d->contains("hourly")) {
        ++sources;
        c.demand.kind = sim::DemandSpec::Kind::hourly;
        c.demand.mean = r.hourly((*d)["hourly"], join(dp, "hourly"));
      }
      if (d->contains("stochastic")) {
        ++sources;
        const std::string sp = join(dp, "stochastic");
        const json& st = (*d)["stochastic"];
        c.demand.kind = sim::DemandSpec::Kind::stochastic;
        if (const json* m = r.child(st, "mean", sp, true)) c.demand.mean = r.hourly(*m, join(sp, "mean"));
        c.demand.sd = r.nonneg(st, "sd", sp, 0.0);
      }
    }
    if (sources != 1) r.fail(dp, "exactly one of constant, hourly or stochastic is required");
  }

  if (const json* f = r.child(v, "fringe", path, false)) {
    c.fringe_cost = r.number(*f, "cost", join(path, "fringe")).value_or(0.0);
    s.fringe_capacity = r.nonneg(*f, "capacity", join(path, "fringe"), 1e300, false);
  } else if (ladder) {
    c.fringe_cost = ladder->c_fringe;
    s.fringe_capacity = 1e300;
  } else {
    r.fail(join(path, "fringe"), "required when no ladder is given");
  }

  if (const json* lc = r.child(v, "leader_costs", path, true)) {
    c.thermal_cost = r.number(*lc, "thermal", join(path, "leader_costs")).value_or(0.0);
    c.hydro_cost = r.number(*lc, "hydro", join(path, "leader_costs"), false).value_or(0.0);
  }

  if (const json* h = r.child(v, "hydro", path, true)) {
    const std::string hp = join(path, "hydro");
    c.hydro.stock = r.nonneg(*h, "stock", hp, 0.0);
    c.hydro.lower_bound = r.nonneg(*h, "lower", hp, 0.0, false);
    c.hydro.upper_bound = r.nonneg(*h, "upper", hp, 0.0);
    if (c.hydro.upper_bound < c.hydro.lower_bound) r.fail(join(hp, "upper"), "must be >= lower");
    if (c.hydro.stock < c.hydro.lower_bound || c.hydro.stock > c.hydro.upper_bound) {
      r.fail(join(hp, "stock"), "must lie within [lower, upper]");
    }
  }

  if (const json* in = r.child(v, "inflow", path, true)) {
    read_inflow(r, *in, join(path, "inflow"), base, c.leader, c);
  }

  if (const json* vs = r.child(v, "value_spline", path, false)) {
    const std::string vp = join(path, "value_spline");
    std::vector<double> knots, gammas;
    if (const json* k = r.child(*vs, "knots", vp, true)) knots = r.numbers(*k, join(vp, "knots"));
    if (const json* g = r.child(*vs, "gammas", vp, true)) gammas = r.numbers(*g, join(vp, "gammas"));
    try {
      c.value = hydro::ValueSpline(knots, gammas);
    } catch (const Error& e) {
      r.fail(vp, e.what());
    }
  }

  if (const json* g = r.child(v, "grid", path, false)) {
    const std::string gp = join(path, "grid");
    for (auto [key, dst] : {std::pair{"G", &c.supply_steps}, {"Z", &c.demand_steps}, {"M", &c.value_steps}}) {
      if (auto n = r.integer(*g, key, gp, false)) {
        if (*n < 2) r.fail(join(gp, key), "must be >= 2");
        *dst = static_cast<int>(*n);
      }
    }
  }
  if (auto w = r.integer(v, "weeks", path, false)) {
    if (*w < 1) r.fail(join(path, "weeks"), "must be >= 1");
    c.weeks = static_cast<int>(*w);
  }
  if (auto d = r.integer(v, "days_per_period", path, false)) {
    if (*d < 1) r.fail(join(path, "days_per_period"), "must be >= 1");
    c.days_per_period = static_cast<int>(*d);
  }
  if (const json* sc = r.child(v, "scarcity", path, false)) {
    c.scarcity.price = r.number(*sc, "price", join(path, "scarcity")).value_or(INFINITY);
    c.scarcity.quantity = r.nonneg(*sc, "quantity", join(path, "scarcity"), 0.0);
  }
  if (const json* ct = r.child(v, "contracts", path, false)) {
    const auto h = r.hourly(*ct, join(path, "contracts"));
    c.contracts.assign(h.begin(), h.end());
  }
  if (const json* sm = r.child(v, "smoothing", path, false)) {
    const std::string sp = join(path, "smoothing");
    if (auto b = r.number(*sm, "bandwidth", sp, false)) {
      if (!(*b > 0.0)) r.fail(join(sp, "bandwidth"), "must be > 0");
      s.bandwidth = *b;
    }
    if (auto f = r.number(*sm, "fraction", sp, false)) {
      if (!(*f > 0.0)) r.fail(join(sp, "fraction"), "must be > 0");
      s.bandwidth_fraction = *f;
    }
  }
  if (const json* t = r.child(v, "transfer", path, false)) {
    const std::string tp = join(path, "transfer");
    if (auto m = r.string(*t, "capacity_mode", tp, false)) {
      try {
        s.capacity_mode = cf::capacity_mode_from_string(*m);
      } catch (const ValidationError& e) {
        r.fail(join(tp, "capacity_mode"), e.what());
      }
    }
    if (auto src = r.string(*t, "source", tp, false)) {
      try {
        s.source = cf::source_set_from_string(*src);
      } catch (const ValidationError& e) {
        r.fail(join(tp, "source"), e.what());
      }
    }
  }
  if (auto o = r.string(v, "observed_prices_csv", path, false)) s.observed_prices = resolve(base, *o);

  if (r.errors.empty()) {
    try {
      c.validate();
    } catch (const ValidationError& e) {
      r.fail(path, e.what());
    }
  }
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                        const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: invalid JSON: {}", source_name, e.what()));
  }
  if (!doc.is_object()) throw ValidationError(fmt::format("{}: top level must be an object", source_name));

  Reader r;
  Scenario sc;
  sc.name = r.string(doc, "name", "", false).value_or("");
  if (const json* s = r.child(doc, "seed", "", false)) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
      r.fail("seed", "must be a non-negative integer");
    } else {
      sc.seed = s->get<std::uint64_t>();
    }
  }
  if (const json* l = r.child(doc, "ladder", "", false)) sc.ladder = read_ladder(r, *l, "ladder");

  if (doc.contains("k1") || doc.contains("k2")) {
    AnalyticSection a;
    if (const json* k = r.child(doc, "k1", "", true)) a.k1 = read_portfolio(r, *k, "k1");
    if (const json* k = r.child(doc, "k2", "", true)) a.k2 = read_portfolio(r, *k, "k2");
    a.demand = read_demand_scalar(r, doc, "");
    a.deltas = read_deltas(r, doc, "");
    if (!sc.ladder) r.fail("ladder", "required for the duopoly section");
    sc.analytic = a;
  }
  if (const json* s = r.child(doc, "symmetric", "", false)) {
    SymmetricSection sy;
    sy.k_low = r.nonneg(*s, "k_low", "symmetric", 0.0);
    sy.k_high = r.nonneg(*s, "k_high", "symmetric", 0.0);
    sy.demand = read_demand_scalar(r, *s, "symmetric");
    sy.deltas = read_deltas(r, *s, "symmetric");
    if (!sc.ladder) r.fail("ladder", "required for the symmetric section");
    sc.symmetric = sy;
  }
  if (const json* s = r.child(doc, "simulation", "", false)) {
    sc.simulation = read_simulation(r, *s, base_dir, sc.ladder);
    sc.simulation->config.seed = sc.seed;
  }
  if (const json* c = r.child(doc, "concentration", "", false)) {
    const json* firms = r.child(*c, "firms", "concentration", true);
    if (firms && (!firms->is_array() || firms->empty())) {
      r.fail("concentration.firms", "must be a non-empty array");
    } else if (firms) {
      for (std::size_t i = 0; i < firms->size(); ++i) {
        const std::string p = fmt::format("concentration.firms[{}]", i);
        cf::FirmPosition f;
        f.firm_id = r.string((*firms)[i], "firm_id", p).value_or("");
        f.capacity = r.nonneg((*firms)[i], "capacity", p, 0.0);
        if (auto fc = r.string((*firms)[i], "forecast", p, false)) {
          try {
            f.forecast = hydro::forecast_class_from_string(*fc);
          } catch (const ValidationError&) {
            r.fail(join(p, "forecast"), fmt::format("unknown class '{}'", *fc));
          }
        }
        sc.concentration.push_back(f);
      }
    }
  }
  if (!sc.analytic && !sc.symmetric && !sc.simulation && sc.concentration.empty()) {
    if (!doc.contains("concentration")) r.fail("", "no duopoly, symmetric, simulation or concentration section");
  }

  if (!r.errors.empty()) {
    std::string msg = fmt::format("{}: {} problem(s)", source_name, r.errors.size());
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  auto sc = parse_scenario(text, path.parent_path(), path.string());
  sc.source = path;
  return sc;
}

std::vector<std::array<double, 3>> read_observed_prices(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  const auto cw = table.column("week");
  const auto ch = table.column("hour");
  const auto cp = table.column("price");
  std::vector<std::array<double, 3>> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string ctx = fmt::format("{} row {}", path.string(), i + 2);
    const auto& row = table.rows[i];
    out.push_back({static_cast<double>(io::parse_integer(row[cw], ctx + " week")),
                   static_cast<double>(io::parse_integer(row[ch], ctx + " hour")),
                   io::parse_number(row[cp], ctx + " price")});
  }
  return out;
}

}  // namespace sfelab::scenario
