#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sfelab/analytic_sfe.hpp"
#include "sfelab/bid_io.hpp"
#include "sfelab/counterfactual.hpp"
#include "sfelab/csv.hpp"
#include "sfelab/error.hpp"
#include "sfelab/horizon.hpp"
#include "sfelab/scenario.hpp"
#include "sfelab/smoothing.hpp"

namespace {

using namespace sfelab;
using io::format_number;

// Closed-form results print at 12 significant digits so that 2.4999999999999991 reads 2.5.
std::string closed_form(double x) { return fmt::format("{:.12g}", x); }

enum Exit { kOk = 0, kValidation = 1, kNumeric = 2, kIo = 3 };

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string kappas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string svg;
  int threads = 1;
  std::string source;
  std::string observed;
  std::string bids;
  std::string firm;
  std::string unit;
  int hour = 0;
  double price = 0.0;
  std::optional<double> expected_price;
  double bw_frac = 0.10;
};

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("sfelab");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  const char* env = std::getenv("SFE_LOG");
  if (!env) return;
  static const std::map<std::string, spdlog::level::level_enum> levels = {
      {"error", spdlog::level::err},
      {"warn", spdlog::level::warn},
      {"info", spdlog::level::info},
      {"debug", spdlog::level::debug}};
  const auto it = levels.find(env);
  if (it == levels.end()) {
    spdlog::warn("SFE_LOG='{}' not one of error, warn, info, debug; using warn", env);
  } else {
    spdlog::set_level(it->second);
  }
}

void emit(const Options& o, const std::string& content) {
  if (o.out.empty()) {
    std::cout << content;
  } else {
    io::write_file_atomic(o.out, content);
    spdlog::info("wrote {}", o.out);
  }
}

scenario::Scenario load(const Options& o) {
  spdlog::debug("loading {}", o.scenario);
  auto sc = scenario::load_scenario(o.scenario);
  if (o.seed) {
    sc.seed = *o.seed;
    if (sc.simulation) sc.simulation->config.seed = *o.seed;
  }
  return sc;
}

const scenario::AnalyticSection& need_duopoly(const scenario::Scenario& sc) {
  if (!sc.analytic) throw ValidationError("scenario has no duopoly section (k1, k2, demand)");
  return *sc.analytic;
}

scenario::SimulationSection& need_simulation(scenario::Scenario& sc) {
  if (!sc.simulation) throw ValidationError("scenario has no simulation section");
  return *sc.simulation;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    out.push_back(io::parse_number(text.substr(start, end - start), what));
    start = end + 1;
  }
  return out;
}

void sfe_solve(const Options& o) {
  const auto sc = load(o);
  const auto& a = need_duopoly(sc);
  const auto sfe = sfe::solve_duopoly(a.k1, a.k2, *sc.ladder);
  const double price = sfe::sfe_clearing_price(sfe, a.demand);
  spdlog::info("p_hat={} c3={} c4={} knife_edge={}", sfe.p_hat, sfe.c3, sfe.c4, sfe.knife_edge);
  emit(o, fmt::format("regime={},c1={},price={}\n", sfe::to_string(sfe.regime), closed_form(sfe.c1),
                      closed_form(price)));
}

void sfe_transfer_sweep(const Options& o) {
  const auto sc = load(o);
  const auto& a = need_duopoly(sc);
  const auto pts = sfe::transfer_sweep(a.k1, a.k2, *sc.ladder, a.deltas, a.demand);
  std::string out = "delta,price,regime,c1,p_hat\n";
  for (const auto& p : pts) {
    out += fmt::format("{},{},{},{},{}\n", closed_form(p.delta), closed_form(p.price),
                       sfe::to_string(p.regime), closed_form(p.c1), closed_form(p.p_hat));
  }
  emit(o, out);
}

void sfe_symmetric(const Options& o) {
  const auto sc = load(o);
  if (!sc.symmetric) throw ValidationError("scenario has no symmetric section");
  const auto& s = *sc.symmetric;
  std::string out = "delta,price,p_hat,low_slope,high_slope\n";
  for (double d : s.deltas) {
    const auto sym = sfe::solve_symmetric(s.k_low, s.k_high, *sc.ladder, d);
    out += fmt::format("{},{},{},{},{}\n", closed_form(d), closed_form(sym.clearing_price(s.demand)),
                       closed_form(sym.p_hat), closed_form(sym.low_slope), closed_form(sym.high_slope));
  }
  emit(o, out);
}

void market_clear(const Options& o) {
  auto sc = load(o);
  auto& s = need_simulation(sc);
  const auto& cfg = s.config;
  std::string out = "hour,price,firm_id,quantity\n";
  for (int h = 0; h < market::kHoursPerDay; ++h) {
    const auto schedules = market::hourly_schedules(cfg.bids, h);
    const auto res = market::clear_market(schedules, cfg.demand.mean[static_cast<std::size_t>(h)],
                                          cfg.fringe_cost, s.fringe_capacity);
    for (const auto& [firm, q] : res.per_firm_quantity) {
      out += fmt::format("{},{},{},{}\n", h, format_number(res.price), firm, format_number(q));
    }
    out += fmt::format("{},{},fringe,{}\n", h, format_number(res.price), format_number(res.fringe_quantity));
  }
  emit(o, out);
}

void diag_smooth(const Options& o) {
  std::vector<market::UnitBid> bids;
  std::string firm = o.firm;
  double bandwidth = 0.0;
  if (!o.bids.empty()) {
    bids = io::read_bids(o.bids);
  } else if (!o.scenario.empty()) {
    auto sc = load(o);
    auto& s = need_simulation(sc);
    bids = s.config.bids;
    if (firm.empty()) firm = s.config.leader;
    bandwidth = s.bandwidth;
  } else {
    throw ValidationError("diag smooth: --bids or --scenario is required");
  }
  if (firm.empty()) throw ValidationError("diag smooth: --firm is required");
  if (o.expected_price) {
    bandwidth = smoothing::SmoothingConfig::from_expected_price(*o.expected_price, o.bw_frac).bandwidth;
  } else if (!(bandwidth > 0.0)) {
    throw ValidationError("diag smooth: --expected-price is required");
  }
  const smoothing::SmoothingConfig cfg{bandwidth};
  cfg.validate();
  if (o.hour < 0 || o.hour >= market::kHoursPerDay) throw ValidationError("--hour: must lie in 0-23");
  std::string unit = o.unit;
  if (unit.empty()) {
    for (const auto& b : bids) {
      if (b.firm_id == firm && b.active(o.hour)) {
        unit = b.unit_id;
        break;
      }
    }
    if (unit.empty()) throw ValidationError(fmt::format("firm '{}' has no unit in hour {}", firm, o.hour));
  }
  const auto d = smoothing::smoothed_derivatives(bids, o.hour, o.price, cfg, firm, unit);
  const auto sl = smoothing::slope_diagnostics(bids, o.hour, o.price, cfg, firm);
  std::string out =
      "hour,price,bandwidth,firm_id,unit_id,dS_dp,dS_dq,dS_db,dDR_dp,dp_dq,dp_db,residual_demand_slope,"
      "own_supply_slope\n";
  out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", o.hour, format_number(o.price),
                     format_number(bandwidth), firm, unit, format_number(d.dS_dp), format_number(d.dS_dq),
                     format_number(d.dS_db), format_number(d.dDR_dp), format_number(d.dp_dq),
                     format_number(d.dp_db), format_number(sl.residual_demand_slope),
                     format_number(sl.own_supply_slope));
  emit(o, out);
}

void sim_run(const Options& o) {
  auto sc = load(o);
  const auto& cfg = need_simulation(sc).config;
  const auto res = sim::simulate_horizon(cfg, true);
  double spilled = 0.0;
  for (double s : res.spilled) spilled += s;
  spdlog::info("{} weeks, final stock {}, spilled {}", cfg.weeks, res.stock_path.back(), spilled);
  emit(o, sim::records_to_csv(res));
}

void sim_fit(const Options& o) {
  auto sc = load(o);
  auto& s = need_simulation(sc);
  std::filesystem::path observed;
  if (!o.observed.empty()) {
    observed = o.observed;
  } else if (s.observed_prices) {
    observed = *s.observed_prices;
  } else {
    throw ValidationError("sim fit: no observed prices (use --observed or simulation.observed_prices_csv)");
  }
  const auto obs = scenario::read_observed_prices(observed);
  const auto res = sim::simulate_horizon(s.config, true);
  const auto st = sim::compare_prices(res, obs);
  emit(o, fmt::format("matched,mean_simulated,mean_observed,mean_abs_error,rmse,correlation\n{},{},{},{},{},{}\n",
                      st.matched, format_number(st.mean_simulated), format_number(st.mean_observed),
                      format_number(st.mean_abs_error), format_number(st.rmse), format_number(st.correlation)));
}

void cf_sweep(const Options& o) {
  auto sc = load(o);
  const auto kappas = parse_list(o.kappas, "--kappas");
  cf::CounterfactualGrid grid;
  if (sc.simulation) {
    auto& s = *sc.simulation;
    const auto source = o.source.empty() ? s.source : cf::source_set_from_string(o.source);
    grid = cf::run_counterfactual(s.config, kappas, source, s.capacity_mode, o.threads);
  } else {
    const auto& a = need_duopoly(sc);
    grid = cf::run_analytic_counterfactual(a.k1, a.k2, *sc.ladder, a.demand, kappas);
  }
  for (std::size_t k = 0; k < grid.kappas.size(); ++k) {
    spdlog::info("kappa={} mean_diff={} industry_capacity={}", grid.kappas[k], grid.kappa_profile[k],
                 grid.industry_capacity[k]);
  }
  std::size_t failures = 0;
  for (const auto& c : grid.cells) failures += c.failures;
  if (failures > 0) spdlog::warn("{} market(s) failed and are excluded from the grid", failures);
  spdlog::debug("{}", grid.note);
  emit(o, cf::grid_to_csv(grid));
  if (!o.svg.empty()) io::write_file_atomic(o.svg, cf::grid_to_svg(grid));
}

void metrics_hhi(const Options& o) {
  const auto sc = load(o);
  if (sc.concentration.empty()) throw ValidationError("scenario has no concentration section");
  const auto snap = cf::concentration_metrics(sc.concentration);
  std::string out = "firm_id,share,net_adverse\n";
  for (std::size_t i = 0; i < snap.firms.size(); ++i) {
    out += fmt::format("{},{},{}\n", snap.firms[i], closed_form(snap.shares[i]), snap.net_adverse[i]);
  }
  emit(o, out);
  std::cout << fmt::format("hhi={},delta={}\n", closed_form(snap.hhi), closed_form(snap.delta));
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation:
      return kValidation;
    case ErrorKind::numeric:
      return kNumeric;
    case ErrorKind::io:
      return kIo;
  }
  return kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Supply function equilibria, hydro best responses and capacity-transfer counterfactuals"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd, bool needs_out = false) {
    cmd->add_option("--scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    auto* out = cmd->add_option("--out", o.out, "Output path (stdout when omitted)");
    if (needs_out) out->required();
    cmd->add_option("--seed", o.seed, "Override the scenario seed");
  };

  std::function<void(const Options&)> action;
  auto leaf = [&](CLI::App* group, const std::string& name, const std::string& help,
                  void (*fn)(const Options&)) {
    auto* cmd = group->add_subcommand(name, help);
    cmd->callback([&action, fn] { action = fn; });
    return cmd;
  };

  auto* sfe = app.add_subcommand("sfe", "Closed-form duopoly equilibria");
  sfe->require_subcommand(1);
  add_common(leaf(sfe, "solve", "Solve the duopoly and print regime, slope and price", sfe_solve));
  add_common(leaf(sfe, "transfer-sweep", "Prices after moving high-cost capacity to the leader", sfe_transfer_sweep));
  add_common(leaf(sfe, "symmetric", "Symmetric-firm equilibria over transfers", sfe_symmetric));

  auto* mkt = app.add_subcommand("market", "Uniform-price clearing");
  mkt->require_subcommand(1);
  add_common(leaf(mkt, "clear", "Clear every hour at mean demand", market_clear));

  auto* diag = app.add_subcommand("diag", "Diagnostics");
  diag->require_subcommand(1);
  auto* smooth = leaf(diag, "smooth", "Smoothed derivatives of one firm's schedule at a price", diag_smooth);
  smooth->add_option("--scenario", o.scenario, "Scenario JSON with a simulation section")->check(CLI::ExistingFile);
  smooth->add_option("--bids", o.bids, "Bid CSV")->check(CLI::ExistingFile);
  smooth->add_option("--out", o.out, "Output path (stdout when omitted)");
  smooth->add_option("--hour", o.hour, "Hour 0-23")->required();
  smooth->add_option("--price", o.price, "Price at which to evaluate")->required();
  smooth->add_option("--expected-price", o.expected_price, "Expected price for the bandwidth rule");
  smooth->add_option("--bw-frac", o.bw_frac, "Bandwidth as a fraction of the expected price");
  smooth->add_option("--firm", o.firm, "Firm id (scenario leader by default)");
  smooth->add_option("--unit", o.unit, "Unit id for quantity and price-bid derivatives");

  auto* sim = app.add_subcommand("sim", "Leader best-response simulation");
  sim->require_subcommand(1);
  add_common(leaf(sim, "run", "Simulate the horizon", sim_run));
  auto* fit = leaf(sim, "fit", "Compare simulated with observed prices", sim_fit);
  add_common(fit);
  fit->add_option("--observed", o.observed, "Observed prices CSV (week,hour,price)");

  auto* cfg = app.add_subcommand("cf", "Capacity-transfer counterfactuals");
  cfg->require_subcommand(1);
  auto* sweep = leaf(cfg, "sweep", "Price-difference grid over kappa and water deciles", cf_sweep);
  add_common(sweep);
  sweep->add_option("--kappas", o.kappas, "Comma-separated kappa values in [0, 1]");
  sweep->add_option("--svg", o.svg, "Heatmap SVG path");
  sweep->add_option("--threads", o.threads, "Worker threads across kappa values")->check(CLI::PositiveNumber);
  sweep->add_option("--source", o.source, "Transferring firms")->check(CLI::IsMember({"all", "nonhydro"}));

  auto* met = app.add_subcommand("metrics", "Concentration metrics");
  met->require_subcommand(1);
  add_common(leaf(met, "hhi", "Capacity HHI and forecast-weighted change", metrics_hhi));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kValidation;
  }

  try {
    action(o);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kNumeric;
  }
  return kOk;
}
