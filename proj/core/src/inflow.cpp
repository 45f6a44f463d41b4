#include "sfelab/inflow.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include "sfelab/csv.hpp"
#include "sfelab/error.hpp"

namespace sfelab::hydro {

namespace {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double rss = 0.0;
};

// Regress y_t on (1, y_{t-1}, ..., y_{t-p}) for t in [start, n).
OlsFit ols_lags(std::span<const double> y, int p, std::size_t start) {
  const auto n = y.size();
  const auto rows = static_cast<Eigen::Index>(n - start);
  Eigen::MatrixXd X(rows, p + 1);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::size_t t = start + static_cast<std::size_t>(i);
    X(i, 0) = 1.0;
    for (int k = 1; k <= p; ++k) X(i, k) = y[t - static_cast<std::size_t>(k)];
    target(i) = y[t];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) {
    throw NumericError(fmt::format("inflow fit: lag matrix is collinear (rank {} of {})", qr.rank(), p + 1));
  }
  OlsFit fit;
  fit.beta = qr.solve(target);
  fit.residuals = target - X * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  return fit;
}

double spectral_radius(const std::vector<double>& phi) {
  const auto p = static_cast<Eigen::Index>(phi.size());
  if (p == 0) return 0.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index k = 0; k < p; ++k) companion(0, k) = phi[static_cast<std::size_t>(k)];
  for (Eigen::Index k = 1; k < p; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

double InflowModel::long_run_mean() const {
  if (degenerate || !stationary) return intercept;
  double s = 0.0;
  for (double phi : lag_coefficients) s += phi;
  return intercept / (1.0 - s);
}

double InflowModel::long_run_sd() const {
  if (degenerate || !stationary || lag_coefficients.empty()) return residual_sd;
  const auto p = static_cast<Eigen::Index>(lag_coefficients.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index k = 0; k < p; ++k) A(0, k) = lag_coefficients[static_cast<std::size_t>(k)];
  for (Eigen::Index k = 1; k < p; ++k) A(k, k - 1) = 1.0;
  // Fixed point of Sigma = A Sigma A' + Q by doubling.
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(p, p);
  Q(0, 0) = residual_sd * residual_sd;
  Eigen::MatrixXd sigma = Q;
  Eigen::MatrixXd Ak = A;
  for (int it = 0; it < 64; ++it) {
    const Eigen::MatrixXd next = sigma + Ak * sigma * Ak.transpose();
    Ak = Ak * Ak;
    if ((next - sigma).norm() <= 1e-14 * next.norm()) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return std::sqrt(sigma(0, 0));
}

InflowModel fit_inflow_model(std::span<const double> series, int lag_order, DensityFamily family) {
  if (lag_order < 1) throw ValidationError("inflow.lag_order: must be >= 1");
  const auto p = static_cast<std::size_t>(lag_order);
  if (series.size() < 10 * p) {
    throw ValidationError(fmt::format("inflow series: need >= {} points for lag order {} (got {})", 10 * p,
                                      lag_order, series.size()));
  }
  for (double v : series) {
    if (!std::isfinite(v)) throw ValidationError("inflow series: values must be finite");
  }
  InflowModel model;
  model.lag_order = lag_order;
  model.observations = series.size() - p;

  const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
  if (*mn == *mx) {
    model.degenerate = true;
    model.intercept = *mn;
    model.lag_coefficients.assign(p, 0.0);
    model.residuals.assign(model.observations, 0.0);
    return model;
  }

  const auto fit = ols_lags(series, lag_order, p);
  model.intercept = fit.beta(0);
  for (std::size_t k = 1; k <= p; ++k) model.lag_coefficients.push_back(fit.beta(static_cast<Eigen::Index>(k)));
  model.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
  const double n = static_cast<double>(model.observations);
  const double dof = std::max(1.0, n - static_cast<double>(p + 1));
  model.residual_sd = std::sqrt(fit.rss / dof);
  model.spectral_radius = spectral_radius(model.lag_coefficients);
  model.stationary = model.spectral_radius < 1.0;
  model.bic = n * std::log(std::max(fit.rss / n, 1e-300)) + static_cast<double>(p + 1) * std::log(n);
  if (model.residual_sd > 0.0 && model.residuals.size() >= 100) {
    model.residual_density = fit_residual_density(model.residuals, family);
  }
  return model;
}

int select_lag_order(std::span<const double> series, int max_lag) {
  if (max_lag < 1) throw ValidationError("max_lag must be >= 1");
  const auto start = static_cast<std::size_t>(max_lag);
  if (series.size() < 10 * start) throw ValidationError("series too short for the lag scan");
  const double n = static_cast<double>(series.size() - start);
  int best = 1;
  double best_bic = INFINITY;
  for (int p = 1; p <= max_lag; ++p) {
    const auto fit = ols_lags(series, p, start);
    const double bic = n * std::log(std::max(fit.rss / n, 1e-300)) + (p + 1) * std::log(n);
    if (bic < best_bic) {
      best_bic = bic;
      best = p;
    }
  }
  return best;
}

namespace {

std::vector<double> seed_lags(const InflowModel& model, std::span<const double> history) {
  const auto p = static_cast<std::size_t>(model.lag_order);
  std::vector<double> lags(p, model.long_run_mean());
  // lags[0] = most recent
  for (std::size_t k = 0; k < p && k < history.size(); ++k) lags[k] = history[history.size() - 1 - k];
  return lags;
}

double step(const InflowModel& model, const std::vector<double>& lags) {
  double y = model.intercept;
  for (std::size_t k = 0; k < model.lag_coefficients.size(); ++k) y += model.lag_coefficients[k] * lags[k];
  return y;
}

void push(std::vector<double>& lags, double y) {
  if (lags.empty()) return;
  std::rotate(lags.rbegin(), lags.rbegin() + 1, lags.rend());
  lags[0] = y;
}

}  // namespace

std::vector<double> simulate_inflows(const InflowModel& model, std::size_t horizon, rng::Engine& eng,
                                     std::span<const double> history) {
  auto lags = seed_lags(model, history);
  std::optional<DensitySampler> sampler;
  double centre = 0.0;
  if (model.residual_density) {
    sampler.emplace(*model.residual_density);
    centre = model.residual_density->family == DensityFamily::normal || model.residual_density->m > 1.0
                 ? model.residual_density->mean()
                 : 0.0;
  }
  std::vector<double> out;
  out.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    double shock = 0.0;
    if (sampler) {
      shock = sampler->sample(eng) - centre;
    } else if (model.residual_sd > 0.0) {
      shock = model.residual_sd * rng::standard_normal(eng);
    }
    const double y = step(model, lags) + shock;
    out.push_back(y);
    push(lags, y);
  }
  return out;
}

std::vector<double> simulate_inflows(const InflowModel& model, std::size_t horizon, std::uint64_t seed,
                                     std::span<const double> history) {
  auto eng = rng::StreamSeeder(seed).engine(rng::kInflowStream);
  return simulate_inflows(model, horizon, eng, history);
}

double forecast_inflows(const InflowModel& model, std::span<const double> history, int steps) {
  if (steps < 1) throw ValidationError("forecast horizon must be >= 1");
  auto lags = seed_lags(model, history);
  double y = 0.0;
  for (int s = 0; s < steps; ++s) {
    y = step(model, lags);
    push(lags, y);
  }
  return y;
}

std::string to_string(ForecastClass c) {
  switch (c) {
    case ForecastClass::adverse:
      return "adverse";
    case ForecastClass::moderate:
      return "moderate";
    case ForecastClass::favorable:
      return "favorable";
  }
  return "moderate";
}

ForecastClass forecast_class_from_string(const std::string& s) {
  if (s == "adverse") return ForecastClass::adverse;
  if (s == "moderate") return ForecastClass::moderate;
  if (s == "favorable" || s == "favourable") return ForecastClass::favorable;
  throw ValidationError(fmt::format("forecast class: unknown value '{}'", s));
}

ForecastClass classify_forecast(double forecast, double long_run_mean, double long_run_sd) {
  if (forecast < long_run_mean - long_run_sd) return ForecastClass::adverse;
  if (forecast > long_run_mean + long_run_sd) return ForecastClass::favorable;
  return ForecastClass::moderate;
}

std::string model_to_json(const InflowModel& model) {
  nlohmann::ordered_json j;
  j["lag_order"] = model.lag_order;
  j["intercept"] = model.intercept;
  j["lag_coefficients"] = model.lag_coefficients;
  j["residual_sd"] = model.residual_sd;
  if (model.residual_density) {
    const auto& d = *model.residual_density;
    nlohmann::ordered_json dj;
    dj["family"] = to_string(d.family);
    if (d.family == DensityFamily::normal) {
      dj["mu"] = d.mu;
      dj["sigma"] = d.sigma;
    } else {
      dj["m"] = d.m;
      dj["nu"] = d.nu;
      dj["a"] = d.a;
      dj["lambda"] = d.lambda;
    }
    dj["fell_back"] = d.fell_back;
    if (!d.note.empty()) dj["note"] = d.note;
    j["residual_density"] = dj;
  } else {
    j["residual_density"] = nullptr;
  }
  nlohmann::ordered_json diag;
  diag["observations"] = model.observations;
  diag["spectral_radius"] = model.spectral_radius;
  diag["stationary"] = model.stationary;
  diag["degenerate"] = model.degenerate;
  diag["bic"] = model.bic;
  diag["long_run_mean"] = model.long_run_mean();
  diag["long_run_sd"] = model.long_run_sd();
  j["diagnostics"] = diag;
  return j.dump(2) + "\n";
}

std::map<std::string, std::vector<double>> read_inflow_csv(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  const auto c_firm = table.column("firm_id");
  const auto c_period = table.column("period");
  const auto c_inflow = table.column("inflow");
  std::map<std::string, std::vector<std::pair<long, double>>> raw;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string ctx = fmt::format("{} row {}", path.string(), r + 2);
    raw[row[c_firm]].emplace_back(io::parse_integer(row[c_period], ctx + " period"),
                                  io::parse_number(row[c_inflow], ctx + " inflow"));
  }
  std::map<std::string, std::vector<double>> out;
  for (auto& [firm, rows] : raw) {
    std::sort(rows.begin(), rows.end());
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].first == rows[i - 1].first) {
        throw ValidationError(fmt::format("{}: duplicate period {} for firm {}", path.string(), rows[i].first, firm));
      }
    }
    auto& series = out[firm];
    for (const auto& [_, v] : rows) series.push_back(v);
  }
  return out;
}

}  // namespace sfelab::hydro
