#pragma once

// Autoregressive inflow model: y_t = c + sum_k phi_k y_{t-k} + e_t, by OLS.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfelab/density.hpp"
#include "sfelab/rng.hpp"

namespace sfelab::hydro {

struct InflowModel {
  double intercept = 0.0;
  std::vector<double> lag_coefficients;
  int lag_order = 1;
  /// Residual density; absent when residuals were too few or constant.
  std::optional<TransitionDensity> residual_density;
  double residual_sd = 0.0;

  // Fit diagnostics.
  std::size_t observations = 0;
  double spectral_radius = 0.0;
  bool stationary = true;
  bool degenerate = false;  // constant series
  double bic = 0.0;
  std::vector<double> residuals;

  /// Unconditional mean c / (1 - sum phi); the intercept for degenerate or
  /// non-stationary models.
  double long_run_mean() const;
  /// Unconditional standard deviation from the companion-form Lyapunov
  /// equation; residual_sd when non-stationary.
  double long_run_sd() const;
};

/// Requires series.size() >= 10 * lag_order. Throws NumericError when the
/// lag matrix is rank deficient (except for constant series, which are
/// flagged degenerate).
InflowModel fit_inflow_model(std::span<const double> series, int lag_order,
                             DensityFamily family = DensityFamily::normal);

/// Lag order in [1, max_lag] minimising BIC on a common estimation sample.
int select_lag_order(std::span<const double> series, int max_lag);

/// `history` supplies the most recent lags (last element = latest); when it is
/// shorter than the lag order the long-run mean fills in.
std::vector<double> simulate_inflows(const InflowModel& model, std::size_t horizon,
                                     rng::Engine& eng, std::span<const double> history = {});
std::vector<double> simulate_inflows(const InflowModel& model, std::size_t horizon,
                                     std::uint64_t seed, std::span<const double> history = {});

/// Conditional mean `steps` periods ahead.
double forecast_inflows(const InflowModel& model, std::span<const double> history, int steps);

enum class ForecastClass { adverse, moderate, favorable };
std::string to_string(ForecastClass c);
ForecastClass forecast_class_from_string(const std::string& s);

/// adverse iff forecast < mean - sd, favorable iff forecast > mean + sd.
ForecastClass classify_forecast(double forecast, double long_run_mean, double long_run_sd);

std::string model_to_json(const InflowModel& model);

/// CSV `firm_id,period,inflow`; series per firm ordered by period.
std::map<std::string, std::vector<double>> read_inflow_csv(const std::filesystem::path& path);

}  // namespace sfelab::hydro
