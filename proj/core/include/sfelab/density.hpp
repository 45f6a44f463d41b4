#pragma once

// Location-scale densities for water-stock transitions.
//
// Pearson type IV:
//   f(x) = k * [1 + ((x - lambda)/a)^2]^(-m) * exp(-nu * atan((x - lambda)/a)),  m > 1/2.

#include <span>
#include <string>
#include <vector>

#include "sfelab/rng.hpp"

namespace sfelab::hydro {

enum class DensityFamily { normal, pearson_iv };

std::string to_string(DensityFamily f);
DensityFamily density_family_from_string(const std::string& s);

struct TransitionDensity {
  DensityFamily family = DensityFamily::normal;
  // normal
  double mu = 0.0;
  double sigma = 1.0;
  // pearson IV
  double m = 0.0;
  double nu = 0.0;
  double a = 1.0;
  double lambda = 0.0;
  double log_norm = 0.0;  // log k, or -log(sigma sqrt(2 pi)) for the normal

  /// Set when a Pearson IV fit was requested but fell back to the normal.
  bool fell_back = false;
  std::string note;

  static TransitionDensity normal(double mu, double sigma);
  static TransitionDensity pearson_iv(double m, double nu, double a, double lambda);

  double pdf(double x) const;
  double log_pdf(double x) const;
  /// d pdf / dx
  double pdf_derivative(double x) const;
  /// Mean; Pearson IV requires m > 1.
  double mean() const;
  /// Variance; Pearson IV requires m > 3/2.
  double variance() const;
  /// Same shape, translated so that mean() == new_mean.
  TransitionDensity with_mean(double new_mean) const;
};

/// Integral of the density over the real line by double-exponential quadrature.
double total_mass(const TransitionDensity& d);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // non-excess
};

SampleMoments sample_moments(std::span<const double> xs);

/// Normal: sample mean and standard deviation. Pearson IV: moment-matching
/// start then Nelder-Mead on the log-likelihood; falls back to the normal
/// (with `fell_back` set) when moments lie outside the type IV region.
TransitionDensity fit_residual_density(std::span<const double> residuals, DensityFamily family);

/// Inverse-CDF sampler over a tabulated density.
class DensitySampler {
 public:
  explicit DensitySampler(const TransitionDensity& d, std::size_t grid = 20001);
  double sample(rng::Engine& eng) const;
  double quantile(double u) const;

 private:
  // Knots in x, or in theta = atan((x - lambda)/a) for Pearson IV.
  std::vector<double> xs_;
  std::vector<double> cdf_;
  bool angular_ = false;
  double lambda_ = 0.0;
  double a_ = 1.0;
};

}  // namespace sfelab::hydro
