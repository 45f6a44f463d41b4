#include "sfelab/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_sf_gamma.h>

#include "sfelab/error.hpp"

namespace sfelab::hydro {

std::string to_string(DensityFamily f) {
  return f == DensityFamily::normal ? "normal" : "pearson_iv";
}

DensityFamily density_family_from_string(const std::string& s) {
  if (s == "normal") return DensityFamily::normal;
  if (s == "pearson_iv" || s == "pearson4") return DensityFamily::pearson_iv;
  throw ValidationError(fmt::format("density family: unknown value '{}'", s));
}

namespace {

double pearson_log_norm(double m, double nu, double a) {
  gsl_sf_result lnr;
  gsl_sf_result arg;
  if (gsl_sf_lngamma_complex_e(m, 0.5 * nu, &lnr, &arg) != GSL_SUCCESS) {
    throw NumericError(fmt::format("pearson IV normalisation failed (m={}, nu={})", m, nu));
  }
  const double log_beta = std::lgamma(m - 0.5) + std::lgamma(0.5) - std::lgamma(m);
  return 2.0 * lnr.val - 2.0 * std::lgamma(m) - std::log(a) - log_beta;
}

}  // namespace

TransitionDensity TransitionDensity::normal(double mu, double sigma) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) {
    throw ValidationError(fmt::format("normal density: need finite mu and sigma > 0 (got {}, {})", mu, sigma));
  }
  TransitionDensity d;
  d.family = DensityFamily::normal;
  d.mu = mu;
  d.sigma = sigma;
  d.log_norm = -std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
  return d;
}

TransitionDensity TransitionDensity::pearson_iv(double m, double nu, double a, double lambda) {
  if (!std::isfinite(m) || !(m > 0.5)) {
    throw ValidationError(fmt::format("pearson IV: m must exceed 0.5 (got {})", m));
  }
  if (!std::isfinite(nu) || !std::isfinite(lambda) || !std::isfinite(a) || !(a > 0.0)) {
    throw ValidationError("pearson IV: nu, lambda finite and a > 0 required");
  }
  TransitionDensity d;
  d.family = DensityFamily::pearson_iv;
  d.m = m;
  d.nu = nu;
  d.a = a;
  d.lambda = lambda;
  d.log_norm = pearson_log_norm(m, nu, a);
  return d;
}

double TransitionDensity::log_pdf(double x) const {
  if (family == DensityFamily::normal) {
    const double z = (x - mu) / sigma;
    return log_norm - 0.5 * z * z;
  }
  const double y = (x - lambda) / a;
  return log_norm - m * std::log1p(y * y) - nu * std::atan(y);
}

double TransitionDensity::pdf(double x) const { return std::exp(log_pdf(x)); }

double TransitionDensity::pdf_derivative(double x) const {
  if (family == DensityFamily::normal) {
    const double z = (x - mu) / sigma;
    return -pdf(x) * z / sigma;
  }
  const double y = (x - lambda) / a;
  return -pdf(x) * (2.0 * m * y + nu) / (a * (1.0 + y * y));
}

double TransitionDensity::mean() const {
  if (family == DensityFamily::normal) return mu;
  if (!(m > 1.0)) throw NumericError("pearson IV mean undefined for m <= 1");
  return lambda - a * nu / (2.0 * (m - 1.0));
}

double TransitionDensity::variance() const {
  if (family == DensityFamily::normal) return sigma * sigma;
  if (!(m > 1.5)) throw NumericError("pearson IV variance undefined for m <= 1.5");
  const double r = 2.0 * (m - 1.0);
  return a * a * (r * r + nu * nu) / (r * r * (r - 1.0));
}

TransitionDensity TransitionDensity::with_mean(double new_mean) const {
  TransitionDensity d = *this;
  if (family == DensityFamily::normal) {
    d.mu = new_mean;
  } else {
    d.lambda += new_mean - mean();
  }
  return d;
}

double total_mass(const TransitionDensity& d) {
  const double centre = d.family == DensityFamily::normal ? d.mu : d.lambda;
  const double scale = d.family == DensityFamily::normal ? d.sigma : d.a;
  boost::math::quadrature::sinh_sinh<double> integrator;
  double err = 0.0;
  const double mass =
      integrator.integrate([&](double t) { return d.pdf(centre + scale * t) * scale; }, 1e-12, &err);
  return mass;
}

SampleMoments sample_moments(std::span<const double> xs) {
  SampleMoments s;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = m2;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2);
  }
  return s;
}

namespace {

struct LikelihoodData {
  std::span<const double> xs;
};

// Parameters: log(m - 1/2), nu, log(a), lambda.
double negative_log_likelihood(const gsl_vector* v, void* params) {
  const auto* data = static_cast<const LikelihoodData*>(params);
  const double m = 0.5 + std::exp(gsl_vector_get(v, 0));
  const double nu = gsl_vector_get(v, 1);
  const double a = std::exp(gsl_vector_get(v, 2));
  const double lambda = gsl_vector_get(v, 3);
  if (!std::isfinite(m) || !std::isfinite(a) || m > 1e6 || a > 1e12) return GSL_POSINF;
  gsl_sf_result lnr;
  gsl_sf_result arg;
  gsl_set_error_handler_off();
  if (gsl_sf_lngamma_complex_e(m, 0.5 * nu, &lnr, &arg) != GSL_SUCCESS) return GSL_POSINF;
  const double log_norm = 2.0 * lnr.val - 2.0 * std::lgamma(m) - std::log(a) -
                          (std::lgamma(m - 0.5) + std::lgamma(0.5) - std::lgamma(m));
  double ll = 0.0;
  for (double x : data->xs) {
    const double y = (x - lambda) / a;
    ll += -m * std::log1p(y * y) - nu * std::atan(y);
  }
  const double n = static_cast<double>(data->xs.size());
  return -(ll / n + log_norm);
}

struct MomentStart {
  bool feasible = false;
  double m = 0.0;
  double nu = 0.0;
  double a = 0.0;
  double lambda = 0.0;
};

MomentStart moment_start(const SampleMoments& s) {
  MomentStart st;
  const double b1 = s.skewness * s.skewness;
  const double b2 = s.kurtosis;
  const double denom = 2.0 * b2 - 3.0 * b1 - 6.0;
  if (!(denom > 0.0) || !(s.variance > 0.0)) return st;
  const double r = 6.0 * (b2 - b1 - 1.0) / denom;
  if (!(r > 1.0)) return st;
  const double q = 16.0 * (r - 1.0) - b1 * (r - 2.0) * (r - 2.0);
  if (!(q > 0.0)) return st;
  const double sd = std::sqrt(s.variance);
  const double signed_root_b1 = s.skewness;
  st.m = 1.0 + 0.5 * r;
  st.nu = -r * (r - 2.0) * signed_root_b1 / std::sqrt(q);
  st.a = std::sqrt(s.variance * q) / 4.0;
  st.lambda = s.mean - (r - 2.0) * signed_root_b1 * sd / 4.0;
  st.feasible = std::isfinite(st.m) && std::isfinite(st.nu) && std::isfinite(st.a) && st.a > 0.0;
  return st;
}

}  // namespace

TransitionDensity fit_residual_density(std::span<const double> residuals, DensityFamily family) {
  if (residuals.size() < 100) {
    throw ValidationError(fmt::format("density fit needs >= 100 residuals (got {})", residuals.size()));
  }
  const auto mom = sample_moments(residuals);
  if (!(mom.variance > 0.0)) throw NumericError("residuals have zero variance");
  // Unbiased variance for the normal family.
  const double n = static_cast<double>(residuals.size());
  auto normal_fit = [&] { return TransitionDensity::normal(mom.mean, std::sqrt(mom.variance * n / (n - 1.0))); };
  if (family == DensityFamily::normal) return normal_fit();

  const auto start = moment_start(mom);
  if (!start.feasible) {
    auto d = normal_fit();
    d.fell_back = true;
    d.note = fmt::format("moments outside the type IV region (skewness {:.4g}, kurtosis {:.4g})",
                         mom.skewness, mom.kurtosis);
    return d;
  }

  LikelihoodData data{residuals};
  gsl_multimin_function fn{&negative_log_likelihood, 4, &data};
  gsl_vector* x = gsl_vector_alloc(4);
  gsl_vector* step = gsl_vector_alloc(4);
  gsl_vector_set(x, 0, std::log(start.m - 0.5));
  gsl_vector_set(x, 1, start.nu);
  gsl_vector_set(x, 2, std::log(start.a));
  gsl_vector_set(x, 3, start.lambda);
  gsl_vector_set(step, 0, 0.2);
  gsl_vector_set(step, 1, 0.2 + 0.1 * std::abs(start.nu));
  gsl_vector_set(step, 2, 0.2);
  gsl_vector_set(step, 3, 0.2 * std::sqrt(mom.variance));

  gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4);
  gsl_multimin_fminimizer_set(solver, &fn, x, step);
  double previous = solver->fval;
  int stalled = 0;
  for (int it = 0; it < 5000; ++it) {
    if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(solver);
    if (std::abs(previous - solver->fval) < 1e-8) {
      ++stalled;
    } else {
      stalled = 0;
    }
    previous = solver->fval;
    if (stalled > 50 && size < 1e-4) break;
    if (size < 1e-8) break;
  }
  const double m = 0.5 + std::exp(gsl_vector_get(solver->x, 0));
  const double nu = gsl_vector_get(solver->x, 1);
  const double a = std::exp(gsl_vector_get(solver->x, 2));
  const double lambda = gsl_vector_get(solver->x, 3);
  gsl_multimin_fminimizer_free(solver);
  gsl_vector_free(x);
  gsl_vector_free(step);

  auto d = TransitionDensity::pearson_iv(m, nu, a, lambda);
  const double mass = total_mass(d);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw NumericError(fmt::format("fitted pearson IV integrates to {} (tolerance 1e-6)", mass));
  }
  return d;
}

DensitySampler::DensitySampler(const TransitionDensity& d, std::size_t grid) {
  if (grid < 16) throw ValidationError("sampler grid too small");
  xs_.resize(grid + 1);
  cdf_.assign(grid + 1, 0.0);
  if (d.family == DensityFamily::normal) {
    const boost::math::normal_distribution<double> nd(d.mu, d.sigma);
    for (std::size_t i = 0; i <= grid; ++i) {
      const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(grid + 1);
      cdf_[i] = u;
      xs_[i] = boost::math::quantile(nd, u);
    }
    return;
  }
  // Pearson IV in theta = atan((x - lambda)/a): density proportional to
  // cos(theta)^(2m-2) exp(-nu theta) on (-pi/2, pi/2); midpoint cells.
  const double h = std::numbers::pi / static_cast<double>(grid);
  std::vector<double> theta(grid + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i <= grid; ++i) {
    theta[i] = -0.5 * std::numbers::pi + h * static_cast<double>(i);
    if (i > 0) {
      const double mid = theta[i] - 0.5 * h;
      acc += std::exp((2.0 * d.m - 2.0) * std::log(std::cos(mid)) - d.nu * mid) * h;
    }
    cdf_[i] = acc;
  }
  for (auto& c : cdf_) c /= acc;
  xs_ = std::move(theta);
  angular_ = true;
  lambda_ = d.lambda;
  a_ = d.a;
}

double DensitySampler::quantile(double u) const {
  double v = 0.0;
  if (u <= cdf_.front()) {
    v = xs_.front();
  } else if (u >= cdf_.back()) {
    v = xs_.back();
  } else {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto i = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[i - 1];
    const double c1 = cdf_[i];
    const double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    v = xs_[i - 1] + w * (xs_[i] - xs_[i - 1]);
  }
  if (!angular_) return v;
  const double edge = 0.5 * std::numbers::pi - 1e-9;
  return lambda_ + a_ * std::tan(std::clamp(v, -edge, edge));
}

double DensitySampler::sample(rng::Engine& eng) const { return quantile(rng::uniform01(eng)); }

}  // namespace sfelab::hydro
