#include "sfelab/hydro.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <fmt/format.h>

#include "sfelab/error.hpp"

namespace sfelab::hydro {

void HydroState::validate() const {
  if (!std::isfinite(stock) || !std::isfinite(lower_bound) || !std::isfinite(upper_bound)) {
    throw ValidationError("hydro: stock and bounds must be finite");
  }
  if (!(lower_bound <= upper_bound)) throw ValidationError("hydro.lower: must not exceed hydro.upper");
  if (stock < lower_bound || stock > upper_bound) {
    throw ValidationError(
        fmt::format("hydro.stock: {} outside [{}, {}]", stock, lower_bound, upper_bound));
  }
}

WaterUpdate water_update(const HydroState& state, double hydro_supplied, double inflow) {
  if (!std::isfinite(hydro_supplied) || hydro_supplied < 0.0) {
    throw ValidationError(fmt::format("hydro supply must be >= 0 (got {})", hydro_supplied));
  }
  if (!std::isfinite(inflow)) throw ValidationError("inflow must be finite");
  WaterUpdate out{state, 0.0};
  const double next = state.stock - hydro_supplied + inflow;
  const double tol = 1e-9 * std::max(1.0, std::abs(state.upper_bound));
  if (next < state.lower_bound - tol) throw DeficitError(next, state.lower_bound);
  if (next > state.upper_bound) {
    out.spilled = next - state.upper_bound;
    out.state.stock = state.upper_bound;
  } else {
    out.state.stock = std::max(next, state.lower_bound);
  }
  return out;
}

namespace {

constexpr double kTolerance = 1e-10;

double shift(const HydroState& state, double hydro_supply) { return state.stock - hydro_supply; }

void check_error(double value, double err, const char* what) {
  if (!std::isfinite(value) || err > 1e-8 * std::max(1.0, std::abs(value))) {
    throw NumericError(fmt::format("{}: quadrature did not converge (estimated error {:.3g})", what, err));
  }
}

template <class F>
double integrate_piecewise(F&& f, const std::vector<double>& breaks) {
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, breaks[i], breaks[i + 1],
                                                                           15, kTolerance, &err);
    total_err += err;
  }
  check_error(total, total_err, "basis integral");
  return total;
}

std::vector<double> basis_breaks(const ValueSpline& spline, std::size_t r) {
  const auto& t = spline.extended_knots();
  return {t.begin() + static_cast<std::ptrdiff_t>(r), t.begin() + static_cast<std::ptrdiff_t>(r) + 5};
}

}  // namespace

double marginal_value_integral(const ValueSpline& spline, const TransitionDensity& inflow,
                               const HydroState& state, double hydro_supply, std::size_t r) {
  const double c = shift(state, hydro_supply);
  auto integrand = [&](double u) { return spline.basis(r, u) * inflow.pdf_derivative(u - c); };
  return integrate_piecewise(integrand, basis_breaks(spline, r));
}

double marginal_value_integral(const std::function<double(double)>& basis, const TransitionDensity& inflow,
                               const HydroState& state, double hydro_supply) {
  const double c = shift(state, hydro_supply);
  const double centre = c + (inflow.family == DensityFamily::normal ? inflow.mu : inflow.lambda);
  const double scale = inflow.family == DensityFamily::normal ? inflow.sigma : inflow.a;
  boost::math::quadrature::sinh_sinh<double> integrator;
  double err = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(
      [&](double t) {
        const double u = centre + scale * t;
        return basis(u) * inflow.pdf_derivative(u - c) * scale;
      },
      1e-12, &err, &l1);
  check_error(value, err, "marginal value integral");
  return value;
}

double marginal_water_value(const ValueSpline& spline, const TransitionDensity& inflow,
                            const HydroState& state, double hydro_supply) {
  double v = 0.0;
  for (std::size_t r = 0; r < spline.size(); ++r) {
    v += spline.gammas()[r] * marginal_value_integral(spline, inflow, state, hydro_supply, r);
  }
  return v;
}

double expected_value(const ValueSpline& spline, const TransitionDensity& inflow,
                      double stock_after_release) {
  auto integrand = [&](double u) { return spline.value(u) * inflow.pdf(u - stock_after_release); };
  return integrate_piecewise(integrand, spline.extended_knots());
}

}  // namespace sfelab::hydro
