#include "sfelab/value_spline.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sfelab/error.hpp"

namespace sfelab::hydro {

ValueSpline::ValueSpline(std::vector<double> knots, std::vector<double> gammas)
    : knots_(std::move(knots)), gammas_(std::move(gammas)) {
  if (knots_.size() < 4 || knots_.size() > 5) {
    throw ValidationError(fmt::format("value_spline.knots: need 4 or 5 knots (got {})", knots_.size()));
  }
  if (gammas_.size() != knots_.size()) {
    throw ValidationError(fmt::format("value_spline.gammas: need {} coefficients (got {})",
                                      knots_.size(), gammas_.size()));
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || !std::isfinite(gammas_[i])) {
      throw ValidationError("value_spline: knots and gammas must be finite");
    }
    if (i > 0 && !(knots_[i] > knots_[i - 1])) {
      throw ValidationError("value_spline.knots: must be strictly increasing");
    }
  }
  const double h_lo = knots_[1] - knots_[0];
  const double h_hi = knots_.back() - knots_[knots_.size() - 2];
  extended_.push_back(knots_.front() - 2.0 * h_lo);
  extended_.push_back(knots_.front() - h_lo);
  extended_.insert(extended_.end(), knots_.begin(), knots_.end());
  extended_.push_back(knots_.back() + h_hi);
  extended_.push_back(knots_.back() + 2.0 * h_hi);
}

std::pair<double, double> ValueSpline::support(std::size_t r) const {
  if (r >= knots_.size()) throw ValidationError(fmt::format("basis index {} out of range", r));
  return {extended_[r], extended_[r + 4]};
}

double ValueSpline::basis(std::size_t r, double w) const {
  if (r >= knots_.size()) throw ValidationError(fmt::format("basis index {} out of range", r));
  const double* t = extended_.data() + r;
  if (w < t[0] || w >= t[4]) return 0.0;
  // Cox-de Boor on the five local knots t[0..4].
  double n[4];
  for (int i = 0; i < 4; ++i) n[i] = (w >= t[i] && w < t[i + 1]) ? 1.0 : 0.0;
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i + k < 4; ++i) {
      double left = 0.0;
      double right = 0.0;
      if (t[i + k] > t[i]) left = (w - t[i]) / (t[i + k] - t[i]) * n[i];
      if (t[i + k + 1] > t[i + 1]) right = (t[i + k + 1] - w) / (t[i + k + 1] - t[i + 1]) * n[i + 1];
      n[i] = left + right;
    }
  }
  return n[0];
}

double ValueSpline::value(double w) const {
  double v = 0.0;
  for (std::size_t r = 0; r < knots_.size(); ++r) v += gammas_[r] * basis(r, w);
  return v;
}

std::pair<double, double> ValueSpline::domain() const { return {extended_.front(), extended_.back()}; }

ValueSpline ValueSpline::with_gammas(std::vector<double> gammas) const {
  return ValueSpline(knots_, std::move(gammas));
}

}  // namespace sfelab::hydro
