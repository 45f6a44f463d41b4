#pragma once

// Continuation value V(w) = sum_r gamma_r B_r(w) on cubic B-spline bases.
//
// Basis r is the cubic B-spline centred on knot r. The knot vector is padded
// with two extra knots on each side (spacing equal to the end intervals), so
// basis r is supported on (t[r-2], t[r+2]).

#include <functional>
#include <vector>

namespace sfelab::hydro {

class ValueSpline {
 public:
  ValueSpline() = default;
  /// 4 or 5 strictly increasing knots and one coefficient per knot.
  ValueSpline(std::vector<double> knots, std::vector<double> gammas);

  std::size_t size() const { return knots_.size(); }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& gammas() const { return gammas_; }
  /// Knots padded with two extra knots on each side.
  const std::vector<double>& extended_knots() const { return extended_; }

  double basis(std::size_t r, double w) const;
  /// Support (lo, hi) of basis r.
  std::pair<double, double> support(std::size_t r) const;
  double value(double w) const;
  /// Support of the whole value function.
  std::pair<double, double> domain() const;

  /// Copy with different coefficients.
  ValueSpline with_gammas(std::vector<double> gammas) const;

 private:
  std::vector<double> knots_;
  std::vector<double> gammas_;
  std::vector<double> extended_;
};

}  // namespace sfelab::hydro
