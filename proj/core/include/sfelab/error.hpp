#pragma once

#include <stdexcept>
#include <string>

namespace sfelab {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  validation,  // bad input: violated precondition, malformed config
  numeric,     // solver or quadrature failure, degenerate market
  io,          // missing file, unreadable CSV, write failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// q exceeds the capacity that a portfolio can deliver.
struct InfeasibleQuantityError : ValidationError {
  InfeasibleQuantityError(double requested, double available);
  double requested;
  double available;
};

/// Demand cannot be met even with every strategic and fringe MWh.
struct MarketFailureError : NumericError {
  MarketFailureError(double demand, double capacity);
  double demand;
  double capacity;
};

/// The portfolio lies outside the parameter region the closed form covers.
struct RegimeViolationError : ValidationError {
  RegimeViolationError(const std::string& what, double threshold)
      : ValidationError(what), threshold(threshold) {}
  double threshold;
};

/// Price sits on a kink of the equilibrium supply, so slopes are undefined.
struct NonDifferentiablePointError : ValidationError {
  NonDifferentiablePointError(const std::string& what, double price)
      : ValidationError(what), price(price) {}
  double price;
};

/// Envelope denominator of the smoothed market vanished.
struct FlatMarketError : NumericError {
  explicit FlatMarketError(const std::string& what) : NumericError(what) {}
};

/// Water balance would push the stock below its lower bound.
struct DeficitError : NumericError {
  DeficitError(double stock_after, double lower_bound);
  double stock_after;
  double lower_bound;
};

}  // namespace sfelab
