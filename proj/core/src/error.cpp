#include "sfelab/error.hpp"

#include <fmt/format.h>

namespace sfelab {

InfeasibleQuantityError::InfeasibleQuantityError(double requested, double available)
    : ValidationError(fmt::format("infeasible quantity: requested {} exceeds capacity {}",
                                  requested, available)),
      requested(requested),
      available(available) {}

MarketFailureError::MarketFailureError(double demand, double capacity)
    : NumericError(fmt::format("market failure: demand {} exceeds total capacity {}", demand,
                               capacity)),
      demand(demand),
      capacity(capacity) {}

DeficitError::DeficitError(double stock_after, double lower_bound)
    : NumericError(fmt::format("water deficit: stock would fall to {} below lower bound {}",
                               stock_after, lower_bound)),
      stock_after(stock_after),
      lower_bound(lower_bound) {}

}  // namespace sfelab
