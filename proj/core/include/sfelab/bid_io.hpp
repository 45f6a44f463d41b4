#pragma once

// Bid CSV: unit_id,firm_id,technology,price_bid,hour,quantity,capacity
// One row per unit-hour; a unit's firm, technology, price and capacity must
// agree across its rows.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sfelab/csv.hpp"
#include "sfelab/market.hpp"

namespace sfelab::io {

std::vector<market::UnitBid> bids_from_table(const CsvTable& table, const std::string& source);
std::vector<market::UnitBid> read_bids(const std::filesystem::path& path);
std::string bids_to_csv(std::span<const market::UnitBid> bids);

}  // namespace sfelab::io
