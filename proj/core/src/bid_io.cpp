#include "sfelab/bid_io.hpp"

#include <map>

#include <fmt/format.h>

#include "sfelab/error.hpp"

namespace sfelab::io {

using market::UnitBid;

std::vector<UnitBid> bids_from_table(const CsvTable& table, const std::string& source) {
  const auto c_unit = table.column("unit_id");
  const auto c_firm = table.column("firm_id");
  const auto c_tech = table.column("technology");
  const auto c_price = table.column("price_bid");
  const auto c_hour = table.column("hour");
  const auto c_qty = table.column("quantity");
  const auto c_cap = table.column("capacity");

  std::vector<UnitBid> bids;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string ctx = fmt::format("{} row {}", source, r + 2);
    const std::string& unit = row[c_unit];
    const auto tech = market::technology_from_string(row[c_tech]);
    const double price = parse_number(row[c_price], ctx + " price_bid");
    const long hour = parse_integer(row[c_hour], ctx + " hour");
    const double qty = parse_number(row[c_qty], ctx + " quantity");
    const double cap = parse_number(row[c_cap], ctx + " capacity");
    if (hour < 0 || hour >= market::kHoursPerDay) {
      throw ValidationError(fmt::format("{}: hour {} outside 0-23", ctx, hour));
    }

    auto [it, inserted] = index.try_emplace(unit, bids.size());
    if (inserted) {
      UnitBid b;
      b.unit_id = unit;
      b.firm_id = row[c_firm];
      b.technology = tech;
      b.price_bid = price;
      b.capacity = cap;
      bids.push_back(std::move(b));
    }
    UnitBid& b = bids[it->second];
    if (b.firm_id != row[c_firm] || b.technology != tech || b.price_bid != price || b.capacity != cap) {
      throw ValidationError(
          fmt::format("{}: unit {} has inconsistent firm/technology/price/capacity", ctx, unit));
    }
    const auto h = static_cast<std::size_t>(hour);
    if (b.bids_in_hour.test(h)) {
      throw ValidationError(fmt::format("{}: duplicate hour {} for unit {}", ctx, hour, unit));
    }
    b.bids_in_hour.set(h);
    b.hourly_quantities[h] = qty;
  }
  for (const auto& b : bids) b.validate();
  return bids;
}

std::vector<UnitBid> read_bids(const std::filesystem::path& path) {
  return bids_from_table(read_csv(path), path.string());
}

std::string bids_to_csv(std::span<const UnitBid> bids) {
  std::string out = "unit_id,firm_id,technology,price_bid,hour,quantity,capacity\n";
  for (const auto& b : bids) {
    for (int h = 0; h < market::kHoursPerDay; ++h) {
      if (!b.active(h)) continue;
      out += fmt::format("{},{},{},{},{},{},{}\n", b.unit_id, b.firm_id, market::to_string(b.technology),
                         format_number(b.price_bid), h, format_number(b.quantity(h)),
                         format_number(b.capacity));
    }
  }
  return out;
}

}  // namespace sfelab::io
