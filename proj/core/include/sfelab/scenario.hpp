#pragma once

// Scenario files: JSON with optional analytic, symmetric, simulation and
// concentration sections. Loading validates everything eagerly and reports
// every violation with its field path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sfelab/counterfactual.hpp"
#include "sfelab/horizon.hpp"
#include "sfelab/market.hpp"
#include "sfelab/smoothing.hpp"

namespace sfelab::scenario {

struct AnalyticSection {
  market::TechnologyPortfolio k1;
  market::TechnologyPortfolio k2;
  double demand = 0.0;
  std::vector<double> deltas;
};

struct SymmetricSection {
  double k_low = 0.0;
  double k_high = 0.0;
  double demand = 0.0;
  std::vector<double> deltas;
};

struct SimulationSection {
  sim::SimulationConfig config;
  /// Bandwidth for smoothed diagnostics; zero means 10% of the mean price.
  double bandwidth = 0.0;
  double bandwidth_fraction = 0.10;
  cf::CapacityMode capacity_mode = cf::CapacityMode::declared;
  cf::SourceSet source = cf::SourceSet::non_hydro_firms;
  double fringe_capacity = 0.0;
  std::optional<std::filesystem::path> observed_prices;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::optional<market::CostLadder> ladder;
  std::optional<AnalyticSection> analytic;
  std::optional<SymmetricSection> symmetric;
  std::optional<SimulationSection> simulation;
  std::vector<cf::FirmPosition> concentration;
  std::filesystem::path source;
};

/// Parses and validates; relative paths resolve against the file's directory.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                        const std::string& source_name = "<memory>");

/// Reads `week,hour,price` rows.
std::vector<std::array<double, 3>> read_observed_prices(const std::filesystem::path& path);

}  // namespace sfelab::scenario
