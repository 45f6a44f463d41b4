#pragma once

// Named random streams derived from one scenario seed.
//
// Each consumer asks for a stream by label; the label is hashed (FNV-1a) and
// mixed with the root seed (splitmix64), so adding a new label never shifts
// the draws of existing ones.

#include <cstdint>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>

namespace sfelab::rng {

using Engine = boost::random::mt19937_64;

// Stream labels in use.
inline constexpr std::string_view kInflowStream = "inflow";
inline constexpr std::string_view kDemandStream = "demand";
inline constexpr std::string_view kResidualStream = "residual";

std::uint64_t fnv1a(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

class StreamSeeder {
 public:
  explicit StreamSeeder(std::uint64_t root) : root_(root) {}

  std::uint64_t seed_for(std::string_view label) const;
  Engine engine(std::string_view label) const { return Engine(seed_for(label)); }
  /// Sub-stream, e.g. one per firm: label "inflow" index 2.
  Engine engine(std::string_view label, std::uint64_t index) const;

 private:
  std::uint64_t root_;
};

/// Standard normal draw via Box-Muller on 53-bit uniforms; identical across
/// standard libraries, unlike std::normal_distribution.
double standard_normal(Engine& eng);
double uniform01(Engine& eng);

}  // namespace sfelab::rng
