#include "sfelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace sfelab::rng {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t StreamSeeder::seed_for(std::string_view label) const {
  return splitmix64(root_ ^ fnv1a(label));
}

Engine StreamSeeder::engine(std::string_view label, std::uint64_t index) const {
  return Engine(splitmix64(seed_for(label) + splitmix64(index)));
}

double uniform01(Engine& eng) {
  // (0, 1): never returns exactly 0, so log() below is safe.
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Engine& eng) {
  const double u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sfelab::rng
