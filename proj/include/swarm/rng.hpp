#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "swarm/vec.hpp"

namespace swarm {

// Purpose tags keep substreams for different decisions independent, so that
// switching one mechanism off never shifts the random draws of another.
enum class Stream : std::uint64_t {
  Spawn = 1,
  Motion = 2,
  Share = 3,
  Differentiate = 4,
  Compete = 5,
  Transmit = 6,
  Environment = 7,
  Iec = 8,
  Bootstrap = 9,
  Batch = 10,
  Order = 11,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Small counter-mixed generator. Satisfies UniformRandomBitGenerator, so it
/// plugs into <random> and <algorithm> where portability of the exact draw
/// sequence does not matter; the helpers below are bit-stable everywhere.
class Rng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // [0, n)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  bool coin() { return ((*this)() >> 63) != 0; }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec unit_vector(int dim) {
    if (dim == 2) {
      const double a = 2.0 * std::numbers::pi * uniform();
      return {std::cos(a), std::sin(a), 0.0};
    }
    const double z = 2.0 * uniform() - 1.0;
    const double a = 2.0 * std::numbers::pi * uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(a), s * std::sin(a), z};
  }

  // Uniform point in a ball of the given radius around the origin.
  Vec in_ball(int dim, double radius) {
    const Vec dir = unit_vector(dim);
    const double u = uniform();
    const double r = radius * (dim == 2 ? std::sqrt(u) : std::cbrt(u));
    return dir * r;
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Independent generator for (seed, purpose, step, index).
constexpr Rng substream(std::uint64_t seed, Stream purpose, std::uint64_t step,
                        std::uint64_t index) {
  std::uint64_t h = splitmix64(seed ^ (static_cast<std::uint64_t>(purpose) << 56));
  h = splitmix64(h ^ step);
  h = splitmix64(h ^ (index * 0xd1b54a32d192ed03ULL));
  return Rng(h);
}

}  // namespace swarm
