#pragma once

#include <cstdint>
#include <vector>

#include "swarm/analytics.hpp"
#include "swarm/world.hpp"

namespace swarm {

/// Ensemble of independent random-recipe runs used for diversity studies.
struct BatchSettings {
  WorldConfig base{};
  int particles = 300;
  std::uint64_t steps = 2000;
  std::uint64_t window = 200;
  std::uint64_t interval = 5;
  double spawn_radius = 100.0;
  int min_types = 1;
  int max_types = 5;
  AnalyticsSettings analytics{};
};

/// The world of run `run` for class `c`. Seed and recipe draws depend only
/// on (base seed, run); homogeneous runs draw single-type recipes.
World batch_world(const BatchSettings& s, SwarmClass c, std::uint64_t run);

BehaviorVector run_batch_member(const BatchSettings& s, SwarmClass c, std::uint64_t run);

/// Runs [first, first + n) spread over `threads` workers.
std::vector<BehaviorVector> run_batch(const BatchSettings& s, SwarmClass c, std::uint64_t first,
                                      std::uint64_t n, int threads);

}  // namespace swarm
