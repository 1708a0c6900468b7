#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swarm/neighbor_index.hpp"
#include "swarm/world.hpp"

namespace swarm {

struct CollisionEvent {
  std::uint32_t a = 0;  // a < b
  std::uint32_t b = 0;
  std::uint64_t step = 0;

  friend auto operator<=>(const CollisionEvent&, const CollisionEvent&) = default;
};

/// Unordered pairs closer than collision_radius, sorted by (a, b).
std::vector<CollisionEvent> detect_collisions(const World& world);

/// Number of neighbours of particle i within its own perception radius
/// that share its type_id.
std::size_t same_type_neighbors(const World& world, const NeighborIndex& index, std::size_t i);

/// Decide which contestant becomes the recipe source. `index` must cover
/// the current positions with radius >= the largest perception radius when
/// the rule is Majority. Ties are broken by one coin from `rng`.
std::uint32_t compete(const CollisionEvent& event, CompetitionRule rule, const World& world,
                      const NeighborIndex& index, Rng& rng);

/// Copy the winner's recipe (mutated) into the loser and re-draw the loser's
/// active type from it. Returns true if the copy differs from the source.
bool transmit(World& world, std::uint32_t winner, std::uint32_t loser, Rng& rng);

/// The evolutionary phase of a step: detect, then compete and transmit in a
/// seeded permutation of the events, at most one transmission per particle.
void evolve(World& world, StepReport& report);

/// Apply every perturbation whose period divides the current step count.
std::vector<EnvEventRecord> perturb_environment(World& world,
                                                std::span<const EnvPerturbation> schedule);

/// One structured-text event log line per transmission.
std::string format_event(const TransmissionRecord& t);

}  // namespace swarm
