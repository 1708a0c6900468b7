#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "swarm/world.hpp"

namespace swarm {

/// With probability `p_differentiate`, re-draw the active type from the
/// carried recipe, weighted by entry counts. Returns true if the active
/// type changed.
bool differentiate(Particle& p, const Recipe& carried, double p_differentiate, Rng& rng);

/// Quota-filling weights for re-differentiation: per entry,
/// (desired fraction - observed local fraction) clipped at zero and
/// renormalized. Falls back to the count-weighted distribution when every
/// quota is already met or there are no observations.
std::vector<double> quota_weights(const Recipe& r, std::span<const std::uint64_t> local_types);

/// Local information sharing. With probability `p_trigger`, adopt the
/// carried recipe of a uniformly chosen neighbour and re-differentiate with
/// quota-filling weights computed from the neighbours' active types.
/// No neighbours means no effect. Returns true when triggered.
bool share_information(Particle& p, std::span<const Particle* const> neighbors,
                       std::span<const RecipeRecord> table, double p_trigger, Rng& rng);

/// Per-step class behavior, run after motion: nothing for Homogeneous and
/// Heterogeneous, differentiation for Redifferentiable, sharing then
/// differentiation for InfoSharing.
void apply_class_hooks(World& world, StepReport* report = nullptr);

}  // namespace swarm
