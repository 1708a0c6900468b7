#include "swarm/morphogenesis.hpp"

#include <algorithm>

#include "swarm/neighbor_index.hpp"
#include "swarm/parallel.hpp"

namespace swarm {

namespace {

std::size_t draw_weighted(std::span<const double> w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  double target = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    target -= w[i];
    if (target < 0.0 && w[i] > 0.0) return i;
  }
  // Rounding fell off the end: last entry with positive weight.
  for (std::size_t i = w.size(); i-- > 0;) {
    if (w[i] > 0.0) return i;
  }
  return 0;
}

void redraw(Particle& p, const KineticParams& params) {
  if (params != p.active) set_active_type(p, params);
}

}  // namespace

bool differentiate(Particle& p, const Recipe& carried, double p_differentiate, Rng& rng) {
  if (!(rng.uniform() < p_differentiate)) return false;
  const auto before = p.type_id;
  redraw(p, carried.entries()[draw_entry(carried, rng)].params);
  return p.type_id != before;
}

std::vector<double> quota_weights(const Recipe& r, std::span<const std::uint64_t> local_types) {
  const auto& es = r.entries();
  const double total = r.total_count();
  std::vector<double> desired(es.size());
  for (std::size_t e = 0; e < es.size(); ++e) desired[e] = es[e].count / total;
  if (local_types.empty()) return desired;

  std::vector<double> w(es.size(), 0.0);
  double sum = 0.0;
  for (std::size_t e = 0; e < es.size(); ++e) {
    const auto key = type_key(es[e].params);
    const auto seen = std::count(local_types.begin(), local_types.end(), key);
    const double observed = static_cast<double>(seen) / static_cast<double>(local_types.size());
    w[e] = std::max(desired[e] - observed, 0.0);
    sum += w[e];
  }
  if (!(sum > 0.0)) return desired;
  for (double& x : w) x /= sum;
  return w;
}

bool share_information(Particle& p, std::span<const Particle* const> neighbors,
                       std::span<const RecipeRecord> table, double p_trigger, Rng& rng) {
  if (neighbors.empty()) return false;
  if (!(rng.uniform() < p_trigger)) return false;
  const Particle* source = neighbors[rng.below(neighbors.size())];
  p.recipe = source->recipe;
  const Recipe& r = table[source->recipe].recipe;

  std::vector<std::uint64_t> local;
  local.reserve(neighbors.size());
  for (const Particle* q : neighbors) local.push_back(q->type_id);
  const auto w = quota_weights(r, local);
  redraw(p, r.entries()[draw_weighted(w, rng)].params);
  return true;
}

void apply_class_hooks(World& world, StepReport* report) {
  const auto& cfg = world.config;
  if (cfg.swarm_class == SwarmClass::Homogeneous || cfg.swarm_class == SwarmClass::Heterogeneous) {
    return;
  }
  const std::size_t n = world.particles.size();
  std::vector<std::uint64_t> before(n);
  for (std::size_t i = 0; i < n; ++i) before[i] = world.particles[i].type_id;

  if (cfg.swarm_class == SwarmClass::InfoSharing && cfg.info_share_radius > 0.0 && n > 0) {
    std::vector<Vec> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = world.particles[i].position;
    const NeighborIndex index(world.space(), pos, cfg.info_share_radius,
                              cfg.search == NeighborSearch::BruteForce);
    const auto& current = world.particles;
    std::vector<Particle> next(current);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
      std::vector<std::size_t> ids = index.neighbors_of(i, cfg.info_share_radius);
      std::vector<const Particle*> nbrs;
      nbrs.reserve(ids.size());
      for (auto j : ids) nbrs.push_back(&current[j]);
      Rng rng = substream(cfg.seed, Stream::Share, world.step_count, i);
      share_information(next[i], nbrs, world.recipes, cfg.p_differentiate, rng);
    });
    world.particles = std::move(next);
  }

  parallel_for(n, cfg.threads, [&](std::size_t i) {
    Particle& p = world.particles[i];
    Rng rng = substream(cfg.seed, Stream::Differentiate, world.step_count, i);
    differentiate(p, world.carried(p), cfg.p_differentiate, rng);
  });

  std::size_t changed = 0;
  for (std::size_t i = 0; i < n; ++i) changed += world.particles[i].type_id != before[i];
  world.stats.redifferentiations += changed;
  if (report != nullptr) report->redifferentiations += changed;
}

}  // namespace swarm
