#include "swarm/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace swarm {

namespace {

std::vector<Vec> positions_of(const World& world) {
  std::vector<Vec> pos(world.particles.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = world.particles[i].position;
  return pos;
}

}  // namespace

std::vector<CollisionEvent> detect_collisions(const World& world) {
  std::vector<CollisionEvent> events;
  const double radius = world.config.collision_radius;
  if (!(radius > 0.0) || world.particles.size() < 2) return events;
  const auto pos = positions_of(world);
  const NeighborIndex index(world.space(), pos, radius,
                            world.config.search == NeighborSearch::BruteForce);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    index.for_each_neighbor(i, radius, [&](std::size_t j, const Vec&, double) {
      if (j > i) {
        events.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                          world.step_count});
      }
    });
  }
  std::sort(events.begin(), events.end());
  return events;
}

std::size_t same_type_neighbors(const World& world, const NeighborIndex& index, std::size_t i) {
  const Particle& p = world.particles[i];
  std::size_t n = 0;
  index.for_each_neighbor(i, p.active.r_perception, [&](std::size_t j, const Vec&, double) {
    n += world.particles[j].type_id == p.type_id;
  });
  return n;
}

std::uint32_t compete(const CollisionEvent& event, CompetitionRule rule, const World& world,
                      const NeighborIndex& index, Rng& rng) {
  const Particle& a = world.particles[event.a];
  const Particle& b = world.particles[event.b];
  double score_a = 0.0;
  double score_b = 0.0;
  switch (rule) {
    case CompetitionRule::Faster:
      score_a = norm(a.velocity);
      score_b = norm(b.velocity);
      break;
    case CompetitionRule::Slower:
      score_a = -norm(a.velocity);
      score_b = -norm(b.velocity);
      break;
    case CompetitionRule::FromBehind: {
      const Vec d = world.space().displacement(a.position, b.position);
      score_a = dot(a.velocity, d);
      score_b = dot(b.velocity, -d);
      break;
    }
    case CompetitionRule::Majority:
      score_a = static_cast<double>(same_type_neighbors(world, index, event.a));
      score_b = static_cast<double>(same_type_neighbors(world, index, event.b));
      break;
  }
  if (score_a > score_b) return event.a;
  if (score_b > score_a) return event.b;
  return rng.coin() ? event.a : event.b;
}

bool transmit(World& world, std::uint32_t winner, std::uint32_t loser, Rng& rng) {
  const std::uint32_t source = world.particles[winner].recipe;
  Recipe child = mutate_recipe(world.recipes[source].recipe, world.config.mutation, rng,
                               world.config.ranges);
  const bool mutated = !(child == world.recipes[source].recipe);
  Particle& dest = world.particles[loser];
  if (mutated) {
    world.recipes.push_back(
        {std::move(child), world.recipes[source].lineage, static_cast<std::int64_t>(source)});
    dest.recipe = static_cast<std::uint32_t>(world.recipes.size() - 1);
  } else {
    dest.recipe = source;
  }
  const Recipe& carried = world.recipes[dest.recipe].recipe;
  const auto& params = carried.entries()[draw_entry(carried, rng)].params;
  if (params != dest.active) set_active_type(dest, params);
  ++world.stats.transmissions;
  return mutated;
}

void evolve(World& world, StepReport& report) {
  const auto events = detect_collisions(world);
  report.collisions += events.size();
  world.stats.collisions += events.size();
  if (events.empty()) return;

  const auto rule = *world.config.competition;
  const auto pos = positions_of(world);
  double rmax = 1e-9;
  for (const auto& p : world.particles) rmax = std::max(rmax, p.active.r_perception);
  const NeighborIndex index(world.space(), pos, rmax,
                            world.config.search == NeighborSearch::BruteForce);

  // Seeded processing order; index order would let low-index pairs take
  // every particle's one transmission slot.
  const auto seed = world.config.seed;
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle = substream(seed, Stream::Order, world.step_count, 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

  std::vector<char> involved(world.particles.size(), 0);
  for (const std::size_t e : order) {
    const CollisionEvent& ev = events[e];
    if (involved[ev.a] || involved[ev.b]) continue;
    Rng coin = substream(seed, Stream::Compete, world.step_count,
                         (static_cast<std::uint64_t>(ev.a) << 32) | ev.b);
    const auto winner = compete(ev, rule, world, index, coin);
    const auto loser = winner == ev.a ? ev.b : ev.a;
    Rng mrng = substream(seed, Stream::Transmit, world.step_count, loser);
    const bool mutated = transmit(world, winner, loser, mrng);
    involved[ev.a] = involved[ev.b] = 1;
    report.transmissions.push_back({world.step_count, ev.a, ev.b, rule, winner, mutated});
  }
}

std::vector<EnvEventRecord> perturb_environment(World& world,
                                                std::span<const EnvPerturbation> schedule) {
  std::vector<EnvEventRecord> out;
  auto& cfg = world.config;
  const std::size_t n = world.particles.size();
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const auto& e = schedule[k];
    if (e.period == 0 || world.step_count % e.period != 0) continue;
    Rng rng = substream(cfg.seed, Stream::Environment, world.step_count, k);
    EnvEventRecord rec{world.step_count, e.kind, 0};
    switch (e.kind) {
      case EnvPerturbation::Kind::Scatter: {
        const auto m = static_cast<std::size_t>(std::floor(e.fraction * static_cast<double>(n)));
        std::vector<std::size_t> pick(n);
        std::iota(pick.begin(), pick.end(), 0);
        for (std::size_t i = 0; i < m; ++i) {
          std::swap(pick[i], pick[i + rng.below(n - i)]);
          Vec& x = world.particles[pick[i]].position;
          for (int d = 0; d < cfg.dimensionality; ++d) x[d] = rng.uniform() * cfg.extent[d];
        }
        rec.affected = m;
        break;
      }
      case EnvPerturbation::Kind::Rescale:
        for (int d = 0; d < cfg.dimensionality; ++d) cfg.extent[d] *= e.factor;
        for (auto& p : world.particles) {
          for (int d = 0; d < cfg.dimensionality; ++d) p.position[d] *= e.factor;
          if (cfg.boundary == Boundary::Toroidal) p.position = world.space().wrap(p.position);
        }
        rec.affected = n;
        break;
      case EnvPerturbation::Kind::SwapBoundary:
        cfg.boundary = cfg.boundary == Boundary::Toroidal ? Boundary::Open : Boundary::Toroidal;
        rec.affected = n;
        break;
    }
    out.push_back(rec);
  }
  return out;
}

std::string format_event(const TransmissionRecord& t) {
  std::ostringstream out;
  out << "step=" << t.step << " pair=" << t.a << "," << t.b << " rule=" << to_string(t.rule)
      << " winner=" << t.winner << " mutated=" << (t.mutated ? 1 : 0);
  return out.str();
}

}  // namespace swarm
