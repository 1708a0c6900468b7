#include "swarm/world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "swarm/evolution.hpp"
#include "swarm/morphogenesis.hpp"
#include "swarm/neighbor_index.hpp"
#include "swarm/parallel.hpp"

namespace swarm {

namespace {

constexpr double kEps = 1e-6;

std::string join(const std::vector<std::string>& errors) {
  std::ostringstream out;
  for (std::size_t i = 0; i < errors.size(); ++i) out << (i ? "; " : "") << errors[i];
  return out.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

std::string_view to_string(SwarmClass c) {
  switch (c) {
    case SwarmClass::Homogeneous: return "homogeneous";
    case SwarmClass::Heterogeneous: return "heterogeneous";
    case SwarmClass::Redifferentiable: return "rediff";
    case SwarmClass::InfoSharing: return "infoshare";
  }
  return "?";
}

std::string_view to_string(CompetitionRule r) {
  switch (r) {
    case CompetitionRule::Faster: return "faster";
    case CompetitionRule::Slower: return "slower";
    case CompetitionRule::FromBehind: return "behind";
    case CompetitionRule::Majority: return "majority";
  }
  return "?";
}

std::string_view to_string(Boundary b) {
  return b == Boundary::Toroidal ? "toroidal" : "open";
}

std::string_view to_string(EnvPerturbation::Kind k) {
  switch (k) {
    case EnvPerturbation::Kind::Scatter: return "scatter";
    case EnvPerturbation::Kind::Rescale: return "rescale";
    case EnvPerturbation::Kind::SwapBoundary: return "swap_boundary";
  }
  return "?";
}

SwarmClass parse_swarm_class(std::string_view s) {
  for (auto c : {SwarmClass::Homogeneous, SwarmClass::Heterogeneous, SwarmClass::Redifferentiable,
                 SwarmClass::InfoSharing}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown swarm class '" + std::string(s) + "'");
}

CompetitionRule parse_competition(std::string_view s) {
  for (auto r : {CompetitionRule::Faster, CompetitionRule::Slower, CompetitionRule::FromBehind,
                 CompetitionRule::Majority}) {
    if (s == to_string(r)) return r;
  }
  throw ConfigError("unknown competition rule '" + std::string(s) + "'");
}

Boundary parse_boundary(std::string_view s) {
  if (s == "toroidal") return Boundary::Toroidal;
  if (s == "open") return Boundary::Open;
  throw ConfigError("unknown boundary '" + std::string(s) + "'");
}

EnvPerturbation::Kind parse_perturbation_kind(std::string_view s) {
  for (auto k : {EnvPerturbation::Kind::Scatter, EnvPerturbation::Kind::Rescale,
                 EnvPerturbation::Kind::SwapBoundary}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown perturbation kind '" + std::string(s) + "'");
}

std::vector<std::string> WorldConfig::validate() const {
  std::vector<std::string> errs;
  if (dimensionality != 2 && dimensionality != 3) errs.emplace_back("dimensionality: must be 2 or 3");
  const int dims = dimensionality == 3 ? 3 : 2;
  for (int k = 0; k < dims; ++k) {
    if (!(extent[k] > 0.0) || !std::isfinite(extent[k])) {
      errs.push_back("extent[" + std::to_string(k) + "]: must be > 0");
    }
  }
  if (!(collision_radius >= 0.0)) errs.emplace_back("collision_radius: must be >= 0");
  if (!(info_share_radius >= 0.0)) errs.emplace_back("info_share_radius: must be >= 0");
  if (!(p_differentiate >= 0.0 && p_differentiate <= 1.0)) {
    errs.emplace_back("p_differentiate: must be in [0, 1]");
  }
  if (!(steer_magnitude >= 0.0)) errs.emplace_back("steer_magnitude: must be >= 0");
  if (max_population == 0) errs.emplace_back("max_population: must be > 0");
  if (threads < 1) errs.emplace_back("threads: must be >= 1");
  for (auto& e : mutation.validate()) errs.push_back("mutation." + e);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (!(ranges[i].lo >= 0.0 && ranges[i].lo <= ranges[i].hi)) {
      errs.push_back("ranges." + std::string(kParamNames[i]) + ": need 0 <= lo <= hi");
    }
  }
  for (std::size_t i = 0; i < environment.size(); ++i) {
    const auto& e = environment[i];
    const std::string at = "environment[" + std::to_string(i) + "].";
    if (e.period == 0) errs.push_back(at + "period: must be >= 1");
    if (!(e.fraction >= 0.0 && e.fraction <= 1.0)) errs.push_back(at + "fraction: must be in [0, 1]");
    if (!(e.factor > 0.0)) errs.push_back(at + "factor: must be > 0");
  }
  return errs;
}

World make_world(WorldConfig config) {
  if (auto errs = config.validate(); !errs.empty()) throw ConfigError(std::move(errs));
  if (config.dimensionality == 2) config.extent[2] = 0.0;
  World w;
  w.config = std::move(config);
  return w;
}

void set_active_type(Particle& p, const KineticParams& params) {
  p.active = params;
  p.type_id = type_key(params);
  const double s = norm(p.velocity);
  if (s > 0.0) p.velocity *= params.v_normal / s;
}

void spawn(World& world, const Recipe& r, const Vec& center, double radius) {
  const auto& cfg = world.config;
  if (!(radius >= 0.0)) throw std::invalid_argument("spawn radius must be >= 0");
  const Recipe recipe(r.entries(), cfg.ranges);
  const auto total = static_cast<std::size_t>(recipe.total_count());
  if (world.particles.size() + total > cfg.max_population) {
    throw std::length_error("spawn of " + std::to_string(total) +
                            " particles exceeds max_population " +
                            std::to_string(cfg.max_population));
  }
  if (cfg.swarm_class == SwarmClass::Homogeneous) {
    if (recipe.size() != 1) {
      throw ConfigError("homogeneous world requires a single-type recipe");
    }
    const auto key = type_key(recipe.entries().front().params);
    for (const auto& p : world.particles) {
      if (p.type_id != key) throw ConfigError("homogeneous world already holds another type");
    }
  }

  const auto index = static_cast<std::uint32_t>(world.recipes.size());
  world.recipes.push_back({recipe, world.next_lineage++, -1});

  const Space space = world.space();
  Rng rng = substream(cfg.seed, Stream::Spawn, world.spawn_count++, 0);
  world.particles.reserve(world.particles.size() + total);
  for (const auto& e : recipe.entries()) {
    const auto key = type_key(e.params);
    for (int c = 0; c < e.count; ++c) {
      Particle p;
      p.position = center + rng.in_ball(cfg.dimensionality, radius);
      if (cfg.dimensionality == 2) p.position[2] = 0.0;
      p.velocity = rng.unit_vector(cfg.dimensionality) * e.params.v_normal;
      space.confine(p.position, p.velocity);
      p.active = e.params;
      p.type_id = key;
      p.recipe = index;
      world.particles.push_back(p);
    }
  }
}

void advance_motion(World& world) {
  const std::size_t n = world.particles.size();
  if (n == 0) return;
  const auto& cfg = world.config;
  const Space space = world.space();
  const int dim = cfg.dimensionality;

  std::vector<Vec> pos(n);
  double rmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = world.particles[i].position;
    rmax = std::max(rmax, world.particles[i].active.r_perception);
  }
  const NeighborIndex index(space, pos, std::max(rmax, 1e-9),
                            cfg.search == NeighborSearch::BruteForce);

  const auto& particles = world.particles;
  std::vector<Vec> next_pos(n);
  std::vector<Vec> next_vel(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const Particle& p = particles[i];
    const KineticParams& k = p.active;
    Rng rng = substream(cfg.seed, Stream::Motion, world.step_count, i);

    std::size_t count = 0;
    Vec sum_offset;
    Vec sum_vel;
    Vec separation;
    index.for_each_neighbor(i, k.r_perception, [&](std::size_t j, const Vec& d, double d2) {
      ++count;
      sum_offset += d;
      sum_vel += particles[j].velocity;
      separation -= d * (1.0 / std::max(d2, kEps));
    });

    Vec accel;
    if (count == 0) {
      accel = rng.unit_vector(dim) * cfg.steer_magnitude;
    } else {
      const double inv = 1.0 / static_cast<double>(count);
      accel = sum_offset * (inv * k.w_cohesion) + (sum_vel * inv - p.velocity) * k.w_alignment +
              separation * k.w_separation;
    }
    if (rng.uniform() < k.p_random_steer) accel += rng.unit_vector(dim) * cfg.steer_magnitude;

    Vec v = p.velocity + accel;
    double speed = norm(v);
    if (speed > k.v_max) {
      v *= k.v_max / speed;
      speed = k.v_max;
    }
    v *= k.w_pacekeeping * (k.v_normal / std::max(speed, kEps)) + (1.0 - k.w_pacekeeping);
    if (const double s = norm(v); s > k.v_max) v *= k.v_max / s;

    Vec x = p.position + v;
    space.confine(x, v);
    next_pos[i] = x;
    next_vel[i] = v;
  });

  for (std::size_t i = 0; i < n; ++i) {
    world.particles[i].position = next_pos[i];
    world.particles[i].velocity = next_vel[i];
  }
}

StepReport step(World& world) {
  StepReport report;
  advance_motion(world);
  apply_class_hooks(world, &report);
  if (world.config.competition) evolve(world, report);
  ++world.step_count;
  if (!world.config.environment.empty()) {
    report.environment = perturb_environment(world, world.config.environment);
  }
  if (world.recipes.size() > 2 * world.particles.size() + 16) compact_recipes(world);
  report.step = world.step_count;
  return report;
}

void run(World& world, std::uint64_t n_steps, std::span<Observer* const> observers) {
  for (std::uint64_t s = 0; s < n_steps; ++s) {
    const StepReport report = step(world);
    for (Observer* obs : observers) {
      const auto every = std::max<std::uint64_t>(obs->interval(), 1);
      if (world.step_count % every != 0) continue;
      try {
        obs->observe(world, report);
      } catch (const std::exception& e) {
        throw ObserverError(world.step_count, e.what());
      }
    }
  }
}

void compact_recipes(World& world) {
  std::vector<std::int64_t> remap(world.recipes.size(), -1);
  for (const auto& p : world.particles) remap[p.recipe] = 0;
  std::vector<RecipeRecord> kept;
  for (std::size_t i = 0; i < world.recipes.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<std::int64_t>(kept.size());
    kept.push_back(std::move(world.recipes[i]));
  }
  for (auto& r : kept) {
    if (r.parent >= 0) r.parent = remap[static_cast<std::size_t>(r.parent)];
  }
  for (auto& p : world.particles) p.recipe = static_cast<std::uint32_t>(remap[p.recipe]);
  world.recipes = std::move(kept);
}

double polarization(const World& world) {
  if (world.particles.empty()) return 0.0;
  Vec sum;
  for (const auto& p : world.particles) {
    const double s = norm(p.velocity);
    if (s > 0.0) sum += p.velocity * (1.0 / s);
  }
  return norm(sum) / static_cast<double>(world.particles.size());
}

}  // namespace swarm
