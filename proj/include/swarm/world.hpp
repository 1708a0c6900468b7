#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarm/recipe.hpp"
#include "swarm/space.hpp"

namespace swarm {

/// Morphogenetic system classes; each level adds one capability.
enum class SwarmClass { Homogeneous, Heterogeneous, Redifferentiable, InfoSharing };

enum class CompetitionRule { Faster, Slower, FromBehind, Majority };

enum class NeighborSearch { Grid, BruteForce };

struct EnvPerturbation {
  enum class Kind { Scatter, Rescale, SwapBoundary };
  Kind kind = Kind::Scatter;
  std::uint64_t period = 100;
  double fraction = 0.1;  // Scatter: share of particles re-placed
  double factor = 1.0;    // Rescale: extent multiplier

  friend bool operator==(const EnvPerturbation&, const EnvPerturbation&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  explicit ConfigError(const std::string& error) : ConfigError(std::vector<std::string>{error}) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

std::string_view to_string(SwarmClass c);
std::string_view to_string(CompetitionRule r);
std::string_view to_string(Boundary b);
std::string_view to_string(EnvPerturbation::Kind k);
SwarmClass parse_swarm_class(std::string_view s);
CompetitionRule parse_competition(std::string_view s);
Boundary parse_boundary(std::string_view s);
EnvPerturbation::Kind parse_perturbation_kind(std::string_view s);

struct WorldConfig {
  int dimensionality = 2;
  Vec extent{1000.0, 1000.0, 1000.0};
  Boundary boundary = Boundary::Toroidal;
  std::uint64_t seed = 0;
  SwarmClass swarm_class = SwarmClass::Heterogeneous;
  std::optional<CompetitionRule> competition;
  MutationConfig mutation{};
  double collision_radius = 10.0;
  double p_differentiate = 0.005;
  double info_share_radius = 30.0;
  ParamRanges ranges{};
  double steer_magnitude = 0.5;
  std::size_t max_population = 100000;
  std::vector<EnvPerturbation> environment;
  NeighborSearch search = NeighborSearch::Grid;
  int threads = 1;  // does not influence results

  Space space() const { return {dimensionality, extent, boundary}; }
  std::vector<std::string> validate() const;

  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

struct Particle {
  Vec position;
  Vec velocity;
  KineticParams active;
  std::uint64_t type_id = 0;
  std::uint32_t recipe = 0;  // index into World::recipes

  friend bool operator==(const Particle&, const Particle&) = default;
};

/// One carried genome. `lineage` names the spawned ancestor and survives
/// table compaction; `parent` is a table index or -1.
struct RecipeRecord {
  Recipe recipe;
  std::uint32_t lineage = 0;
  std::int64_t parent = -1;

  friend bool operator==(const RecipeRecord&, const RecipeRecord&) = default;
};

struct WorldStats {
  std::uint64_t collisions = 0;
  std::uint64_t transmissions = 0;
  std::uint64_t redifferentiations = 0;

  friend bool operator==(const WorldStats&, const WorldStats&) = default;
};

struct World {
  WorldConfig config;
  std::vector<Particle> particles;
  std::vector<RecipeRecord> recipes;
  std::uint64_t step_count = 0;
  std::uint64_t spawn_count = 0;
  std::uint32_t next_lineage = 0;
  WorldStats stats;

  Space space() const { return config.space(); }
  const Recipe& carried(const Particle& p) const { return recipes[p.recipe].recipe; }

  friend bool operator==(const World&, const World&) = default;
};

/// Validated empty world; throws ConfigError.
World make_world(WorldConfig config);

/// Give `p` a new active type. Direction of motion is kept and the speed is
/// reset to the new type's normal speed.
void set_active_type(Particle& p, const KineticParams& params);

/// Add total_count(r) particles uniformly in the ball (center, radius).
void spawn(World& world, const Recipe& r, const Vec& center, double radius);

struct TransmissionRecord {
  std::uint64_t step = 0;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  CompetitionRule rule = CompetitionRule::Majority;
  std::uint32_t winner = 0;
  bool mutated = false;
};

struct EnvEventRecord {
  std::uint64_t step = 0;
  EnvPerturbation::Kind kind = EnvPerturbation::Kind::Scatter;
  std::size_t affected = 0;
};

/// What happened during one step, for event logs and samplers.
struct StepReport {
  std::uint64_t step = 0;  // step_count after the step
  std::size_t collisions = 0;
  std::size_t redifferentiations = 0;
  std::vector<TransmissionRecord> transmissions;
  std::vector<EnvEventRecord> environment;
};

/// Motion phase only: forces from the pre-step state, then a synchronous
/// commit. Exposed for tests and for the class-hook layering.
void advance_motion(World& world);

/// One full update: motion, class hooks, evolution, environment.
StepReport step(World& world);

class Observer {
 public:
  virtual ~Observer() = default;
  virtual std::uint64_t interval() const { return 1; }
  virtual void observe(const World& world, const StepReport& report) = 0;
};

class ObserverError : public std::runtime_error {
 public:
  ObserverError(std::uint64_t step, const std::string& what)
      : std::runtime_error("observer failed at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

/// Steps `n_steps` times. Observers fire after steps whose count is a
/// multiple of their interval. A throwing observer stops the run with the
/// world left at the fully committed step it was observing.
void run(World& world, std::uint64_t n_steps, std::span<Observer* const> observers = {});

/// Rebuild the recipe table without unreferenced records.
void compact_recipes(World& world);

/// Polarization |sum of unit velocities| / n.
double polarization(const World& world);

}  // namespace swarm
