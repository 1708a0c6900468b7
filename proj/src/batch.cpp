#include "swarm/batch.hpp"

#include "swarm/parallel.hpp"

namespace swarm {

World batch_world(const BatchSettings& s, SwarmClass c, std::uint64_t run) {
  WorldConfig cfg = s.base;
  cfg.swarm_class = c;
  cfg.seed = substream(s.base.seed, Stream::Batch, run, 0)();
  cfg.threads = 1;
  RandomRecipeOptions opts;
  opts.total_count = s.particles;
  opts.ranges = cfg.ranges;
  opts.min_types = c == SwarmClass::Homogeneous ? 1 : s.min_types;
  opts.max_types = c == SwarmClass::Homogeneous ? 1 : s.max_types;
  Rng rng = substream(s.base.seed, Stream::Batch, run, 1);
  World w = make_world(cfg);
  spawn(w, random_recipe(rng, opts), w.space().center(), s.spawn_radius);
  return w;
}

BehaviorVector run_batch_member(const BatchSettings& s, SwarmClass c, std::uint64_t run) {
  World w = batch_world(s, c, run);
  WindowSampler sampler(s.steps, s.window, s.interval);
  Observer* obs[] = {&sampler};
  swarm::run(w, s.steps, obs);
  return compute_behavior_vector(sampler.frames(), s.analytics);
}

std::vector<BehaviorVector> run_batch(const BatchSettings& s, SwarmClass c, std::uint64_t first,
                                      std::uint64_t n, int threads) {
  std::vector<BehaviorVector> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = run_batch_member(s, c, first + i); }, 1);
  return out;
}

}  // namespace swarm
