#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/config.hpp"
#include "swarm/world.hpp"

namespace swarm {

/// Corrupt, truncated or divergent log. `step` is the first step that could
/// not be verified.
class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::uint64_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

struct ReplayRecord {
  std::uint64_t step = 0;
  std::uint64_t hash = 0;
  std::optional<std::string> snapshot;  // raw snapshot bytes in full mode
};

/// Writes a JSON-lines log: header, a record at step 0 and every
/// `interval` steps, then an end marker from finish(). In full mode each
/// record carries a snapshot so replay needs no physics.
class ReplayRecorder : public Observer {
 public:
  ReplayRecorder(std::ostream& out, const RunConfig& config, bool full);
  std::uint64_t interval() const override { return interval_; }
  void begin(const World& world);
  void observe(const World& world, const StepReport& report) override;
  void finish(const World& world);

 private:
  void write(const World& world);
  std::ostream& out_;
  bool full_;
  std::uint64_t interval_;
  std::uint64_t last_ = 0;
};

struct ReplayResult {
  bool full = false;
  RunConfig config;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> hashes;  // (step, hash)
  World final_world;
};

/// Verifies every record. Full logs are checked snapshot by snapshot;
/// header-only logs are re-simulated from the recorded config.
ReplayResult replay(std::istream& log);

std::string hash_hex(std::uint64_t h);

}  // namespace swarm
