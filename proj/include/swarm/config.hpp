#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarm/analytics.hpp"
#include "swarm/harvest.hpp"
#include "swarm/world.hpp"

namespace swarm {

inline constexpr int kConfigFormatVersion = 1;

struct SpawnSpec {
  Recipe recipe{{{1, {}}}};
  std::optional<Vec> center;  // world center when unset
  double radius = 50.0;

  friend bool operator==(const SpawnSpec&, const SpawnSpec&) = default;
};

struct ObserverSettings {
  std::uint64_t record_interval = 100;  // state hash every k steps
  bool record_frames = false;           // full snapshots in the replay log
  std::uint64_t analytics_window = 200;
  std::uint64_t analytics_interval = 5;
  AnalyticsSettings analytics{};
  HarvestSettings harvest{};
  std::uint64_t harvest_interval = 10;

  friend bool operator==(const ObserverSettings&, const ObserverSettings&) = default;
};

struct RunConfig {
  int format_version = kConfigFormatVersion;
  WorldConfig world{};
  std::vector<SpawnSpec> spawns;
  std::uint64_t n_steps = 1000;
  ObserverSettings observers{};
  std::string output_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json world_config_to_json(const WorldConfig& c);
/// Reads a world config, appending "<path>.<field>: reason" to `errors`.
WorldConfig world_config_from_json(const nlohmann::json& j, const std::string& path,
                                   std::vector<std::string>& errors);

nlohmann::json run_config_to_json(const RunConfig& c);
/// Validates everything and throws one ConfigError listing all problems.
/// Relative recipe files resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);
/// Canonical text form: every default filled in, recipes inline.
std::string save_config(const RunConfig& c);

std::vector<EnvPerturbation> load_env_schedule(const std::filesystem::path& path);

/// Fresh world with every spawn of the config applied.
World build_world(const RunConfig& c);

}  // namespace swarm
