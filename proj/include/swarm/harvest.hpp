#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swarm/analytics.hpp"
#include "swarm/recipe.hpp"
#include "swarm/world.hpp"

namespace swarm {

struct HarvestSettings {
  double link_radius = 30.0;
  std::size_t min_object_size = 10;
  std::uint64_t min_lifetime = 50;  // last_seen - first_seen

  friend bool operator==(const HarvestSettings&, const HarvestSettings&) = default;
};

struct HarvestedObject {
  std::uint32_t id = 0;
  std::optional<std::uint32_t> parent;  // set for fission products
  Recipe recipe{{{1, {}}}};             // histogram of members' active types
  std::vector<std::uint32_t> members;   // sorted particle indices
  std::size_t member_count = 0;
  Vec centroid;
  Vec mean_velocity;
  std::uint64_t first_seen = 0;
  std::uint64_t last_seen = 0;
  double stability_score = 1.0;  // mean Jaccard overlap between observations
};

struct FissionEvent {
  std::uint64_t step = 0;
  std::uint32_t parent = 0;
  std::vector<std::uint32_t> children;
};

/// Follows clusters across frames. Each component continues the previous
/// object it overlaps most (ties to the lower id). A previous object that is
/// the best match of two or more components has split: the components get
/// fresh ids linked to it and it is retired.
class HarvestTracker {
 public:
  explicit HarvestTracker(HarvestSettings settings = {}) : settings_(settings) {}

  /// Feeds one frame; returns the live objects old enough to harvest.
  std::vector<HarvestedObject> update(const Frame& frame);

  const HarvestSettings& settings() const { return settings_; }
  const std::vector<FissionEvent>& fissions() const { return fissions_; }
  /// Latest state of every object that ever qualified, ordered by id.
  std::vector<HarvestedObject> harvested() const;
  /// Latest state of every object seen, qualifying or not, ordered by id.
  const std::vector<HarvestedObject>& all_objects() const { return objects_; }

 private:
  struct Track {
    std::uint32_t id;
    double overlap_sum = 0.0;
    std::size_t overlap_n = 0;
  };

  HarvestSettings settings_;
  std::vector<HarvestedObject> objects_;  // indexed by id
  std::vector<Track> live_;
  std::vector<char> qualified_;
  std::vector<FissionEvent> fissions_;
};

std::vector<HarvestedObject> harvest_objects(const World& world, HarvestTracker& tracker);

/// Recipe text preceded by provenance comment lines.
std::string harvested_recipe_text(const HarvestedObject& obj, const std::string& run_id);

class HarvestObserver : public Observer {
 public:
  HarvestObserver(HarvestSettings settings, std::uint64_t interval)
      : tracker_(settings), interval_(interval == 0 ? 1 : interval) {}
  std::uint64_t interval() const override { return interval_; }
  void observe(const World& world, const StepReport&) override { harvest_objects(world, tracker_); }
  const HarvestTracker& tracker() const { return tracker_; }

 private:
  HarvestTracker tracker_;
  std::uint64_t interval_;
};

}  // namespace swarm
