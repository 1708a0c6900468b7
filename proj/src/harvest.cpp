#include "swarm/harvest.hpp"

#include <algorithm>
#include <map>

namespace swarm {

namespace {

std::size_t overlap(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return n;
}

Recipe histogram(const Frame& f, const std::vector<std::uint32_t>& members) {
  std::vector<RecipeEntry> es;
  es.reserve(members.size());
  for (auto i : members) es.push_back({1, f.active[i]});
  return Recipe(std::move(es));
}

}  // namespace

std::vector<HarvestedObject> HarvestTracker::update(const Frame& frame) {
  const Clustering c = cluster_frame(frame, settings_.link_radius);
  std::vector<const std::vector<std::uint32_t>*> comps;
  for (const auto& m : c.members) {
    if (m.size() >= settings_.min_object_size) comps.push_back(&m);
  }

  // Best previous match per component.
  std::vector<std::optional<std::size_t>> match(comps.size());
  std::vector<double> jac(comps.size(), 0.0);
  for (std::size_t k = 0; k < comps.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t t = 0; t < live_.size(); ++t) {
      const auto& prev = objects_[live_[t].id].members;
      const std::size_t o = overlap(prev, *comps[k]);
      // live_ is ordered by id, so strict > keeps the lower id on ties.
      if (o > best) {
        best = o;
        match[k] = t;
        jac[k] = double(o) / double(prev.size() + comps[k]->size() - o);
      }
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> claims;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (match[k]) claims[*match[k]].push_back(k);
  }

  std::vector<Track> next;
  auto fresh = [&](std::optional<std::uint32_t> parent) {
    HarvestedObject o;
    o.id = static_cast<std::uint32_t>(objects_.size());
    o.parent = parent;
    o.first_seen = frame.step;
    objects_.push_back(std::move(o));
    qualified_.push_back(0);
    return Track{objects_.back().id};
  };
  std::vector<std::optional<Track>> assigned(comps.size());
  for (const auto& [t, ks] : claims) {
    if (ks.size() == 1) {
      Track tr = live_[t];
      tr.overlap_sum += jac[ks[0]];
      ++tr.overlap_n;
      assigned[ks[0]] = tr;
      continue;
    }
    FissionEvent ev{frame.step, live_[t].id, {}};
    for (auto k : ks) {
      assigned[k] = fresh(live_[t].id);
      ev.children.push_back(assigned[k]->id);
    }
    fissions_.push_back(std::move(ev));
  }
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (!assigned[k]) assigned[k] = fresh(std::nullopt);
    Track tr = *assigned[k];
    HarvestedObject& o = objects_[tr.id];
    o.members = *comps[k];
    o.member_count = o.members.size();
    o.recipe = histogram(frame, o.members);
    o.centroid = {};
    o.mean_velocity = {};
    for (auto i : o.members) {
      o.centroid += c.unwrapped[i];
      o.mean_velocity += frame.velocity[i];
    }
    const double inv = 1.0 / double(o.member_count);
    o.centroid = frame.space.wrap(o.centroid * inv);
    o.mean_velocity *= inv;
    o.last_seen = frame.step;
    o.stability_score = tr.overlap_n == 0 ? 1.0 : tr.overlap_sum / double(tr.overlap_n);
    next.push_back(tr);
  }
  std::sort(next.begin(), next.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
  live_ = std::move(next);

  std::vector<HarvestedObject> out;
  for (const auto& tr : live_) {
    const auto& o = objects_[tr.id];
    if (o.last_seen - o.first_seen >= settings_.min_lifetime) {
      qualified_[tr.id] = 1;
      out.push_back(o);
    }
  }
  return out;
}

std::vector<HarvestedObject> HarvestTracker::harvested() const {
  std::vector<HarvestedObject> out;
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    if (qualified_[i]) out.push_back(objects_[i]);
  }
  return out;
}

std::vector<HarvestedObject> harvest_objects(const World& world, HarvestTracker& tracker) {
  return tracker.update(make_frame(world));
}

std::string harvested_recipe_text(const HarvestedObject& obj, const std::string& run_id) {
  std::string out = "# run: " + run_id + "\n";
  out += "# object: " + std::to_string(obj.id);
  if (obj.parent) out += " (fission of " + std::to_string(*obj.parent) + ")";
  out += "\n# steps: " + std::to_string(obj.first_seen) + "-" + std::to_string(obj.last_seen) + "\n";
  out += "# members: " + std::to_string(obj.member_count) + "\n";
  return out + serialize_recipe(obj.recipe);
}

}  // namespace swarm
