#include "swarm/snapshot.hpp"

#include <bit>
#include <cstring>

#include "swarm/config.hpp"

namespace swarm {

static_assert(std::endian::native == std::endian::little, "snapshot codec assumes little-endian");

namespace {

constexpr char kMagic[8] = {'S', 'W', 'C', 'H', 'S', 'N', 'A', 'P'};

class Writer {
 public:
  template <class T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
  }
  void put_vec(const Vec& v) {
    for (int k = 0; k < 3; ++k) put(v[k]);
  }
  void put_params(const KineticParams& p) {
    for (double x : p.to_array()) put(x);
  }
  std::string out;
};

class Cursor {
 public:
  explicit Cursor(std::string_view b) : bytes_(b) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Vec get_vec() {
    Vec v;
    for (int k = 0; k < 3; ++k) v[k] = get<double>();
    return v;
  }
  KineticParams get_params() {
    std::array<double, kParamCount> a;
    for (double& x : a) x = get<double>();
    return KineticParams::from_array(a);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw SnapshotError("snapshot truncated at byte " + std::to_string(pos_));
    }
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_particle(Writer& w, const Particle& p) {
  w.put_vec(p.position);
  w.put_vec(p.velocity);
  w.put(p.type_id);
  w.put(p.recipe);
  w.put_params(p.active);
}

}  // namespace

std::string save_snapshot(const World& world) {
  Writer w;
  w.out.append(kMagic, sizeof kMagic);
  w.put(kSnapshotVersion);
  const std::string cfg = world_config_to_json(world.config).dump();
  w.put(static_cast<std::uint32_t>(cfg.size()));
  w.out += cfg;
  w.put(world.step_count);
  w.put(world.spawn_count);
  w.put(world.next_lineage);
  w.put(world.stats.collisions);
  w.put(world.stats.transmissions);
  w.put(world.stats.redifferentiations);
  w.put(static_cast<std::uint32_t>(world.recipes.size()));
  for (const auto& r : world.recipes) {
    w.put(r.lineage);
    w.put(r.parent);
    w.put(static_cast<std::uint32_t>(r.recipe.size()));
    for (const auto& e : r.recipe.entries()) {
      w.put(static_cast<std::int32_t>(e.count));
      w.put_params(e.params);
    }
  }
  w.put(static_cast<std::uint64_t>(world.particles.size()));
  for (const auto& p : world.particles) put_particle(w, p);
  return std::move(w.out);
}

World load_snapshot(std::string_view bytes) {
  Cursor c(bytes);
  if (c.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw SnapshotError("not a snapshot (bad magic)");
  }
  if (const auto v = c.get<std::uint32_t>(); v != kSnapshotVersion) {
    throw SnapshotError("unsupported snapshot version " + std::to_string(v));
  }
  const auto cfg_len = c.get<std::uint32_t>();
  std::vector<std::string> errors;
  WorldConfig cfg;
  try {
    cfg = world_config_from_json(nlohmann::json::parse(c.take(cfg_len)), "world", errors);
  } catch (const nlohmann::json::exception& e) {
    throw SnapshotError(std::string("snapshot config unreadable: ") + e.what());
  }
  if (!errors.empty()) throw SnapshotError(std::string("snapshot config invalid: ") + ConfigError(errors).what());

  World world = make_world(cfg);
  world.step_count = c.get<std::uint64_t>();
  world.spawn_count = c.get<std::uint64_t>();
  world.next_lineage = c.get<std::uint32_t>();
  world.stats.collisions = c.get<std::uint64_t>();
  world.stats.transmissions = c.get<std::uint64_t>();
  world.stats.redifferentiations = c.get<std::uint64_t>();
  const auto n_recipes = c.get<std::uint32_t>();
  world.recipes.reserve(n_recipes);
  for (std::uint32_t i = 0; i < n_recipes; ++i) {
    RecipeRecord r{Recipe{{{1, {}}}}, c.get<std::uint32_t>(), c.get<std::int64_t>()};
    const auto n_entries = c.get<std::uint32_t>();
    std::vector<RecipeEntry> es;
    for (std::uint32_t k = 0; k < n_entries; ++k) {
      const auto count = c.get<std::int32_t>();
      es.push_back({count, c.get_params()});
    }
    try {
      r.recipe = Recipe(std::move(es), cfg.ranges);
    } catch (const std::exception& e) {
      throw SnapshotError("snapshot recipe " + std::to_string(i) + " invalid: " + e.what());
    }
    world.recipes.push_back(std::move(r));
  }
  const auto n = c.get<std::uint64_t>();
  world.particles.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Particle p;
    p.position = c.get_vec();
    p.velocity = c.get_vec();
    p.type_id = c.get<std::uint64_t>();
    p.recipe = c.get<std::uint32_t>();
    p.active = c.get_params();
    if (p.recipe >= world.recipes.size()) {
      throw SnapshotError("particle " + std::to_string(i) + " references missing recipe");
    }
    world.particles.push_back(p);
  }
  if (!c.done()) throw SnapshotError("trailing bytes after snapshot");
  return world;
}

std::uint64_t state_hash(const World& world) {
  Writer w;
  w.put(world.step_count);
  for (const auto& p : world.particles) put_particle(w, p);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : w.out) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_hex(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char ch : bytes) {
    out += digits[ch >> 4];
    out += digits[ch & 15];
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  if (hex.size() % 2) throw SnapshotError("odd-length hex string");
  auto nib = [](char ch) -> int {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    throw SnapshotError(std::string("invalid hex digit '") + ch + "'");
  };
  std::string out(hex.size() / 2, '\0');
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<char>(nib(hex[2 * i]) << 4 | nib(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace swarm
