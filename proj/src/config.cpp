#include "swarm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace swarm {

using nlohmann::json;

namespace {

// Field reader that collects every problem instead of stopping at the first.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) fail("", "must be an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void fail(const std::string& key, const std::string& why) {
    errors_.push_back((key.empty() ? path_ : at(key)) + ": " + why);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!j_.is_object()) return nullptr;
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v->is_boolean()) return fail(key, "must be a boolean");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        return fail(key, "must be a non-negative integer");
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer()) return fail(key, "must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) return fail(key, "must be a number");
    } else {
      if (!v->is_string()) return fail(key, "must be a string");
    }
    out = v->get<T>();
  }

  template <class Parse, class T>
  void get_enum(const std::string& key, Parse parse, T& out) {
    std::string s;
    const std::size_t before = errors_.size();
    get(key, s);
    if (s.empty() || errors_.size() != before) return;
    try {
      out = parse(s);
    } catch (const std::exception&) {
      fail(key, "unknown value '" + s + "'");
    }
  }

  void finish() {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

json vec_json(const Vec& v, int dim) {
  json a = json::array();
  for (int k = 0; k < dim; ++k) a.push_back(v[k]);
  return a;
}

std::optional<Vec> read_vec(const json& j, int dim, const std::string& path,
                            std::vector<std::string>& errors) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    errors.push_back(path + ": must be an array of " + std::to_string(dim) + " numbers");
    return std::nullopt;
  }
  Vec v;
  for (int k = 0; k < dim; ++k) {
    if (!j[k].is_number()) {
      errors.push_back(path + "[" + std::to_string(k) + "]: must be a number");
      return std::nullopt;
    }
    v[k] = j[k].get<double>();
  }
  return v;
}

json env_json(const EnvPerturbation& e) {
  return {{"kind", to_string(e.kind)}, {"period", e.period}, {"fraction", e.fraction}, {"factor", e.factor}};
}

EnvPerturbation env_from_json(const json& j, const std::string& path, std::vector<std::string>& errors) {
  EnvPerturbation e;
  Reader r(j, path, errors);
  r.get_enum("kind", parse_perturbation_kind, e.kind);
  r.get("period", e.period);
  r.get("fraction", e.fraction);
  r.get("factor", e.factor);
  r.finish();
  return e;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError(p.string() + ": cannot open file");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string recipe_error_text(const RecipeError& e) {
  return "line " + std::to_string(e.line()) + ", column " + std::to_string(e.column()) + ": " +
         e.what();
}

}  // namespace

json world_config_to_json(const WorldConfig& c) {
  json ranges = json::object();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    ranges[std::string(kParamNames[i])] = {c.ranges[i].lo, c.ranges[i].hi};
  }
  json env = json::array();
  for (const auto& e : c.environment) env.push_back(env_json(e));
  const auto& m = c.mutation;
  return {
      {"dimensionality", c.dimensionality},
      {"extent", vec_json(c.extent, c.dimensionality == 3 ? 3 : 2)},
      {"boundary", to_string(c.boundary)},
      {"seed", c.seed},
      {"class", to_string(c.swarm_class)},
      {"competition", c.competition ? json(to_string(*c.competition)) : json(nullptr)},
      {"mutation",
       {{"p_point", m.p_point},
        {"point_sigma_rel", m.point_sigma_rel},
        {"p_duplicate_entry", m.p_duplicate_entry},
        {"p_delete_entry", m.p_delete_entry},
        {"p_resize_count", m.p_resize_count},
        {"count_resize_rel", m.count_resize_rel}}},
      {"collision_radius", c.collision_radius},
      {"p_differentiate", c.p_differentiate},
      {"info_share_radius", c.info_share_radius},
      {"ranges", ranges},
      {"steer_magnitude", c.steer_magnitude},
      {"max_population", c.max_population},
      {"environment", env},
      {"search", c.search == NeighborSearch::Grid ? "grid" : "brute_force"},
  };
}

WorldConfig world_config_from_json(const json& j, const std::string& path,
                                   std::vector<std::string>& errors) {
  WorldConfig c;
  Reader r(j, path, errors);
  r.get("dimensionality", c.dimensionality);
  if (const json* e = r.find("extent")) {
    const int dim = c.dimensionality == 3 ? 3 : 2;
    if (auto v = read_vec(*e, dim, r.at("extent"), errors)) c.extent = *v;
  }
  r.get_enum("boundary", parse_boundary, c.boundary);
  r.get("seed", c.seed);
  r.get_enum("class", parse_swarm_class, c.swarm_class);
  if (const json* comp = r.find("competition"); comp != nullptr && !comp->is_null()) {
    CompetitionRule rule{};
    const std::size_t before = errors.size();
    r.get_enum("competition", parse_competition, rule);
    if (errors.size() == before) c.competition = rule;
  }
  if (const json* m = r.find("mutation")) {
    Reader mr(*m, r.at("mutation"), errors);
    mr.get("p_point", c.mutation.p_point);
    mr.get("point_sigma_rel", c.mutation.point_sigma_rel);
    mr.get("p_duplicate_entry", c.mutation.p_duplicate_entry);
    mr.get("p_delete_entry", c.mutation.p_delete_entry);
    mr.get("p_resize_count", c.mutation.p_resize_count);
    mr.get("count_resize_rel", c.mutation.count_resize_rel);
    mr.finish();
  }
  r.get("collision_radius", c.collision_radius);
  r.get("p_differentiate", c.p_differentiate);
  r.get("info_share_radius", c.info_share_radius);
  if (const json* rg = r.find("ranges")) {
    Reader rr(*rg, r.at("ranges"), errors);
    for (std::size_t i = 0; i < kParamCount; ++i) {
      const std::string name(kParamNames[i]);
      const json* b = rr.find(name);
      if (b == nullptr) continue;
      if (!b->is_array() || b->size() != 2 || !(*b)[0].is_number() || !(*b)[1].is_number()) {
        rr.fail(name, "must be [lo, hi]");
        continue;
      }
      c.ranges.bounds[i] = {(*b)[0].get<double>(), (*b)[1].get<double>()};
    }
    rr.finish();
  }
  r.get("steer_magnitude", c.steer_magnitude);
  r.get("max_population", c.max_population);
  if (const json* env = r.find("environment")) {
    if (!env->is_array()) {
      r.fail("environment", "must be an array");
    } else {
      for (std::size_t i = 0; i < env->size(); ++i) {
        c.environment.push_back(
            env_from_json((*env)[i], r.at("environment") + "[" + std::to_string(i) + "]", errors));
      }
    }
  }
  std::string search;
  r.get("search", search);
  if (search == "brute_force") {
    c.search = NeighborSearch::BruteForce;
  } else if (!search.empty() && search != "grid") {
    r.fail("search", "unknown value '" + search + "'");
  }
  r.finish();
  if (c.dimensionality == 2) c.extent[2] = 0.0;
  return c;
}

json run_config_to_json(const RunConfig& c) {
  const int dim = c.world.dimensionality == 3 ? 3 : 2;
  json spawns = json::array();
  for (const auto& s : c.spawns) {
    json js = {{"recipe", serialize_recipe(s.recipe)}, {"radius", s.radius}};
    if (s.center) js["center"] = vec_json(*s.center, dim);
    spawns.push_back(std::move(js));
  }
  const auto& o = c.observers;
  return {
      {"format_version", c.format_version},
      {"world", world_config_to_json(c.world)},
      {"threads", c.world.threads},
      {"spawns", spawns},
      {"n_steps", c.n_steps},
      {"observers",
       {{"record_interval", o.record_interval},
        {"record_frames", o.record_frames},
        {"analytics_window", o.analytics_window},
        {"analytics_interval", o.analytics_interval},
        {"link_radius", o.analytics.link_radius},
        {"harvest_interval", o.harvest_interval},
        {"harvest",
         {{"link_radius", o.harvest.link_radius},
          {"min_object_size", o.harvest.min_object_size},
          {"min_lifetime", o.harvest.min_lifetime}}}}},
      {"output_dir", c.output_dir},
  };
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  std::vector<std::string> errors;
  RunConfig c;
  Reader r(j, "", errors);
  if (!errors.empty()) throw ConfigError(errors);

  const json* version = r.find("format_version");
  if (version == nullptr) {
    throw ConfigError("format_version: missing");
  }
  if (!version->is_number_integer() || version->get<int>() != kConfigFormatVersion) {
    throw ConfigError("format_version: unsupported version " + version->dump() + " (expected " +
                      std::to_string(kConfigFormatVersion) + ")");
  }
  if (const json* w = r.find("world")) c.world = world_config_from_json(*w, "world", errors);
  r.get("threads", c.world.threads);
  for (auto& e : c.world.validate()) errors.push_back("world." + e);

  if (const json* sp = r.find("spawns")) {
    if (!sp->is_array()) {
      r.fail("spawns", "must be an array");
    } else {
      const int dim = c.world.dimensionality == 3 ? 3 : 2;
      for (std::size_t i = 0; i < sp->size(); ++i) {
        const std::string at = "spawns[" + std::to_string(i) + "]";
        Reader sr((*sp)[i], at, errors);
        SpawnSpec s;
        std::string text;
        std::string file;
        sr.get("recipe", text);
        sr.get("recipe_file", file);
        const std::string key = file.empty() ? "recipe" : "recipe_file";
        if (text.empty() == file.empty()) {
          sr.fail("", "needs exactly one of recipe, recipe_file");
        } else {
          try {
            if (!file.empty()) {
              std::filesystem::path p(file);
              if (p.is_relative()) p = base_dir / p;
              text = read_file(p);
            }
            s.recipe = parse_recipe(text, c.world.ranges);
          } catch (const RecipeError& e) {
            sr.fail(key, recipe_error_text(e));
          } catch (const ConfigError& e) {
            sr.fail(key, e.what());
          }
        }
        if (const json* ctr = sr.find("center")) {
          s.center = read_vec(*ctr, dim, sr.at("center"), errors);
        }
        sr.get("radius", s.radius);
        if (!(s.radius >= 0.0)) sr.fail("radius", "must be >= 0");
        sr.finish();
        c.spawns.push_back(std::move(s));
      }
    }
  }
  r.get("n_steps", c.n_steps);
  if (const json* o = r.find("observers")) {
    auto& os = c.observers;
    Reader orr(*o, "observers", errors);
    orr.get("record_interval", os.record_interval);
    orr.get("record_frames", os.record_frames);
    orr.get("analytics_window", os.analytics_window);
    orr.get("analytics_interval", os.analytics_interval);
    orr.get("link_radius", os.analytics.link_radius);
    orr.get("harvest_interval", os.harvest_interval);
    if (const json* h = orr.find("harvest")) {
      Reader hr(*h, "observers.harvest", errors);
      hr.get("link_radius", os.harvest.link_radius);
      hr.get("min_object_size", os.harvest.min_object_size);
      hr.get("min_lifetime", os.harvest.min_lifetime);
      hr.finish();
      if (!(os.harvest.link_radius > 0.0)) hr.fail("link_radius", "must be > 0");
    }
    if (os.record_interval == 0) orr.fail("record_interval", "must be >= 1");
    if (os.analytics_interval == 0) orr.fail("analytics_interval", "must be >= 1");
    if (os.harvest_interval == 0) orr.fail("harvest_interval", "must be >= 1");
    if (!(os.analytics.link_radius > 0.0)) orr.fail("link_radius", "must be > 0");
    orr.finish();
  }
  r.get("output_dir", c.output_dir);
  r.finish();
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

std::string save_config(const RunConfig& c) { return run_config_to_json(c).dump(2) + "\n"; }

std::vector<EnvPerturbation> load_env_schedule(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw ConfigError(path.string() + ": must be an array of perturbations");
  std::vector<std::string> errors;
  std::vector<EnvPerturbation> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(env_from_json(j[i], "[" + std::to_string(i) + "]", errors));
  }
  WorldConfig probe;
  probe.environment = out;
  for (auto& e : probe.validate()) errors.push_back(e);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return out;
}

World build_world(const RunConfig& c) {
  World w = make_world(c.world);
  for (const auto& s : c.spawns) spawn(w, s.recipe, s.center.value_or(w.space().center()), s.radius);
  return w;
}

}  // namespace swarm
