#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "swarm/config.hpp"

using namespace swarm;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("swarmchem_cfg_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::vector<std::string> errors_of(const json& j) {
  try {
    run_config_from_json(j);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& needle) {
  for (const auto& e : errs) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

const char* kRecipe = "38 * (93.1, 4.3, 11.7, 0.42, 0.51, 18.9, 0.12, 0.83)";

}  // namespace

TEST_CASE("minimal config fills in the defaults") {
  const RunConfig c = run_config_from_json({{"format_version", 1}, {"spawns", {{{"recipe", kRecipe}}}}});
  CHECK(c.world == WorldConfig{});
  CHECK(c.n_steps == 1000);
  CHECK(c.observers == ObserverSettings{});
  REQUIRE(c.spawns.size() == 1);
  CHECK(c.spawns[0].recipe == parse_recipe(kRecipe));
  CHECK_FALSE(c.spawns[0].center.has_value());
  CHECK(c.spawns[0].radius == 50.0);
  CHECK(c.world.collision_radius == 10.0);
  CHECK(c.world.p_differentiate == 0.005);
  CHECK(c.world.steer_magnitude == 0.5);
  CHECK(c.world.boundary == Boundary::Toroidal);
  CHECK(c.observers.record_interval == 100);
  CHECK(c.observers.analytics_window == 200);
  CHECK(c.observers.analytics_interval == 5);
}

TEST_CASE("v_normal above v_max is rejected with the field named") {
  const auto errs = errors_of(
      {{"format_version", 1}, {"spawns", {{{"recipe", "5 * (10, 9, 3, 0, 0, 0, 0, 0)"}}}}});
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].rfind("spawns[0].recipe:", 0) == 0);
  CHECK(mentions(errs, "v_normal"));
}

TEST_CASE("every problem is reported at once") {
  const json j = {{"format_version", 1},
                  {"world",
                   {{"dimensionality", 3},
                    {"extent", {100, 100}},
                    {"class", "nope"},
                    {"mutation", {{"p_point", 2.0}}},
                    {"colour", 1}}},
                  {"spawns", {{{"recipe", "0 * (1, 1, 1, 0, 0, 0, 0, 0)"}, {"radius", -1}}}},
                  {"observers", {{"record_interval", 0}}},
                  {"bogus", true}};
  const auto errs = errors_of(j);
  CHECK(mentions(errs, "world.extent: must be an array of 3 numbers"));
  CHECK(mentions(errs, "world.class: unknown value 'nope'"));
  CHECK(mentions(errs, "world.mutation.p_point"));
  CHECK(mentions(errs, "world.colour: unknown field"));
  CHECK(mentions(errs, "spawns[0].recipe"));
  CHECK(mentions(errs, "spawns[0].radius: must be >= 0"));
  CHECK(mentions(errs, "observers.record_interval: must be >= 1"));
  CHECK(mentions(errs, "bogus: unknown field"));
  CHECK(errs.size() >= 8);
}

TEST_CASE("format version is required and checked") {
  CHECK(mentions(errors_of({{"n_steps", 5}}), "format_version: missing"));
  CHECK(mentions(errors_of({{"format_version", 2}}), "unsupported version 2"));
  CHECK(mentions(errors_of(json::array()), "must be an object"));
}

TEST_CASE("canonical save is a fixed point of load") {
  RunConfig c;
  c.world.dimensionality = 3;
  c.world.extent = {300, 400, 500};
  c.world.boundary = Boundary::Open;
  c.world.seed = 1234567890123ULL;
  c.world.swarm_class = SwarmClass::InfoSharing;
  c.world.competition = CompetitionRule::FromBehind;
  c.world.mutation.p_point = 0.2;
  c.world.ranges.bounds[0] = {0, 200};
  c.world.environment = {{EnvPerturbation::Kind::Rescale, 250, 0.0, 1.5}};
  c.world.search = NeighborSearch::BruteForce;
  c.world.threads = 3;
  c.spawns.push_back({parse_recipe("10 * (150, 2, 4, 0.5, 0.5, 10, 0.1, 0.5)"), Vec{10, 20, 30}, 12.5});
  c.spawns.push_back({parse_recipe(kRecipe), std::nullopt, 40});
  c.n_steps = 777;
  c.observers.record_frames = true;
  c.observers.harvest.min_lifetime = 7;
  c.output_dir = "results/x";

  const std::string text = save_config(c);
  const RunConfig back = run_config_from_json(json::parse(text));
  CHECK(back == c);
  CHECK(save_config(back) == text);
}

TEST_CASE("2D configs ignore the third extent component") {
  const RunConfig c = run_config_from_json({{"format_version", 1}, {"world", {{"extent", {50, 60}}}}});
  CHECK(c.world.extent == Vec{50, 60, 0});
}

TEST_CASE("recipe files resolve relative to the config") {
  const auto dir = temp_dir("files");
  write(dir / "a.recipe", "# blob\n12 * (60, 2, 4, 0.1, 0.2, 10, 0.05, 0.5)\n");
  write(dir / "run.json",
        json{{"format_version", 1},
             {"n_steps", 10},
             {"spawns", {{{"recipe_file", "a.recipe"}, {"center", {100, 100}}, {"radius", 5}}}}}
            .dump());
  const RunConfig c = load_config(dir / "run.json");
  REQUIRE(c.spawns.size() == 1);
  CHECK(c.spawns[0].recipe.total_count() == 12);
  const World w = build_world(c);
  CHECK(w.particles.size() == 12);
  for (const auto& p : w.particles) CHECK(std::hypot(p.position[0] - 100, p.position[1] - 100) <= 5 + 1e-9);

  write(dir / "bad.json",
        json{{"format_version", 1}, {"spawns", {{{"recipe_file", "missing.recipe"}}}}}.dump());
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);
  write(dir / "broken.json", "{ not json");
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
}

TEST_CASE("a spawn needs exactly one recipe source") {
  CHECK(mentions(errors_of({{"format_version", 1}, {"spawns", {json::object()}}}),
                 "needs exactly one of recipe, recipe_file"));
}

TEST_CASE("environment schedules load and validate") {
  const auto dir = temp_dir("env");
  write(dir / "ok.json", R"([{"kind": "scatter", "period": 100, "fraction": 0.1},
                            {"kind": "swap_boundary", "period": 500}])");
  const auto sched = load_env_schedule(dir / "ok.json");
  REQUIRE(sched.size() == 2);
  CHECK(sched[0].kind == EnvPerturbation::Kind::Scatter);
  CHECK(sched[1].period == 500);

  write(dir / "bad.json", R"([{"kind": "earthquake", "period": 0}])");
  try {
    load_env_schedule(dir / "bad.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e.errors(), "[0].kind: unknown value 'earthquake'"));
    CHECK(mentions(e.errors(), "period: must be >= 1"));
  }
}

TEST_CASE("build_world centers spawns on the world by default") {
  const RunConfig c =
      run_config_from_json({{"format_version", 1}, {"spawns", {{{"recipe", kRecipe}, {"radius", 0}}}}});
  const World w = build_world(c);
  REQUIRE(w.particles.size() == 38);
  CHECK(w.particles[0].position == Vec{500, 500, 0});
}

TEST_CASE("homogeneous config with a two-type recipe fails to build") {
  const RunConfig c = run_config_from_json(
      {{"format_version", 1},
       {"world", {{"class", "homogeneous"}}},
       {"spawns", {{{"recipe", "1 * (1, 1, 1, 0, 0, 0, 0, 0)\n1 * (2, 1, 1, 0, 0, 0, 0, 0)"}}}}});
  CHECK_THROWS_AS(build_world(c), ConfigError);
}
