#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <cstring>
#include <set>

#include "swarm/replay.hpp"
#include "swarm/service.hpp"
#include "swarm/snapshot.hpp"

using namespace swarm;
using nlohmann::json;

namespace {

const char* kRecipe =
    "60 * (60, 3, 6, 0.3, 0.4, 20, 0.1, 0.5)\n"
    "40 * (80, 2, 8, 0.6, 0.1, 40, 0.05, 0.7)";

RunConfig base_run(std::uint64_t seed = 5) {
  RunConfig c;
  c.world.seed = seed;
  c.world.extent = {500, 500, 0};
  c.world.threads = 1;
  c.spawns.push_back({parse_recipe(kRecipe), std::nullopt, 80});
  return c;
}

json request(const RunConfig& c, const json& iec = nullptr) {
  json r = {{"config", json::parse(save_config(c))}};
  if (!iec.is_null()) r["iec"] = iec;
  return r;
}

json cmd(const std::string& name, json extra = json::object()) {
  extra["command"] = name;
  return extra;
}

std::string session_hash(Session& s) { return s.status()["hash"]; }

std::vector<std::uint32_t> ids_of(const json& candidates) {
  std::vector<std::uint32_t> out;
  for (const auto& c : candidates) out.push_back(c["id"]);
  return out;
}

std::vector<std::string> recipes_of(const json& candidates) {
  std::vector<std::string> out;
  for (const auto& c : candidates) out.push_back(c["recipe"]);
  return out;
}

std::string error_of(Session& s, const json& c) {
  try {
    s.execute(c);
  } catch (const CommandError& e) {
    return e.what();
  }
  FAIL("expected a command error");
  return "";
}

template <class T>
T read_le(const std::string& b, std::size_t pos) {
  T v;
  std::memcpy(&v, b.data() + pos, sizeof(T));
  return v;
}

}  // namespace

TEST_CASE("color map follows the cohesion, alignment, separation mapping") {
  CHECK(color_map(KineticParams{60, 3, 6, 0, 0, 0, 0.1, 0.5}) == std::array<std::uint8_t, 3>{0, 0, 0});
  const ParamRanges ranges;
  CHECK(color_map(KineticParams{60, 3, 6, ranges[3].hi, 0, 0, 0.1, 0.5}) ==
        std::array<std::uint8_t, 3>{255, 0, 0});
  CHECK(color_map(KineticParams{60, 3, 6, 0, ranges[4].hi, 0, 0, 0}) ==
        std::array<std::uint8_t, 3>{0, 255, 0});
  CHECK(color_map(KineticParams{60, 3, 6, 0, 0, 100, 0, 0}) == std::array<std::uint8_t, 3>{0, 0, 255});
  CHECK(color_map(KineticParams{60, 3, 6, 0, 0, 50, 0, 0})[2] == 128);
  CHECK(color_map(KineticParams{60, 3, 6, 0.5, 0.25, 0, 0, 0}) == std::array<std::uint8_t, 3>{128, 64, 0});

  World w = build_world(base_run());
  for (const auto& p : w.particles) {
    for (const auto& q : w.particles) {
      if (p.type_id == q.type_id) REQUIRE(color_map(p.active) == color_map(q.active));
    }
  }
}

TEST_CASE("quantization error stays within one cell") {
  Rng rng(99);
  for (double extent : {1.0, 500.0, 1000.0, 12345.6}) {
    const double cell = extent / 65536.0;
    for (int i = 0; i < 20000; ++i) {
      const double x = rng.uniform() * extent;
      const double back = quantize_axis(x, extent) * cell;
      REQUIRE(x - back >= 0.0);
      REQUIRE(x - back <= cell);
    }
    CHECK(quantize_axis(0.0, extent) == 0);
    CHECK(quantize_axis(std::nextafter(extent, 0.0), extent) == 65535);
  }
}

TEST_CASE("frames follow the documented byte layout") {
  for (int dim : {2, 3}) {
    RunConfig c = base_run();
    c.world.dimensionality = dim;
    c.world.extent = {500, 400, dim == 3 ? 300.0 : 0.0};
    World w = build_world(c);
    run(w, 7);
    const std::string bytes = encode_frame(w);
    const std::size_t rec = 2 * dim + 3;
    REQUIRE(bytes.size() == 8 + w.particles.size() * rec);
    CHECK(read_le<std::uint32_t>(bytes, 0) == 7);
    CHECK(read_le<std::uint32_t>(bytes, 4) == w.particles.size());
    for (std::size_t i = 0; i < w.particles.size(); ++i) {
      const std::size_t at = 8 + i * rec;
      const auto& p = w.particles[i];
      for (int k = 0; k < dim; ++k) {
        REQUIRE(read_le<std::uint16_t>(bytes, at + 2 * k) == quantize_axis(p.position[k], c.world.extent[k]));
      }
      const auto col = color_map(p.active, c.world.ranges);
      for (int k = 0; k < 3; ++k) REQUIRE(static_cast<std::uint8_t>(bytes[at + 2 * dim + k]) == col[k]);
    }
    const DecodedFrame f = decode_frame(bytes, dim);
    CHECK(f.step == 7);
    CHECK(f.position.size() == w.particles.size());
    CHECK_THROWS_AS(decode_frame(bytes.substr(0, bytes.size() - 1), dim), std::invalid_argument);
    CHECK_THROWS_AS(decode_frame(bytes, dim == 2 ? 3 : 2), std::invalid_argument);
  }
  CHECK_THROWS_AS(decode_frame("abc", 2), std::invalid_argument);
}

TEST_CASE("a 10,000-particle 2D frame is 70,008 bytes") {
  World w = make_world(WorldConfig{});
  spawn(w, Recipe({{10000, KineticParams{60, 3, 6, 0.3, 0.4, 20, 0.1, 0.5}}}), w.space().center(), 300);
  CHECK(encode_frame(w).size() == 8 + 10000 * 7);
}

TEST_CASE("a full frame channel drops instead of blocking") {
  FrameChannel ch(1, 2);
  auto f = std::make_shared<const std::string>("x");
  CHECK(ch.push(1, f));
  CHECK(ch.push(2, f));
  CHECK_FALSE(ch.push(3, f));
  CHECK(ch.dropped() == 1);
  CHECK(ch.pop(std::chrono::milliseconds(1)) != nullptr);
  CHECK(ch.push(4, f));
  ch.close();
  CHECK_FALSE(ch.push(5, f));
  CHECK(ch.pop(std::chrono::milliseconds(1)) != nullptr);
  CHECK(ch.pop(std::chrono::milliseconds(1)) != nullptr);
  CHECK(ch.pop(std::chrono::milliseconds(1)) == nullptr);
  CHECK(ch.delivered() == 3);
}

TEST_CASE("decimation 10 over 100 steps delivers multiples of 10 in order") {
  Session s("t", base_run(), false, IecSettings{});
  auto ch = s.subscribe(10, 100);
  s.execute(cmd("step", {{"n", 100}}));
  std::vector<std::uint32_t> steps;
  while (auto f = ch->pop(std::chrono::milliseconds(10))) steps.push_back(decode_frame(*f, 2).step);
  CHECK(steps.size() <= 10);
  CHECK(steps.size() == 10);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    CHECK(steps[i] % 10 == 0);
    if (i > 0) CHECK(steps[i] > steps[i - 1]);
  }
  s.unsubscribe(ch);
}

TEST_CASE("frames reach a consumer in strictly increasing order while running") {
  Session s("t", base_run(), true, IecSettings{});
  auto ch = s.subscribe(3, 4);
  std::uint32_t last = 0;
  int got = 0;
  while (got < 40) {
    auto f = ch->pop(std::chrono::seconds(5));
    REQUIRE(f != nullptr);
    const auto step = decode_frame(*f, 2).step;
    CHECK(step % 3 == 0);
    if (got > 0) CHECK(step > last);
    last = step;
    ++got;
  }
  s.stop();
  CHECK(ch->closed());
}

TEST_CASE("a stalled consumer does not slow the simulation") {
  auto timed = [](bool stalled) {
    Session s("t", base_run(), false, IecSettings{});
    std::shared_ptr<FrameChannel> ch;
    if (stalled) ch = s.subscribe(1, 1);
    const auto t0 = std::chrono::steady_clock::now();
    s.execute(cmd("step", {{"n", 1000}}));
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ch) CHECK(ch->dropped() == 999);
    return dt;
  };
  double free_run = 1e9;
  double stalled = 1e9;
  for (int attempt = 0; attempt < 5; ++attempt) {
    free_run = std::min(free_run, timed(false));
    stalled = std::min(stalled, timed(true));
  }
  MESSAGE("free ", free_run, " s, stalled ", stalled, " s");
  CHECK(stalled <= free_run * 1.05);
}

TEST_CASE("step_n(0) leaves the state unchanged") {
  Session s("t", base_run(), false, IecSettings{});
  s.execute(cmd("step", {{"n", 5}}));
  const auto before = s.status();
  const auto r = s.execute(cmd("step", {{"n", 0}}));
  CHECK(r["step"] == 5);
  CHECK(r["hash"] == before["hash"]);
  CHECK(s.status() == before);
}

TEST_CASE("step_n advances exactly n steps then pauses") {
  Session s("t", base_run(), true, IecSettings{});
  s.execute(cmd("pause"));
  const std::uint64_t at = s.status()["step"];
  const auto r = s.execute(cmd("step", {{"n", 25}}));
  CHECK(r["step"] == at + 25);
  CHECK(r["status"] == "paused");
  CHECK(s.status()["step"] == at + 25);
}

TEST_CASE("pause and resume keep the hash sequence continuous") {
  Session a("a", base_run(), false, IecSettings{});
  Session b("b", base_run(), false, IecSettings{});
  a.execute(cmd("step", {{"n", 60}}));

  b.execute(cmd("resume"));
  std::uint64_t at = 0;
  while ((at = b.status()["step"]) < 10) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  b.execute(cmd("pause"));
  at = b.status()["step"];
  REQUIRE(at <= 60);
  b.execute(cmd("step", {{"n", 60 - at}}));
  CHECK(session_hash(a) == session_hash(b));
}

TEST_CASE("two sessions with the same config stay identical") {
  SessionManager m;
  const auto ia = m.create(request(base_run(8)));
  const auto ib = m.create(request(base_run(8)));
  CHECK(ia != ib);
  auto a = m.get(ia);
  auto b = m.get(ib);
  for (int i = 0; i < 4; ++i) {
    a->execute(cmd("step", {{"n", 30}}));
    b->execute(cmd("step", {{"n", 30}}));
    CHECK(session_hash(*a) == session_hash(*b));
  }
  World w = build_world(base_run(8));
  run(w, 120);
  CHECK(session_hash(*a) == hash_hex(state_hash(w)));
  CHECK(m.destroy(ia));
  CHECK_FALSE(m.destroy(ia));
  CHECK(m.get(ia) == nullptr);
  CHECK(m.size() == 1);
}

TEST_CASE("concurrent commands are linearized") {
  Session s("t", base_run(), false, IecSettings{});
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&s] {
      for (int i = 0; i < 10; ++i) s.execute(cmd("step", {{"n", 1}}));
    });
  }
  for (auto& t : threads) t.join();
  CHECK(s.status()["step"] == 80);
  World w = build_world(base_run());
  run(w, 80);
  CHECK(session_hash(s) == hash_hex(state_hash(w)));
  CHECK(s.events().size() == 80);
}

TEST_CASE("commands after stop fail cleanly") {
  Session s("t", base_run(), false, IecSettings{});
  s.stop();
  CHECK_THROWS_AS(s.execute(cmd("status")), CommandError);
}

TEST_CASE("inject spawns a recipe at the given location") {
  Session s("t", base_run(), false, IecSettings{});
  const auto r = s.execute(cmd("inject", {{"recipe", "7 * (50, 2, 4, 0.1, 0.1, 5, 0, 0.5)"},
                                          {"position", {100, 120}},
                                          {"radius", 0}}));
  CHECK(r["spawned"] == 7);
  CHECK(r["particles"] == 107);
  CHECK(s.status()["types"] == 3);

  CHECK(error_of(s, cmd("inject", {{"recipe", "7 * (50, 2"}, {"position", {1, 1}}}))
            .rfind("recipe line 1", 0) == 0);
  CHECK(error_of(s, cmd("inject", {{"recipe", "1 * (50, 2, 4, 0, 0, 0, 0, 0)"}, {"position", {1}}}))
            .find("'position'") != std::string::npos);
  CHECK(error_of(s, cmd("inject", {{"position", {1, 1}}})).find("inject needs") == 0);
}

TEST_CASE("malformed and unknown commands are rejected") {
  Session s("t", base_run(), false, IecSettings{});
  CHECK(error_of(s, json::array()).find("'command'") != std::string::npos);
  CHECK(error_of(s, cmd("explode")) == "unknown command 'explode'");
  CHECK(error_of(s, cmd("step", {{"n", -1}})).find("'n'") != std::string::npos);
  CHECK(error_of(s, cmd("step", {{"n", 1.5}})).find("'n'") != std::string::npos);
  CHECK(s.events().empty());
}

TEST_CASE("IEC starts with the default population of nine") {
  Session s("t", base_run(), false, IecSettings{});
  const auto r = s.execute(cmd("iec_propose"));
  REQUIRE(r["candidates"].size() == 9);
  CHECK(r["generation"] == 0);
  for (const auto& c : r["candidates"]) {
    const auto& frames = c["thumbnail"]["frames"];
    REQUIRE(frames.size() == 11);  // steps 0, 30, ..., 300
    const DecodedFrame first = decode_frame(from_hex(frames[0].get<std::string>()), 2);
    const DecodedFrame last = decode_frame(from_hex(frames[10].get<std::string>()), 2);
    CHECK(first.step == 0);
    CHECK(last.step == 300);
    CHECK(first.position.size() <= 150);
    CHECK(first.position.size() == last.position.size());
    CHECK_NOTHROW(parse_recipe(c["recipe"].get<std::string>()));
  }
}

TEST_CASE("thumbnail runs are capped at 150 particles") {
  const Recipe big({{300, KineticParams{60, 3, 6, 0.3, 0.4, 20, 0.1, 0.5}},
                    {100, KineticParams{80, 2, 8, 0.6, 0.1, 40, 0.05, 0.7}},
                    {2, KineticParams{40, 1, 2, 0.1, 0.1, 10, 0.0, 0.1}}});
  const Recipe capped = cap_recipe_count(big, 150);
  CHECK(capped.total_count() <= 150);
  CHECK(capped.size() == 3);
  std::multiset<int> counts;
  for (const auto& e : capped.entries()) counts.insert(e.count);
  CHECK(counts == std::multiset<int>{1, 37, 111});
  CHECK(cap_recipe_count(capped, 150) == capped);
}

TEST_CASE("selecting every candidate with mutation off keeps the generation") {
  RunConfig c = base_run();
  c.world.mutation = MutationConfig::none();
  Session s("t", c, false, IecSettings{});
  const auto before = s.execute(cmd("iec_select", {{"ids", {0, 1, 2, 3, 4, 5, 6, 7, 8}}}));
  const auto after = s.execute(cmd("iec_select", {{"ids", {0, 1, 2, 3, 4, 5, 6, 7, 8}}}));
  CHECK(after["generation"] == 2);
  CHECK(recipes_of(after["candidates"]) == recipes_of(before["candidates"]));
  CHECK(ids_of(after["candidates"]) == ids_of(before["candidates"]));
}

TEST_CASE("mix of a candidate with itself is that candidate") {
  Session s("t", base_run(), false, IecSettings{});
  const auto cands = s.execute(cmd("iec_select", {{"ids", {0, 1, 2, 3, 4, 5, 6, 7, 8}}}))["candidates"];
  for (std::uint32_t id = 0; id < 9; ++id) {
    const auto m = s.execute(cmd("iec_mix", {{"a", id}, {"b", id}}));
    CHECK(m["id"] == 9 + id);
    CHECK(m["recipe"] == cands[id]["recipe"]);
  }
  CHECK(s.status()["candidates"] == 18);
  CHECK(error_of(s, cmd("iec_mix", {{"a", 0}, {"b", 1}})).find("capacity") != std::string::npos);
}

TEST_CASE("seeded select of 2 of 9 is deterministic and keeps the population size") {
  auto run_select = [](std::uint64_t seed) {
    Session s("t", base_run(seed), false, IecSettings{});
    json last;
    for (int g = 0; g < 5; ++g) {
      const auto ids = ids_of(s.execute(cmd("iec_propose"))["candidates"]);
      last = s.execute(cmd("iec_select", {{"ids", {ids[1], ids[4]}}}));
      REQUIRE(last["candidates"].size() == 9);
      CHECK(last["candidates"][0]["id"] == ids[1]);
      CHECK(last["candidates"][1]["id"] == ids[4]);
    }
    return recipes_of(last["candidates"]);
  };
  const auto a = run_select(21);
  CHECK(a == run_select(21));
  CHECK(a != run_select(22));
}

TEST_CASE("IEC operations reject bad ids and bounds") {
  Session s("t", base_run(), false, IecSettings{});
  CHECK(error_of(s, cmd("iec_mutate", {{"id", 42}})) == "unknown candidate id 42");
  CHECK(error_of(s, cmd("iec_mix", {{"a", 0}})).find("'b'") != std::string::npos);
  CHECK(error_of(s, cmd("iec_select", {{"ids", json::array()}})).find("at least one") != std::string::npos);
  CHECK(error_of(s, cmd("iec_select", {{"ids", {0, 0}}})).find("duplicate") != std::string::npos);
  CHECK(error_of(s, cmd("iec_select", {{"ids", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}})).find("population") !=
        std::string::npos);
  CHECK(error_of(s, cmd("iec_select", {{"ids", {0, 99}}})) == "unknown candidate id 99");
  CHECK(error_of(s, cmd("iec_inject", {{"candidate", 77}, {"position", {1, 1}}})) == "unknown candidate id 77");
  CHECK(s.status()["candidates"] == 9);
  CHECK(s.status()["generation"] == 0);
}

TEST_CASE("mutate appends a new candidate") {
  Session s("t", base_run(), false, IecSettings{});
  const auto m = s.execute(cmd("iec_mutate", {{"id", 3}}));
  CHECK(m["id"] == 9);
  CHECK(s.status()["candidates"] == 10);
}

TEST_CASE("injecting a candidate spawns its recipe in the main world") {
  Session s("t", base_run(), false, IecSettings{});
  const auto cands = s.execute(cmd("iec_propose"))["candidates"];
  const int count = parse_recipe(cands[2]["recipe"].get<std::string>()).total_count();
  const auto r = s.execute(cmd("iec_inject", {{"candidate", 2}, {"position", {250, 250}}}));
  CHECK(r["spawned"] == count);
  CHECK(r["particles"] == 100 + count);
}

TEST_CASE("configured IEC candidates seed the population") {
  SessionManager m;
  const auto id = m.create(request(base_run(), {{"population", 4}, {"candidates", {kRecipe}}}));
  auto s = m.get(id);
  const auto st = s->status();
  CHECK(st["candidates"] == 4);
  const auto r = s->execute(cmd("iec_mutate", {{"id", 0}}));
  CHECK(r["id"] == 4);
  CHECK_THROWS_AS(m.create(request(base_run(), {{"population", 2}, {"candidates", {kRecipe, kRecipe, kRecipe}}})),
                  ConfigError);
  CHECK_THROWS_AS(m.create(request(base_run(), {{"colour", 1}})), ConfigError);
  CHECK_THROWS_AS(m.create(request(base_run(), {{"candidates", {"3 * (1"}}})), ConfigError);
  CHECK_THROWS_AS(m.create({{"config", json::parse(save_config(base_run()))}, {"status", "asleep"}}), ConfigError);
  CHECK_THROWS_AS(m.create({{"cfg", 1}}), ConfigError);
}

TEST_CASE("the event log records every applied command in order") {
  Session s("t", base_run(), false, IecSettings{});
  const std::vector<json> script = {
      cmd("step", {{"n", 3}}),
      cmd("iec_propose"),
      cmd("iec_select", {{"ids", {2, 5}}}),
      cmd("iec_mix", {{"a", 2}, {"b", 5}}),
      cmd("iec_mutate", {{"id", 16}}),
      cmd("iec_inject", {{"candidate", 17}, {"position", {10, 20}}}),
      cmd("resume"),
      cmd("pause"),
  };
  for (const auto& c : script) s.execute(c);
  s.status();
  CHECK_THROWS_AS(s.execute(cmd("iec_mutate", {{"id", 500}})), CommandError);

  const auto events = s.events();
  REQUIRE(events.size() == script.size());
  for (std::size_t i = 0; i < script.size(); ++i) {
    const json e = json::parse(events[i]);
    CHECK(e["seq"] == i);
    CHECK(e["command"] == script[i]);
    CHECK(e.contains("result"));
  }
  const json sel = json::parse(events[2]);
  CHECK(sel["result"]["candidates"].size() == 9);
  CHECK(sel["result"]["candidates"][0] == 2);
  CHECK(json::parse(events[3])["result"]["id"] == 16);  // select appended 9..15
}

TEST_CASE("HTTP endpoints drive a session end to end") {
  Server server;
  const int port = server.bind_any("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen(); });

  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(30, 0);

  auto bad = cli.Post("/sessions", "{ nope", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["error"].get<std::string>().find("invalid JSON") == 0);

  json broken = request(base_run());
  broken["config"]["world"]["class"] = "nope";
  broken["config"]["n_steps"] = -3;
  bad = cli.Post("/sessions", broken.dump(), "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["errors"].size() == 2);

  auto created = cli.Post("/sessions", request(base_run()).dump(), "application/json");
  REQUIRE(created);
  REQUIRE(created->status == 201);
  const json st = json::parse(created->body);
  const std::string id = st["id"];
  CHECK(st["status"] == "paused");
  CHECK(st["step"] == 0);
  CHECK(st["particles"] == 100);

  auto post = [&](const json& c) { return cli.Post("/sessions/" + id + "/commands", c.dump(), "application/json"); };
  auto r = post(cmd("step", {{"n", 20}}));
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["step"] == 20);
  r = post(cmd("iec_mix", {{"a", 0}, {"b", 0}}));
  REQUIRE(r);
  CHECK(json::parse(r->body)["id"] == 9);
  r = post(cmd("bogus"));
  REQUIRE(r);
  CHECK(r->status == 400);
  r = cli.Post("/sessions/" + id + "/commands", "[", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);

  auto got = cli.Get("/sessions/" + id);
  REQUIRE(got);
  CHECK(got->status == 200);
  CHECK(json::parse(got->body)["step"] == 20);

  World w = build_world(base_run());
  run(w, 20);
  CHECK(json::parse(got->body)["hash"] == hash_hex(state_hash(w)));

  auto ev = cli.Get("/sessions/" + id + "/events");
  REQUIRE(ev);
  const json events = json::parse(ev->body)["events"];
  REQUIRE(events.size() == 2);
  CHECK(events[0]["command"]["command"] == "step");
  CHECK(events[1]["command"]["command"] == "iec_mix");

  post(cmd("resume"));
  std::string body;
  auto stream = cli.Get("/sessions/" + id + "/stream?decimation=5&max_frames=6",
                        [&](const char* data, std::size_t n) {
                          body.append(data, n);
                          return true;
                        });
  REQUIRE(stream);
  CHECK(stream->status == 200);
  std::size_t pos = 0;
  std::vector<std::uint32_t> steps;
  while (pos + 4 <= body.size()) {
    const auto len = read_le<std::uint32_t>(body, pos);
    pos += 4;
    REQUIRE(pos + len <= body.size());
    const DecodedFrame f = decode_frame(std::string_view(body).substr(pos, len), 2);
    CHECK(f.position.size() == 100);
    steps.push_back(f.step);
    pos += len;
  }
  CHECK(pos == body.size());
  REQUIRE(steps.size() == 6);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    CHECK(steps[i] % 5 == 0);
    if (i > 0) CHECK(steps[i] > steps[i - 1]);
  }
  auto badstream = cli.Get("/sessions/" + id + "/stream?decimation=x");
  REQUIRE(badstream);
  CHECK(badstream->status == 400);

  auto del = cli.Delete("/sessions/" + id);
  REQUIRE(del);
  CHECK(del->status == 204);
  for (const std::string& path : {"/sessions/" + id, "/sessions/" + id + "/events", "/sessions/" + id + "/stream"}) {
    auto gone = cli.Get(path);
    REQUIRE(gone);
    CHECK(gone->status == 404);
  }
  del = cli.Delete("/sessions/" + id);
  REQUIRE(del);
  CHECK(del->status == 404);
  r = post(cmd("pause"));
  REQUIRE(r);
  CHECK(r->status == 404);

  server.stop();
  listener.join();
}
