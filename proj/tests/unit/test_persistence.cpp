#include <doctest.h>

#include <sstream>

#include "swarm/replay.hpp"
#include "swarm/snapshot.hpp"

using namespace swarm;

namespace {

RunConfig small_run(std::uint64_t seed, std::uint64_t steps, std::uint64_t interval) {
  RunConfig c;
  c.world.seed = seed;
  c.world.extent = {400, 400, 0};
  c.world.swarm_class = SwarmClass::InfoSharing;
  c.world.competition = CompetitionRule::Majority;
  c.world.p_differentiate = 0.02;
  c.spawns.push_back({parse_recipe("40 * (60, 3, 6, 0.3, 0.4, 20, 0.1, 0.5)\n"
                                   "30 * (80, 2, 8, 0.6, 0.1, 40, 0.05, 0.7)"),
                      std::nullopt, 60});
  c.n_steps = steps;
  c.observers.record_interval = interval;
  return c;
}

std::string record(const RunConfig& c, bool full, World* out = nullptr) {
  std::ostringstream log;
  World w = build_world(c);
  ReplayRecorder rec(log, c, full);
  rec.begin(w);
  Observer* obs[] = {&rec};
  run(w, c.n_steps, obs);
  rec.finish(w);
  if (out) *out = w;
  return log.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string join(const std::vector<std::string>& ls) {
  std::string out;
  for (const auto& l : ls) out += l + "\n";
  return out;
}

ReplayError replay_error(const std::string& log) {
  std::istringstream in(log);
  try {
    replay(in);
  } catch (const ReplayError& e) {
    return e;
  }
  FAIL("expected a replay error");
  return ReplayError(0, "");
}

}  // namespace

TEST_CASE("snapshots round-trip exactly") {
  World w = build_world(small_run(3, 0, 10));
  w.config.environment = {{EnvPerturbation::Kind::Scatter, 7, 0.25, 1.0}};
  w.config.threads = 1;
  run(w, 35);
  const std::string bytes = save_snapshot(w);
  const World back = load_snapshot(bytes);
  CHECK(back == w);
  CHECK(save_snapshot(back) == bytes);
  CHECK(bytes.substr(0, 8) == "SWCHSNAP");
}

TEST_CASE("snapshots of identical runs are byte-identical") {
  World a = build_world(small_run(4, 0, 10));
  World b = build_world(small_run(4, 0, 10));
  b.config.threads = 3;
  run(a, 50);
  run(b, 50);
  CHECK(save_snapshot(a) == save_snapshot(b));
  CHECK(state_hash(a) == state_hash(b));
}

TEST_CASE("corrupt snapshots are rejected") {
  World w = build_world(small_run(5, 0, 10));
  const std::string bytes = save_snapshot(w);
  CHECK_THROWS_AS(load_snapshot(bytes.substr(0, bytes.size() - 3)), SnapshotError);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(load_snapshot(bad), SnapshotError);
  CHECK_THROWS_AS(load_snapshot(bytes + "junk"), SnapshotError);
}

TEST_CASE("state hash tracks particle state and step count") {
  World w = build_world(small_run(6, 0, 10));
  const auto h = state_hash(w);
  w.particles[3].velocity[0] += 1e-12;
  CHECK(state_hash(w) != h);
  w.particles[3].velocity[0] -= 1e-12;
  CHECK(state_hash(w) == h);
  ++w.step_count;
  CHECK(state_hash(w) != h);
}

TEST_CASE("hex helpers invert each other") {
  const std::string raw("\x00\x01\xfe\xff swarm", 10);
  CHECK(to_hex(raw) == "0001feff20737761726d");
  CHECK(from_hex(to_hex(raw)) == raw);
  CHECK(hash_hex(0xabcULL) == "0000000000000abc");
}

TEST_CASE("record 100 steps and replay the same hashes") {
  const RunConfig c = small_run(7, 100, 10);
  World live;
  const std::string log = record(c, false, &live);
  std::istringstream in(log);
  const ReplayResult r = replay(in);
  CHECK_FALSE(r.full);
  REQUIRE(r.hashes.size() == 11);
  CHECK(r.hashes.front().first == 0);
  CHECK(r.hashes.back().first == 100);
  CHECK(r.final_world == live);
  CHECK(r.config == c);
}

TEST_CASE("header-only and full-frame replays agree") {
  const RunConfig c = small_run(8, 60, 15);
  std::istringstream h(record(c, false));
  std::istringstream f(record(c, true));
  const ReplayResult rh = replay(h);
  const ReplayResult rf = replay(f);
  CHECK(rf.full);
  CHECK(rh.hashes == rf.hashes);
  CHECK(save_snapshot(rh.final_world) == save_snapshot(rf.final_world));
}

TEST_CASE("full replay never steps the physics") {
  // A snapshot whose hash matches but whose world could not come from the
  // config proves the state was loaded, not simulated.
  const RunConfig c = small_run(9, 20, 10);
  auto ls = lines_of(record(c, true));
  World odd = build_world(c);
  odd.particles[0].position = {1, 2, 0};
  odd.step_count = 10;
  nlohmann::json rec = nlohmann::json::parse(ls[2]);
  rec["hash"] = hash_hex(state_hash(odd));
  rec["snapshot"] = to_hex(save_snapshot(odd));
  ls[2] = rec.dump();
  std::istringstream in(join(ls));
  CHECK(replay(in).hashes[1].second == state_hash(odd));
}

TEST_CASE("truncated logs fail at the truncation point") {
  const RunConfig c = small_run(10, 50, 10);
  auto ls = lines_of(record(c, false));
  REQUIRE(ls.size() == 8);  // header, steps 0..50, end

  auto cut = ls;
  cut.resize(5);  // header and steps 0, 10, 20, 30
  auto e = replay_error(join(cut));
  CHECK(e.step() == 31);
  CHECK(std::string(e.what()).find("after step 30") != std::string::npos);
  CHECK(std::string(e.what()).find("missing end marker") != std::string::npos);

  cut = ls;
  cut[4] = cut[4].substr(0, cut[4].size() / 2);
  e = replay_error(join(cut));
  CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  CHECK(e.step() == 21);

  cut = ls;
  cut.erase(cut.begin() + 6);  // drop the step-50 record, keep the end marker
  e = replay_error(join(cut));
  CHECK(std::string(e.what()).find("end marker") != std::string::npos);

  CHECK(replay_error("").step() == 0);
}

TEST_CASE("divergent hashes name the first bad step") {
  const RunConfig c = small_run(11, 40, 10);
  auto ls = lines_of(record(c, false));
  nlohmann::json rec = nlohmann::json::parse(ls[3]);  // step 20
  rec["hash"] = hash_hex(12345);
  ls[3] = rec.dump();
  const auto e = replay_error(join(ls));
  CHECK(e.step() == 20);
  CHECK(std::string(e.what()).find("hash mismatch at step 20") != std::string::npos);
}

TEST_CASE("skipped records are reported") {
  const RunConfig c = small_run(12, 40, 10);
  auto ls = lines_of(record(c, false));
  ls.erase(ls.begin() + 3);
  const auto e = replay_error(join(ls));
  CHECK(e.step() == 20);
}

TEST_CASE("foreign headers are rejected") {
  CHECK(std::string(replay_error("{\"format\":\"other\"}\n").what()) == "not a replay log");
  CHECK(replay_error("not json\n").step() == 0);
}
