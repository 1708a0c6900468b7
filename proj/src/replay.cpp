#include "swarm/replay.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "swarm/snapshot.hpp"

namespace swarm {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "swarmchem-replay";
constexpr int kVersion = 1;

std::uint64_t parse_hash(const json& j) {
  const auto s = j.get<std::string>();
  if (s.size() != 16) throw std::invalid_argument("hash must be 16 hex digits");
  return std::stoull(s, nullptr, 16);
}

}  // namespace

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReplayRecorder::ReplayRecorder(std::ostream& out, const RunConfig& config, bool full)
    : out_(out), full_(full), interval_(std::max<std::uint64_t>(config.observers.record_interval, 1)) {
  const json header = {{"format", kFormat},
                       {"version", kVersion},
                       {"mode", full ? "full" : "header"},
                       {"interval", interval_},
                       {"config", run_config_to_json(config)}};
  out_ << header.dump() << '\n';
}

void ReplayRecorder::begin(const World& world) { write(world); }

void ReplayRecorder::observe(const World& world, const StepReport&) { write(world); }

void ReplayRecorder::finish(const World&) {
  out_ << json{{"end", true}, {"last_step", last_}}.dump() << '\n';
  out_.flush();
}

void ReplayRecorder::write(const World& world) {
  json rec = {{"step", world.step_count}, {"hash", hash_hex(state_hash(world))}};
  if (full_) rec["snapshot"] = to_hex(save_snapshot(world));
  out_ << rec.dump() << '\n';
  last_ = world.step_count;
  if (!out_) throw std::runtime_error("replay log write failed");
}

ReplayResult replay(std::istream& log) {
  ReplayResult result;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t last_step = 0;
  bool have_record = false;

  auto truncated = [&](const std::string& why) {
    const std::string after = have_record ? "after step " + std::to_string(last_step) : "before any record";
    return ReplayError(have_record ? last_step + 1 : 0,
                       "replay log truncated at line " + std::to_string(line_no) + " (" + after +
                           "): " + why);
  };

  if (!std::getline(log, line)) throw ReplayError(0, "replay log is empty");
  ++line_no;
  std::uint64_t interval = 1;
  try {
    const json h = json::parse(line);
    if (h.at("format") != kFormat) throw ReplayError(0, "not a replay log");
    if (h.at("version") != kVersion) {
      throw ReplayError(0, "unsupported replay log version " + h.at("version").dump());
    }
    result.full = h.at("mode") == "full";
    interval = h.at("interval").get<std::uint64_t>();
    result.config = run_config_from_json(h.at("config"));
  } catch (const json::exception& e) {
    throw ReplayError(0, std::string("bad replay header: ") + e.what());
  }

  World world;
  if (!result.full) world = build_world(result.config);
  bool ended = false;

  while (std::getline(log, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (ended) throw ReplayError(last_step, "records after end marker at line " + std::to_string(line_no));
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error&) {
      throw truncated("unparseable record");
    }
    if (rec.contains("end")) {
      if (!have_record || rec.value("last_step", std::uint64_t{0}) != last_step) {
        throw truncated("end marker does not match the last record");
      }
      ended = true;
      continue;
    }
    ReplayRecord r;
    try {
      r.step = rec.at("step").get<std::uint64_t>();
      r.hash = parse_hash(rec.at("hash"));
      if (rec.contains("snapshot")) r.snapshot = from_hex(rec.at("snapshot").get<std::string>());
    } catch (const std::exception& e) {
      throw truncated(std::string("malformed record: ") + e.what());
    }
    const std::uint64_t expected_step = have_record ? last_step + interval : 0;
    if (r.step != expected_step) {
      throw ReplayError(expected_step, "replay log skips from step " + std::to_string(last_step) +
                                           " to " + std::to_string(r.step));
    }

    if (result.full) {
      if (!r.snapshot) throw truncated("full-mode record without snapshot");
      try {
        world = load_snapshot(*r.snapshot);
      } catch (const std::exception& e) {
        throw ReplayError(r.step, "corrupt snapshot at step " + std::to_string(r.step) + ": " + e.what());
      }
      if (world.step_count != r.step) {
        throw ReplayError(r.step, "snapshot step does not match record at step " + std::to_string(r.step));
      }
    } else {
      while (world.step_count < r.step) step(world);
    }
    const auto h = state_hash(world);
    if (h != r.hash) {
      throw ReplayError(r.step, "state hash mismatch at step " + std::to_string(r.step) + ": recorded " +
                                    hash_hex(r.hash) + ", replayed " + hash_hex(h));
    }
    result.hashes.emplace_back(r.step, h);
    last_step = r.step;
    have_record = true;
  }
  ++line_no;
  if (!ended) throw truncated("missing end marker");
  result.final_world = std::move(world);
  return result;
}

}  // namespace swarm
