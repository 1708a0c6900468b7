#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "swarm/config.hpp"
#include "swarm/world.hpp"

namespace swarm {

inline constexpr double kSeparationDisplayCap = 100.0;

/// {R, G, B} = {cohesion, alignment, separation}, each scaled to 0..255.
std::array<std::uint8_t, 3> color_map(const KineticParams& p, const ParamRanges& ranges = {},
                                      double separation_cap = kSeparationDisplayCap);

/// Position on one axis quantized to 16 bits over [0, extent).
std::uint16_t quantize_axis(double x, double extent);

/// Frame record: u32 step, u32 count, then per particle u16 x, u16 y
/// (u16 z in 3D), u8 r, u8 g, u8 b. Little-endian.
std::string encode_frame(const World& world);

struct DecodedFrame {
  std::uint32_t step = 0;
  std::vector<std::array<std::uint16_t, 3>> position;
  std::vector<std::array<std::uint8_t, 3>> color;
};

/// Throws std::invalid_argument when the length does not match the layout.
DecodedFrame decode_frame(std::string_view bytes, int dimensionality);

/// Bounded single-consumer frame queue. push never blocks; a full queue
/// drops the incoming frame.
class FrameChannel {
 public:
  FrameChannel(std::uint64_t decimation, std::size_t capacity)
      : decimation_(decimation == 0 ? 1 : decimation), capacity_(capacity == 0 ? 1 : capacity) {}

  std::uint64_t decimation() const { return decimation_; }
  bool push(std::uint64_t step, std::shared_ptr<const std::string> frame);
  /// Counts a drop and returns true when a push would be refused.
  bool drop_if_full();
  /// Next frame, or nullptr on timeout or once closed and drained.
  std::shared_ptr<const std::string> pop(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  std::uint64_t decimation_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool closed_ = false;
  std::atomic<std::uint64_t> delivered_{0};
  std::atomic<std::uint64_t> dropped_{0};
};

struct IecSettings {
  std::size_t population = 9;
  std::size_t capacity = 18;  // population plus appended mix/mutate results
  std::uint64_t thumbnail_steps = 300;
  int thumbnail_count_cap = 150;
  std::uint64_t thumbnail_frame_interval = 30;
  RandomRecipeOptions initial{};
};

struct IecCandidate {
  std::uint32_t id = 0;
  Recipe recipe{{{1, {}}}};
};

/// Candidate population for interactive evolution. All randomness comes
/// from the session seed and an operation counter.
class IecPopulation {
 public:
  IecPopulation(std::uint64_t seed, IecSettings settings, MutationConfig mutation,
                ParamRanges ranges, std::vector<Recipe> initial = {});

  const std::vector<IecCandidate>& candidates() const { return candidates_; }
  std::uint64_t generation() const { return generation_; }
  const IecSettings& settings() const { return settings_; }
  const IecCandidate& find(std::uint32_t id) const;

  /// Keeps the chosen candidates and refills to the population size with
  /// mutated offspring and mixes of them.
  void select(const std::vector<std::uint32_t>& ids);
  const IecCandidate& mix(std::uint32_t a, std::uint32_t b);
  const IecCandidate& mutate(std::uint32_t id);

  /// Frame records of a short reduced-size run of a candidate.
  std::vector<std::string> thumbnail(std::uint32_t id, const WorldConfig& base) const;

 private:
  Rng next_rng();
  const IecCandidate& append(Recipe r);

  std::uint64_t seed_;
  IecSettings settings_;
  MutationConfig mutation_;
  ParamRanges ranges_;
  std::vector<IecCandidate> candidates_;
  std::uint32_t next_id_ = 0;
  std::uint64_t generation_ = 0;
  std::uint64_t ops_ = 0;
};

/// Shrinks counts proportionally so the total is at most `cap`; every
/// entry keeps at least one particle.
Recipe cap_recipe_count(const Recipe& r, int cap);

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One live simulation. A dedicated thread owns the world; commands are
/// queued and applied between steps in arrival order.
class Session {
 public:
  Session(std::string id, RunConfig config, bool running, IecSettings iec,
          std::vector<Recipe> iec_initial = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  /// Queues a command; the future holds the result or a CommandError.
  std::future<nlohmann::json> submit(nlohmann::json command);
  nlohmann::json execute(nlohmann::json command) { return submit(std::move(command)).get(); }
  nlohmann::json status();
  std::vector<std::string> events() const;

  std::shared_ptr<FrameChannel> subscribe(std::uint64_t decimation, std::size_t capacity = 8);
  void unsubscribe(const std::shared_ptr<FrameChannel>& ch);
  void stop();

 private:
  struct Pending {
    nlohmann::json command;
    std::promise<nlohmann::json> result;
  };

  void loop();
  nlohmann::json apply(const nlohmann::json& command);
  void advance();
  void publish();
  void log_event(const nlohmann::json& command, const nlohmann::json& result);

  std::string id_;
  RunConfig config_;
  World world_;
  IecPopulation iec_;
  std::atomic<bool> running_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Pending> queue_;
  bool stopping_ = false;

  mutable std::mutex log_mu_;
  std::vector<std::string> events_;
  std::uint64_t seq_ = 0;

  std::mutex channels_mu_;
  std::vector<std::shared_ptr<FrameChannel>> channels_;

  std::thread thread_;
};

/// Registry of sessions, safe for concurrent use.
class SessionManager {
 public:
  /// Body: {"config": RunConfig, "status": "paused"|"running", "iec": {...}}.
  std::string create(const nlohmann::json& request);
  std::shared_ptr<Session> get(const std::string& id) const;
  bool destroy(const std::string& id);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_ = 1;
};

/// HTTP front end. Blocks in listen until stop() is called.
class Server {
 public:
  Server();
  ~Server();
  bool bind(const std::string& host, int port);
  int bind_any(const std::string& host);
  void listen();
  void stop();
  SessionManager& sessions() { return sessions_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SessionManager sessions_;
};

}  // namespace swarm
