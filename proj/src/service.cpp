#include "swarm/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include <httplib.h>

#include "swarm/replay.hpp"
#include "swarm/snapshot.hpp"

namespace swarm {

using nlohmann::json;

std::array<std::uint8_t, 3> color_map(const KineticParams& p, const ParamRanges& ranges,
                                      double separation_cap) {
  auto level = [](double x) {
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(x, 0.0, 1.0)));
  };
  auto ratio = [](double v, double hi) { return hi > 0.0 ? v / hi : 0.0; };
  return {level(ratio(p.w_cohesion, ranges[3].hi)), level(ratio(p.w_alignment, ranges[4].hi)),
          level(ratio(p.w_separation, separation_cap))};
}

std::uint16_t quantize_axis(double x, double extent) {
  if (!(extent > 0.0)) return 0;
  const double q = std::floor(x / extent * 65536.0);
  return static_cast<std::uint16_t>(std::clamp(q, 0.0, 65535.0));
}

namespace {

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(std::string_view in, std::size_t& pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::size_t record_size(int dim) { return 2 * static_cast<std::size_t>(dim) + 3; }

}  // namespace

std::string encode_frame(const World& world) {
  const auto& cfg = world.config;
  const int dim = cfg.dimensionality;
  std::string out;
  out.reserve(8 + world.particles.size() * record_size(dim));
  put(out, static_cast<std::uint32_t>(world.step_count));
  put(out, static_cast<std::uint32_t>(world.particles.size()));
  for (const auto& p : world.particles) {
    for (int k = 0; k < dim; ++k) put(out, quantize_axis(p.position[k], cfg.extent[k]));
    for (auto c : color_map(p.active, cfg.ranges)) put(out, c);
  }
  return out;
}

DecodedFrame decode_frame(std::string_view bytes, int dimensionality) {
  if (bytes.size() < 8) throw std::invalid_argument("frame shorter than its header");
  std::size_t pos = 0;
  DecodedFrame f;
  f.step = get<std::uint32_t>(bytes, pos);
  const auto n = get<std::uint32_t>(bytes, pos);
  if (bytes.size() != 8 + n * record_size(dimensionality)) {
    throw std::invalid_argument("frame length does not match particle count");
  }
  f.position.resize(n);
  f.color.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (int k = 0; k < dimensionality; ++k) f.position[i][k] = get<std::uint16_t>(bytes, pos);
    for (int k = 0; k < 3; ++k) f.color[i][k] = get<std::uint8_t>(bytes, pos);
  }
  return f;
}

bool FrameChannel::push(std::uint64_t, std::shared_ptr<const std::string> frame) {
  {
    std::lock_guard lk(mu_);
    if (closed_) return false;
    if (queue_.size() >= capacity_) {
      ++dropped_;
      return false;
    }
    queue_.push_back(std::move(frame));
  }
  cv_.notify_one();
  return true;
}

bool FrameChannel::drop_if_full() {
  std::lock_guard lk(mu_);
  if (closed_ || queue_.size() < capacity_) return false;
  ++dropped_;
  return true;
}

std::shared_ptr<const std::string> FrameChannel::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  cv_.wait_for(lk, timeout, [&] { return closed_ || !queue_.empty(); });
  if (queue_.empty()) return nullptr;
  auto f = std::move(queue_.front());
  queue_.pop_front();
  ++delivered_;
  return f;
}

void FrameChannel::close() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool FrameChannel::closed() const {
  std::lock_guard lk(mu_);
  return closed_;
}

Recipe cap_recipe_count(const Recipe& r, int cap) {
  const int total = r.total_count();
  if (total <= cap) return r;
  std::vector<RecipeEntry> es = r.entries();
  for (auto& e : es) {
    e.count = std::max(1, static_cast<int>(std::floor(double(e.count) * cap / total)));
  }
  return Recipe(std::move(es));
}

IecPopulation::IecPopulation(std::uint64_t seed, IecSettings settings, MutationConfig mutation,
                             ParamRanges ranges, std::vector<Recipe> initial)
    : seed_(seed), settings_(settings), mutation_(mutation), ranges_(ranges) {
  if (settings_.population == 0 || settings_.capacity < settings_.population) {
    throw ConfigError("iec: need 0 < population <= capacity");
  }
  if (initial.size() > settings_.population) {
    throw ConfigError("iec.candidates: more than the population size");
  }
  for (auto& r : initial) append(std::move(r));
  settings_.initial.ranges = ranges_;
  while (candidates_.size() < settings_.population) {
    Rng rng = next_rng();
    append(random_recipe(rng, settings_.initial));
  }
}

Rng IecPopulation::next_rng() { return substream(seed_, Stream::Iec, ops_++, 0); }

const IecCandidate& IecPopulation::append(Recipe r) {
  if (candidates_.size() >= settings_.capacity) {
    throw CommandError("population is at capacity (" + std::to_string(settings_.capacity) + ")");
  }
  candidates_.push_back({next_id_++, std::move(r)});
  return candidates_.back();
}

const IecCandidate& IecPopulation::find(std::uint32_t id) const {
  for (const auto& c : candidates_) {
    if (c.id == id) return c;
  }
  throw CommandError("unknown candidate id " + std::to_string(id));
}

void IecPopulation::select(const std::vector<std::uint32_t>& ids) {
  if (ids.empty()) throw CommandError("select needs at least one candidate");
  if (ids.size() > settings_.population) {
    throw CommandError("selected " + std::to_string(ids.size()) + " candidates, population is " +
                       std::to_string(settings_.population));
  }
  const std::set<std::uint32_t> chosen(ids.begin(), ids.end());
  if (chosen.size() != ids.size()) throw CommandError("duplicate candidate id in select");
  for (auto id : ids) find(id);

  std::vector<IecCandidate> kept;
  for (const auto& c : candidates_) {
    if (chosen.count(c.id)) kept.push_back(c);
  }
  Rng rng = next_rng();
  std::vector<Recipe> offspring;
  while (kept.size() + offspring.size() < settings_.population) {
    const auto& a = kept[rng.below(kept.size())].recipe;
    if (kept.size() >= 2 && rng.coin()) {
      const auto& b = kept[rng.below(kept.size())].recipe;
      offspring.push_back(mutate_recipe(mix_recipes(a, b, rng), mutation_, rng, ranges_));
    } else {
      offspring.push_back(mutate_recipe(a, mutation_, rng, ranges_));
    }
  }
  candidates_ = std::move(kept);
  for (auto& r : offspring) append(std::move(r));
  ++generation_;
}

const IecCandidate& IecPopulation::mix(std::uint32_t a, std::uint32_t b) {
  Rng rng = next_rng();
  return append(mix_recipes(find(a).recipe, find(b).recipe, rng));
}

const IecCandidate& IecPopulation::mutate(std::uint32_t id) {
  Rng rng = next_rng();
  return append(mutate_recipe(find(id).recipe, mutation_, rng, ranges_));
}

std::vector<std::string> IecPopulation::thumbnail(std::uint32_t id, const WorldConfig& base) const {
  WorldConfig cfg = base;
  cfg.competition.reset();
  cfg.environment.clear();
  if (cfg.swarm_class == SwarmClass::Homogeneous) cfg.swarm_class = SwarmClass::Heterogeneous;
  cfg.seed = substream(base.seed, Stream::Iec, id, 1)();
  cfg.threads = 1;
  World w = make_world(cfg);
  spawn(w, cap_recipe_count(find(id).recipe, settings_.thumbnail_count_cap), w.space().center(), 50.0);
  std::vector<std::string> frames{encode_frame(w)};
  const auto every = std::max<std::uint64_t>(settings_.thumbnail_frame_interval, 1);
  while (w.step_count < settings_.thumbnail_steps) {
    step(w);
    if (w.step_count % every == 0) frames.push_back(encode_frame(w));
  }
  return frames;
}

namespace {

IecSettings read_iec(const json& j, std::vector<Recipe>& initial, const ParamRanges& ranges) {
  IecSettings s;
  if (j.is_null()) return s;
  if (!j.is_object()) throw ConfigError("iec: must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "population") {
      s.population = it->get<std::size_t>();
    } else if (k == "capacity") {
      s.capacity = it->get<std::size_t>();
    } else if (k == "thumbnail_steps") {
      s.thumbnail_steps = it->get<std::uint64_t>();
    } else if (k == "thumbnail_count_cap") {
      s.thumbnail_count_cap = it->get<int>();
    } else if (k == "thumbnail_frame_interval") {
      s.thumbnail_frame_interval = it->get<std::uint64_t>();
    } else if (k == "candidates") {
      for (const auto& r : *it) initial.push_back(parse_recipe(r.get<std::string>(), ranges));
    } else {
      throw ConfigError("iec." + k + ": unknown field");
    }
  }
  if (!j.contains("capacity")) s.capacity = 2 * s.population;
  return s;
}

// Literals built in code arrive as signed integers.
bool non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::uint32_t candidate_id(const json& cmd, const char* key) {
  if (!cmd.contains(key) || !non_negative_integer(cmd[key])) {
    throw CommandError(std::string("'") + key + "' must be a candidate id");
  }
  return cmd[key].get<std::uint32_t>();
}

json candidate_json(const IecCandidate& c) {
  return {{"id", c.id}, {"recipe", serialize_recipe(c.recipe)}};
}

}  // namespace

Session::Session(std::string id, RunConfig config, bool running, IecSettings iec,
                 std::vector<Recipe> iec_initial)
    : id_(std::move(id)),
      config_(std::move(config)),
      world_(build_world(config_)),
      iec_(config_.world.seed, iec, config_.world.mutation, config_.world.ranges,
           std::move(iec_initial)),
      running_(running) {
  thread_ = std::thread([this] { loop(); });
}

Session::~Session() { stop(); }

void Session::stop() {
  {
    std::lock_guard lk(mu_);
    if (stopping_ && !thread_.joinable()) return;
    stopping_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  std::lock_guard lk(channels_mu_);
  for (auto& ch : channels_) ch->close();
  channels_.clear();
}

std::future<json> Session::submit(json command) {
  Pending p{std::move(command), {}};
  auto fut = p.result.get_future();
  {
    std::lock_guard lk(mu_);
    if (stopping_) {
      p.result.set_exception(std::make_exception_ptr(CommandError("session is closed")));
      return fut;
    }
    queue_.push_back(std::move(p));
  }
  cv_.notify_all();
  return fut;
}

json Session::status() { return execute({{"command", "status"}}); }

std::vector<std::string> Session::events() const {
  std::lock_guard lk(log_mu_);
  return events_;
}

std::shared_ptr<FrameChannel> Session::subscribe(std::uint64_t decimation, std::size_t capacity) {
  auto ch = std::make_shared<FrameChannel>(decimation, capacity);
  std::lock_guard lk(channels_mu_);
  channels_.push_back(ch);
  return ch;
}

void Session::unsubscribe(const std::shared_ptr<FrameChannel>& ch) {
  ch->close();
  std::lock_guard lk(channels_mu_);
  std::erase(channels_, ch);
}

void Session::loop() {
  for (;;) {
    std::deque<Pending> batch;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return stopping_ || !queue_.empty() || running_; });
      if (stopping_) break;
      batch.swap(queue_);
    }
    for (auto& p : batch) {
      try {
        json result = apply(p.command);
        if (p.command.value("command", "") != "status") log_event(p.command, result);
        p.result.set_value(std::move(result));
      } catch (const CommandError&) {
        p.result.set_exception(std::current_exception());
      } catch (const std::exception& e) {
        p.result.set_exception(std::make_exception_ptr(CommandError(e.what())));
      }
    }
    if (running_) advance();
  }
  std::lock_guard lk(mu_);
  for (auto& p : queue_) {
    p.result.set_exception(std::make_exception_ptr(CommandError("session is closed")));
  }
  queue_.clear();
}

void Session::advance() {
  step(world_);
  publish();
}

void Session::publish() {
  std::shared_ptr<const std::string> frame;
  std::lock_guard lk(channels_mu_);
  for (auto& ch : channels_) {
    if (world_.step_count % ch->decimation() != 0 || ch->drop_if_full()) continue;
    if (!frame) frame = std::make_shared<const std::string>(encode_frame(world_));
    ch->push(world_.step_count, frame);
  }
}

json Session::apply(const json& cmd) {
  if (!cmd.is_object() || !cmd.contains("command") || !cmd["command"].is_string()) {
    throw CommandError("command object needs a string 'command' field");
  }
  const std::string name = cmd["command"];
  if (name == "status") {
    std::set<std::uint64_t> types;
    for (const auto& p : world_.particles) types.insert(p.type_id);
    return {{"id", id_},
            {"status", running_ ? "running" : "paused"},
            {"step", world_.step_count},
            {"particles", world_.particles.size()},
            {"types", types.size()},
            {"hash", hash_hex(state_hash(world_))},
            {"dimensionality", world_.config.dimensionality},
            {"extent", json::array({world_.config.extent[0], world_.config.extent[1],
                                    world_.config.extent[2]})},
            {"generation", iec_.generation()},
            {"candidates", iec_.candidates().size()}};
  }
  if (name == "pause") {
    running_ = false;
    return {{"status", "paused"}, {"step", world_.step_count}};
  }
  if (name == "resume") {
    running_ = true;
    return {{"status", "running"}, {"step", world_.step_count}};
  }
  if (name == "step") {
    if (!cmd.contains("n") || !non_negative_integer(cmd["n"])) {
      throw CommandError("'n' must be a non-negative integer");
    }
    const auto n = cmd["n"].get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) advance();
    running_ = false;
    return {{"status", "paused"}, {"step", world_.step_count}, {"hash", hash_hex(state_hash(world_))}};
  }
  if (name == "inject" || name == "iec_inject") {
    Recipe r{{{1, {}}}};
    if (cmd.contains("candidate")) {
      r = iec_.find(candidate_id(cmd, "candidate")).recipe;
    } else if (cmd.contains("recipe") && cmd["recipe"].is_string()) {
      try {
        r = parse_recipe(cmd["recipe"].get<std::string>(), world_.config.ranges);
      } catch (const RecipeError& e) {
        throw CommandError("recipe line " + std::to_string(e.line()) + ", column " +
                           std::to_string(e.column()) + ": " + e.what());
      }
    } else {
      throw CommandError("inject needs 'recipe' text or a 'candidate' id");
    }
    const int dim = world_.config.dimensionality;
    if (!cmd.contains("position") || !cmd["position"].is_array() ||
        static_cast<int>(cmd["position"].size()) != dim) {
      throw CommandError("'position' must hold " + std::to_string(dim) + " numbers");
    }
    Vec at;
    for (int k = 0; k < dim; ++k) at[k] = cmd["position"][k].get<double>();
    const double radius = cmd.value("radius", 50.0);
    const std::size_t before = world_.particles.size();
    spawn(world_, r, at, radius);
    return {{"spawned", world_.particles.size() - before}, {"particles", world_.particles.size()}};
  }
  if (name == "iec_propose") {
    json cands = json::array();
    for (const auto& c : iec_.candidates()) {
      json jc = candidate_json(c);
      json frames = json::array();
      for (const auto& f : iec_.thumbnail(c.id, world_.config)) frames.push_back(to_hex(f));
      jc["thumbnail"] = {{"interval", iec_.settings().thumbnail_frame_interval}, {"frames", frames}};
      cands.push_back(std::move(jc));
    }
    return {{"generation", iec_.generation()}, {"candidates", cands}};
  }
  if (name == "iec_select") {
    if (!cmd.contains("ids") || !cmd["ids"].is_array()) throw CommandError("'ids' must be an array");
    std::vector<std::uint32_t> ids;
    for (const auto& v : cmd["ids"]) {
      if (!non_negative_integer(v)) throw CommandError("'ids' must hold candidate ids");
      ids.push_back(v.get<std::uint32_t>());
    }
    iec_.select(ids);
    json cands = json::array();
    for (const auto& c : iec_.candidates()) cands.push_back(candidate_json(c));
    return {{"generation", iec_.generation()}, {"candidates", cands}};
  }
  if (name == "iec_mix") {
    return candidate_json(iec_.mix(candidate_id(cmd, "a"), candidate_id(cmd, "b")));
  }
  if (name == "iec_mutate") {
    return candidate_json(iec_.mutate(candidate_id(cmd, "id")));
  }
  throw CommandError("unknown command '" + name + "'");
}

void Session::log_event(const json& command, const json& result) {
  json summary = result;
  if (summary.contains("candidates") && summary["candidates"].is_array()) {
    json ids = json::array();
    for (const auto& c : summary["candidates"]) ids.push_back(c["id"]);
    summary["candidates"] = ids;
  }
  std::lock_guard lk(log_mu_);
  events_.push_back(json{{"seq", seq_++}, {"step", world_.step_count}, {"command", command},
                         {"result", summary}}
                        .dump());
}

std::string SessionManager::create(const json& request) {
  if (!request.is_object() || !request.contains("config")) {
    throw ConfigError("request: needs a 'config' object");
  }
  for (auto it = request.begin(); it != request.end(); ++it) {
    if (it.key() != "config" && it.key() != "status" && it.key() != "iec") {
      throw ConfigError("request." + it.key() + ": unknown field");
    }
  }
  RunConfig cfg = run_config_from_json(request["config"]);
  const std::string status = request.value("status", "paused");
  if (status != "paused" && status != "running") {
    throw ConfigError("request.status: must be 'paused' or 'running'");
  }
  std::vector<Recipe> initial;
  IecSettings iec;
  try {
    iec = read_iec(request.value("iec", json()), initial, cfg.world.ranges);
  } catch (const RecipeError& e) {
    throw ConfigError(std::string("iec.candidates: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("iec: ") + e.what());
  }
  std::lock_guard lk(mu_);
  const std::string id = "s" + std::to_string(next_++);
  sessions_[id] = std::make_shared<Session>(id, std::move(cfg), status == "running", iec,
                                            std::move(initial));
  return id;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lk(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

bool SessionManager::destroy(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lk(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    s = std::move(it->second);
    sessions_.erase(it);
  }
  s->stop();
  return true;
}

std::size_t SessionManager::size() const {
  std::lock_guard lk(mu_);
  return sessions_.size();
}

struct Server::Impl {
  httplib::Server http;
};

namespace {

void reply(httplib::Response& res, int code, const json& body) {
  res.status = code;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int code, const std::string& what,
                 const std::vector<std::string>& details = {}) {
  json body = {{"error", what}};
  if (!details.empty()) body["errors"] = details;
  reply(res, code, body);
}

}  // namespace

Server::Server() : impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  SessionManager& sessions = sessions_;

  http.Post("/sessions", [&sessions](const httplib::Request& req, httplib::Response& res) {
    try {
      const std::string id = sessions.create(json::parse(req.body));
      reply(res, 201, sessions.get(id)->status());
    } catch (const json::parse_error& e) {
      reply_error(res, 400, std::string("invalid JSON: ") + e.what());
    } catch (const ConfigError& e) {
      reply_error(res, 400, e.what(), e.errors());
    } catch (const std::exception& e) {
      reply_error(res, 400, e.what());
    }
  });

  http.Get(R"(/sessions/([^/]+))", [&sessions](const httplib::Request& req, httplib::Response& res) {
    auto s = sessions.get(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    try {
      reply(res, 200, s->status());
    } catch (const std::exception& e) {
      reply_error(res, 410, e.what());
    }
  });

  http.Post(R"(/sessions/([^/]+)/commands)",
            [&sessions](const httplib::Request& req, httplib::Response& res) {
              auto s = sessions.get(req.matches[1]);
              if (!s) return reply_error(res, 404, "unknown session");
              try {
                reply(res, 200, s->execute(json::parse(req.body)));
              } catch (const json::parse_error& e) {
                reply_error(res, 400, std::string("invalid JSON: ") + e.what());
              } catch (const std::exception& e) {
                reply_error(res, 400, e.what());
              }
            });

  http.Get(R"(/sessions/([^/]+)/events)", [&sessions](const httplib::Request& req, httplib::Response& res) {
    auto s = sessions.get(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    json out = json::array();
    for (const auto& e : s->events()) out.push_back(json::parse(e));
    reply(res, 200, {{"events", out}});
  });

  http.Get(R"(/sessions/([^/]+)/stream)", [&sessions](const httplib::Request& req, httplib::Response& res) {
    auto s = sessions.get(req.matches[1]);
    if (!s) return reply_error(res, 404, "unknown session");
    std::uint64_t decimation = 1;
    std::size_t capacity = 8;
    std::uint64_t max_frames = 0;
    try {
      if (req.has_param("decimation")) decimation = std::stoull(req.get_param_value("decimation"));
      if (req.has_param("capacity")) capacity = std::stoull(req.get_param_value("capacity"));
      if (req.has_param("max_frames")) max_frames = std::stoull(req.get_param_value("max_frames"));
    } catch (const std::exception&) {
      return reply_error(res, 400, "stream parameters must be non-negative integers");
    }
    auto ch = s->subscribe(decimation, capacity);
    std::weak_ptr<Session> weak = s;
    auto sent = std::make_shared<std::uint64_t>(0);
    res.set_chunked_content_provider(
        "application/octet-stream",
        [ch, sent, max_frames](std::size_t, httplib::DataSink& sink) {
          if (max_frames != 0 && *sent >= max_frames) {
            sink.done();
            return true;
          }
          auto frame = ch->pop(std::chrono::milliseconds(200));
          if (!frame) {
            if (ch->closed()) sink.done();
            return sink.is_writable();
          }
          std::string msg;
          put(msg, static_cast<std::uint32_t>(frame->size()));
          msg += *frame;
          ++*sent;
          return sink.write(msg.data(), msg.size());
        },
        [ch, weak](bool) {
          if (auto live = weak.lock()) live->unsubscribe(ch);
        });
  });

  http.Delete(R"(/sessions/([^/]+))", [&sessions](const httplib::Request& req, httplib::Response& res) {
    if (!sessions.destroy(req.matches[1])) return reply_error(res, 404, "unknown session");
    res.status = 204;
  });
}

Server::~Server() { stop(); }

bool Server::bind(const std::string& host, int port) { return impl_->http.bind_to_port(host, port); }

int Server::bind_any(const std::string& host) { return impl_->http.bind_to_any_port(host); }

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

}  // namespace swarm
