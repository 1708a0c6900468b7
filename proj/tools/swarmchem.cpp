// Command-line front end. Exit codes: 0 ok, 2 configuration error,
// 3 runtime error.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "swarm/analytics.hpp"
#include "swarm/batch.hpp"
#include "swarm/config.hpp"
#include "swarm/evolution.hpp"
#include "swarm/harvest.hpp"
#include "swarm/replay.hpp"
#include "swarm/service.hpp"
#include "swarm/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace swarm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::optional<int> threads;
  std::string swarm_class;
  std::string compete;
  std::optional<double> mutation_rate;
  std::string env_schedule;
  std::optional<std::uint64_t> steps;
};

RunConfig resolve_config(const Globals& g, bool require_file) {
  RunConfig c;
  if (!g.config.empty()) {
    c = load_config(g.config);
  } else if (require_file) {
    throw ConfigError("--config is required");
  }
  if (g.seed) c.world.seed = *g.seed;
  if (g.threads) c.world.threads = *g.threads;
  if (!g.out.empty()) c.output_dir = g.out;
  if (g.steps) c.n_steps = *g.steps;
  std::vector<std::string> errors;
  if (!g.swarm_class.empty()) {
    try {
      c.world.swarm_class = parse_swarm_class(g.swarm_class);
    } catch (const std::exception&) {
      errors.push_back("--class: unknown value '" + g.swarm_class + "'");
    }
  }
  if (!g.compete.empty()) {
    try {
      if (g.compete == "none") {
        c.world.competition.reset();
      } else {
        c.world.competition = parse_competition(g.compete);
      }
    } catch (const std::exception&) {
      errors.push_back("--compete: unknown value '" + g.compete + "'");
    }
  }
  if (g.mutation_rate) {
    // One knob scales every mutation probability from its default.
    const MutationConfig d;
    const double k = *g.mutation_rate / d.p_point;
    c.world.mutation.p_point = *g.mutation_rate;
    c.world.mutation.p_duplicate_entry = std::min(1.0, d.p_duplicate_entry * k);
    c.world.mutation.p_delete_entry = std::min(1.0, d.p_delete_entry * k);
    c.world.mutation.p_resize_count = std::min(1.0, d.p_resize_count * k);
  }
  if (!g.env_schedule.empty()) c.world.environment = load_env_schedule(g.env_schedule);
  for (auto& e : c.world.validate()) errors.push_back("world." + e);
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << data;
}

class EventLog : public Observer {
 public:
  explicit EventLog(std::ostream& out) : out_(out) {}
  void observe(const World&, const StepReport& r) override {
    for (const auto& t : r.transmissions) out_ << format_event(t) << '\n';
    for (const auto& e : r.environment) {
      out_ << "step=" << e.step << " environment=" << to_string(e.kind) << " affected=" << e.affected << '\n';
    }
  }

 private:
  std::ostream& out_;
};

std::size_t distinct_recipes(const World& w) {
  std::vector<const Recipe*> seen;
  for (const auto& p : w.particles) {
    const Recipe& r = w.carried(p);
    if (std::none_of(seen.begin(), seen.end(), [&](const Recipe* s) { return *s == r; })) seen.push_back(&r);
  }
  return seen.size();
}

int cmd_run(const Globals& g, bool evolve, bool full_log) {
  RunConfig cfg = resolve_config(g, true);
  if (evolve && !cfg.world.competition) cfg.world.competition = CompetitionRule::Majority;
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  write_file(out / "config.json", save_config(cfg));

  World world = build_world(cfg);
  std::ofstream log(out / "replay.jsonl", std::ios::binary);
  std::ofstream events(out / "events.log");
  ReplayRecorder recorder(log, cfg, full_log || cfg.observers.record_frames);
  recorder.begin(world);
  WindowSampler sampler(cfg.n_steps, cfg.observers.analytics_window, cfg.observers.analytics_interval);
  HarvestObserver harvester(cfg.observers.harvest, cfg.observers.harvest_interval);
  EventLog event_log(events);
  Observer* observers[] = {&recorder, &sampler, &harvester, &event_log};
  run(world, cfg.n_steps, observers);
  recorder.finish(world);
  write_file(out / "final.snap", save_snapshot(world));

  json summary = {{"steps", world.step_count},
                  {"particles", world.particles.size()},
                  {"hash", hash_hex(state_hash(world))},
                  {"distinct_recipes", distinct_recipes(world)},
                  {"collisions", world.stats.collisions},
                  {"transmissions", world.stats.transmissions},
                  {"redifferentiations", world.stats.redifferentiations},
                  {"polarization", polarization(world)}};
  if (sampler.frames().size() >= 2) {
    const auto v = compute_behavior_vector(sampler.frames(), cfg.observers.analytics);
    write_file(out / "behavior.csv", behavior_csv_header() + behavior_csv_row("run", v));
  }
  const auto objects = harvester.tracker().harvested();
  if (!objects.empty()) fs::create_directories(out / "harvest");
  for (const auto& o : objects) {
    write_file(out / "harvest" / ("object_" + std::to_string(o.id) + ".recipe"),
               harvested_recipe_text(o, out.string()));
  }
  summary["harvested_objects"] = objects.size();
  std::cout << summary.dump(2) << '\n';
  return 0;
}

struct BatchOptions {
  std::uint64_t runs = 20;
  int particles = 300;
  std::uint64_t steps = 2000;
  std::vector<std::string> classes{"homogeneous", "heterogeneous", "rediff", "infoshare"};
  std::size_t replicates = kDefaultBootstrapReplicates;
  std::size_t subsample = 0;  // half the runs when 0
  int resolution = kDefaultCoverageResolution;
};

json diversity_table(const std::map<std::string, std::vector<BehaviorVector>>& groups,
                     std::size_t replicates, std::size_t subsample, int resolution, std::uint64_t seed,
                     std::string& csv) {
  std::vector<BehaviorVector> all;
  for (const auto& [label, vs] : groups) all.insert(all.end(), vs.begin(), vs.end());
  const FeatureScaling scaling = FeatureScaling::fit(all);
  json out = json::object();
  csv = "label,replicate,coverage,mean_pairwise,entropy\n";
  for (const auto& [label, vs] : groups) {
    const std::size_t sub = subsample == 0 ? std::max<std::size_t>(2, vs.size() / 2) : subsample;
    Rng rng = substream(seed, Stream::Bootstrap, 0, std::hash<std::string>{}(label));
    const auto b = bootstrap_diversity(vs, replicates, std::min(sub, vs.size()), rng, resolution, &scaling);
    for (std::size_t r = 0; r < b.reports.size(); ++r) {
      const auto& rep = b.reports[r];
      char line[256];
      std::snprintf(line, sizeof line, "%s,%zu,%.17g,%.17g,%.17g\n", label.c_str(), r, rep.coverage,
                    rep.mean_pairwise, rep.entropy);
      csv += line;
    }
    out[label] = {{"runs", vs.size()},
                  {"replicates", replicates},
                  {"subsample", std::min(sub, vs.size())},
                  {"median_coverage", median(b.coverage())},
                  {"median_mean_pairwise", median(b.mean_pairwise())},
                  {"median_entropy", median(b.entropy())}};
  }
  return out;
}

int cmd_batch(const Globals& g, const BatchOptions& o) {
  RunConfig cfg = resolve_config(g, false);
  BatchSettings s;
  s.base = cfg.world;
  s.particles = o.particles;
  s.steps = o.steps;
  s.window = cfg.observers.analytics_window;
  s.interval = cfg.observers.analytics_interval;
  s.analytics = cfg.observers.analytics;
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);

  std::map<std::string, std::vector<BehaviorVector>> groups;
  std::string rows = behavior_csv_header();
  for (const auto& name : o.classes) {
    const SwarmClass c = parse_swarm_class(name);
    auto vs = run_batch(s, c, 0, o.runs, cfg.world.threads);
    for (const auto& v : vs) rows += behavior_csv_row(name, v);
    groups[name] = std::move(vs);
    std::cerr << "batch: " << name << " done\n";
  }
  write_file(out / "behavior.csv", rows);
  std::string csv;
  const json table = diversity_table(groups, o.replicates, o.subsample, o.resolution, cfg.world.seed, csv);
  write_file(out / "diversity.csv", csv);
  write_file(out / "diversity.json", table.dump(2) + "\n");
  std::cout << table.dump(2) << '\n';
  return 0;
}

std::map<std::string, std::vector<BehaviorVector>> read_behavior_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError(p.string() + ": cannot open file");
  std::string line;
  std::getline(in, line);
  const std::size_t width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  std::map<std::string, std::vector<BehaviorVector>> groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string label;
    std::string cell;
    std::getline(ss, label, ',');
    BehaviorVector v;
    while (std::getline(ss, cell, ',')) {
      try {
        v.values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(p.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (v.values.size() != width) {
      throw ConfigError(p.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " values");
    }
    groups[label].push_back(std::move(v));
  }
  return groups;
}

// Re-simulates the run described by a replay log header.
RunConfig log_config(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError(p.string() + ": cannot open file");
  std::string header;
  std::getline(in, header);
  try {
    return run_config_from_json(json::parse(header).at("config"));
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": bad replay header: " + e.what());
  }
}

int cmd_analyze(const Globals& g, const std::vector<std::string>& inputs, const BatchOptions& o) {
  std::map<std::string, std::vector<BehaviorVector>> groups;
  std::string rows = behavior_csv_header();
  for (const auto& in : inputs) {
    if (fs::path(in).extension() == ".csv") {
      for (auto& [label, vs] : read_behavior_csv(in)) {
        for (auto& v : vs) {
          rows += behavior_csv_row(label, v);
          groups[label].push_back(std::move(v));
        }
      }
      continue;
    }
    const RunConfig cfg = log_config(in);
    World w = build_world(cfg);
    WindowSampler sampler(cfg.n_steps, cfg.observers.analytics_window, cfg.observers.analytics_interval);
    Observer* obs[] = {&sampler};
    run(w, cfg.n_steps, obs);
    const auto v = compute_behavior_vector(sampler.frames(), cfg.observers.analytics);
    rows += behavior_csv_row(in, v);
    groups["logs"].push_back(v);
  }
  const fs::path out = g.out.empty() ? fs::path("out") : fs::path(g.out);
  fs::create_directories(out);
  write_file(out / "behavior.csv", rows);
  json table = json::object();
  for (const auto& [label, vs] : groups) {
    if (vs.size() < 2) {
      std::cerr << "analyze: group '" << label << "' has fewer than 2 vectors, no diversity computed\n";
    }
  }
  std::erase_if(groups, [](const auto& kv) { return kv.second.size() < 2; });
  if (!groups.empty()) {
    std::string csv;
    table = diversity_table(groups, o.replicates, o.subsample, o.resolution, g.seed.value_or(0), csv);
    write_file(out / "diversity.csv", csv);
    write_file(out / "diversity.json", table.dump(2) + "\n");
  }
  std::cout << table.dump(2) << '\n';
  return 0;
}

int cmd_harvest(const Globals& g, const std::string& log_path) {
  RunConfig cfg = log_config(log_path);
  World w = build_world(cfg);
  HarvestObserver harvester(cfg.observers.harvest, cfg.observers.harvest_interval);
  Observer* obs[] = {&harvester};
  run(w, cfg.n_steps, obs);
  const fs::path out = g.out.empty() ? fs::path(cfg.output_dir) / "harvest" : fs::path(g.out);
  fs::create_directories(out);
  json summary = json::array();
  for (const auto& o : harvester.tracker().harvested()) {
    write_file(out / ("object_" + std::to_string(o.id) + ".recipe"), harvested_recipe_text(o, log_path));
    summary.push_back({{"id", o.id},
                       {"parent", o.parent ? json(*o.parent) : json(nullptr)},
                       {"members", o.member_count},
                       {"first_seen", o.first_seen},
                       {"last_seen", o.last_seen},
                       {"stability", o.stability_score}});
  }
  json fissions = json::array();
  for (const auto& f : harvester.tracker().fissions()) {
    fissions.push_back({{"step", f.step}, {"parent", f.parent}, {"children", f.children}});
  }
  std::cout << json{{"objects", summary}, {"fissions", fissions}}.dump(2) << '\n';
  return 0;
}

int cmd_replay(const std::string& log_path) {
  std::ifstream in(log_path);
  if (!in) throw ConfigError(log_path + ": cannot open file");
  const ReplayResult r = replay(in);
  std::cout << json{{"mode", r.full ? "full" : "header"},
                    {"records", r.hashes.size()},
                    {"last_step", r.hashes.empty() ? 0 : r.hashes.back().first},
                    {"hash", r.hashes.empty() ? "" : hash_hex(r.hashes.back().second)}}
                   .dump(2)
            << '\n';
  return 0;
}

Server* g_server = nullptr;

int cmd_serve(const std::string& host, int port) {
  Server server;
  if (port == 0) {
    port = server.bind_any(host);
    if (port < 0) throw std::runtime_error("cannot bind " + host);
  } else if (!server.bind(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "listening on " << host << ":" << port << std::endl;
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarmchem: heterogeneous swarm simulation and analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Override the world seed");
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)");

  auto add_world_flags = [&](CLI::App* sub) {
    sub->add_option("--class", g.swarm_class, "homogeneous | heterogeneous | rediff | infoshare");
    sub->add_option("--compete", g.compete, "none | faster | slower | behind | majority");
    sub->add_option("--mutation-rate", g.mutation_rate, "Point mutation probability");
    sub->add_option("--env-schedule", g.env_schedule, "JSON list of environment perturbations");
    sub->add_option("--steps", g.steps, "Override n_steps");
  };

  bool full_log = false;
  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  add_world_flags(run_cmd);
  run_cmd->add_flag("--full-log", full_log, "Store snapshots in the replay log");
  auto* evolve_cmd = app.add_subcommand("evolve", "Run with collision-driven recipe transmission");
  add_world_flags(evolve_cmd);
  evolve_cmd->add_flag("--full-log", full_log, "Store snapshots in the replay log");

  BatchOptions bo;
  auto* batch_cmd = app.add_subcommand("batch", "Random-recipe ensembles per class, with diversity");
  add_world_flags(batch_cmd);
  batch_cmd->add_option("--runs", bo.runs, "Runs per class");
  batch_cmd->add_option("--particles", bo.particles, "Particles per run");
  batch_cmd->add_option("--batch-steps", bo.steps, "Steps per run");
  batch_cmd->add_option("--classes", bo.classes, "Classes to run");
  batch_cmd->add_option("--replicates", bo.replicates, "Bootstrap replicates");
  batch_cmd->add_option("--subsample", bo.subsample, "Bootstrap subsample size (default half)");
  batch_cmd->add_option("--resolution", bo.resolution, "Coverage grid bins per feature");

  std::vector<std::string> inputs;
  auto* analyze_cmd = app.add_subcommand("analyze", "Behavior vectors and diversity from logs or CSV");
  analyze_cmd->add_option("inputs", inputs, "Replay logs or behavior CSV files")->required();
  analyze_cmd->add_option("--replicates", bo.replicates, "Bootstrap replicates");
  analyze_cmd->add_option("--subsample", bo.subsample, "Bootstrap subsample size (default half)");
  analyze_cmd->add_option("--resolution", bo.resolution, "Coverage grid bins per feature");

  std::string log_path;
  auto* harvest_cmd = app.add_subcommand("harvest", "Extract persistent objects from a run log");
  harvest_cmd->add_option("log", log_path, "Replay log")->required();
  auto* replay_cmd = app.add_subcommand("replay", "Verify a replay log");
  replay_cmd->add_option("log", log_path, "Replay log")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Start the session server");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(g, false, full_log);
    if (*evolve_cmd) return cmd_run(g, true, full_log);
    if (*batch_cmd) return cmd_batch(g, bo);
    if (*analyze_cmd) return cmd_analyze(g, inputs, bo);
    if (*harvest_cmd) return cmd_harvest(g, log_path);
    if (*replay_cmd) return cmd_replay(log_path);
    if (*serve_cmd) return cmd_serve(host, port);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RecipeError& e) {
    std::cerr << "recipe error at line " << e.line() << ", column " << e.column() << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
