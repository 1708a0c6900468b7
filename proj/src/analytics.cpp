#include "swarm/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>

#include "swarm/neighbor_index.hpp"

namespace swarm {

Frame make_frame(const World& world) {
  Frame f;
  f.step = world.step_count;
  f.space = world.space();
  const std::size_t n = world.particles.size();
  f.position.reserve(n);
  f.velocity.reserve(n);
  f.type.reserve(n);
  f.active.reserve(n);
  for (const auto& p : world.particles) {
    f.position.push_back(p.position);
    f.velocity.push_back(p.velocity);
    f.type.push_back(p.type_id);
    f.active.push_back(p.active);
  }
  f.collisions = world.stats.collisions;
  f.redifferentiations = world.stats.redifferentiations;
  return f;
}

Clustering cluster_frame(const Frame& frame, double link_radius) {
  const std::size_t n = frame.size();
  Clustering c;
  c.label.assign(n, UINT32_MAX);
  c.unwrapped.resize(n);
  c.degree.assign(n, 0);
  if (n == 0) return c;

  const NeighborIndex index(frame.space, frame.position, std::max(link_radius, 1e-9));
  std::vector<std::vector<std::uint32_t>> raw;
  std::vector<std::uint32_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (c.label[s] != UINT32_MAX) continue;
    const auto id = static_cast<std::uint32_t>(raw.size());
    raw.emplace_back();
    c.label[s] = id;
    c.unwrapped[s] = frame.position[s];
    queue.assign(1, static_cast<std::uint32_t>(s));
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto i = queue[head];
      raw[id].push_back(i);
      index.for_each_neighbor(i, link_radius, [&](std::size_t j, const Vec& d, double) {
        ++c.degree[i];
        if (c.label[j] != UINT32_MAX) return;
        c.label[j] = id;
        c.unwrapped[j] = c.unwrapped[i] + d;
        queue.push_back(static_cast<std::uint32_t>(j));
      });
    }
    std::sort(raw[id].begin(), raw[id].end());
  }

  std::vector<std::uint32_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (raw[a].size() != raw[b].size()) return raw[a].size() > raw[b].size();
    return raw[a].front() < raw[b].front();
  });
  std::vector<std::uint32_t> relabel(raw.size());
  for (std::uint32_t k = 0; k < order.size(); ++k) {
    relabel[order[k]] = k;
    c.members.push_back(std::move(raw[order[k]]));
  }
  for (auto& l : c.label) l = relabel[l];
  return c;
}

double radius_of_gyration(std::span<const Vec> points) {
  if (points.empty()) return 0.0;
  Vec centroid;
  for (const auto& p : points) centroid += p;
  centroid *= 1.0 / static_cast<double>(points.size());
  double sum = 0.0;
  for (const auto& p : points) sum += norm2(p - centroid);
  return std::sqrt(sum / static_cast<double>(points.size()));
}

void FeatureRegistry::add(std::string name, Fn fn) {
  names_.push_back(std::move(name));
  fns_.push_back(std::move(fn));
}

namespace {

std::vector<Vec> gather(const std::vector<Vec>& pts, const std::vector<std::uint32_t>& idx) {
  std::vector<Vec> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(pts[i]);
  return out;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size());
}

double unit_sum_norm(const std::vector<Vec>& vel, const std::vector<std::uint32_t>* subset) {
  Vec sum;
  std::size_t n = 0;
  auto add = [&](std::size_t i) {
    const double s = norm(vel[i]);
    if (s > 0.0) sum += vel[i] * (1.0 / s);
    ++n;
  };
  if (subset != nullptr) {
    for (auto i : *subset) add(i);
  } else {
    for (std::size_t i = 0; i < vel.size(); ++i) add(i);
  }
  return n == 0 ? 0.0 : norm(sum) / static_cast<double>(n);
}

// Deterministic stride sample bounding O(n^2) geometry features.
std::vector<std::size_t> stride_sample(std::size_t n, std::size_t cap) {
  std::vector<std::size_t> out;
  const std::size_t stride = std::max<std::size_t>(1, (n + cap - 1) / cap);
  for (std::size_t i = 0; i < n; i += stride) out.push_back(i);
  return out;
}

constexpr std::size_t kGeometrySample = 400;

double mean_nn_distance(const Frame& f) {
  if (f.size() < 2) return 0.0;
  double sum = 0.0;
  const auto sample = stride_sample(f.size(), kGeometrySample);
  for (auto i : sample) {
    double best = INFINITY;
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (j != i) best = std::min(best, f.space.distance2(f.position[i], f.position[j]));
    }
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(sample.size());
}

double mean_pair_distance(const Frame& f) {
  const auto sample = stride_sample(f.size(), kGeometrySample);
  if (sample.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < sample.size(); ++a) {
    for (std::size_t b = a + 1; b < sample.size(); ++b) {
      sum += std::sqrt(f.space.distance2(f.position[sample[a]], f.position[sample[b]]));
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double type_entropy(const Frame& f) {
  if (f.size() == 0) return 0.0;
  std::unordered_map<std::uint64_t, std::size_t> counts;
  for (auto t : f.type) ++counts[t];
  std::vector<std::size_t> c;
  for (auto& [k, v] : counts) c.push_back(v);
  std::sort(c.begin(), c.end());
  double h = 0.0;
  for (auto v : c) {
    const double p = static_cast<double>(v) / static_cast<double>(f.size());
    h -= p * std::log(p);
  }
  return h;
}

double angular_momentum(const Frame& f, const Clustering& c) {
  if (c.members.empty()) return 0.0;
  const auto& m = c.members.front();
  const auto pts = gather(c.unwrapped, m);
  Vec centroid;
  for (const auto& p : pts) centroid += p;
  centroid *= 1.0 / static_cast<double>(pts.size());
  Vec L;
  for (std::size_t k = 0; k < m.size(); ++k) L += cross(pts[k] - centroid, f.velocity[m[k]]);
  return norm(L) / static_cast<double>(m.size());
}

double bounding_volume(const Frame& f, const Clustering& c) {
  if (c.members.empty()) return 0.0;
  const auto pts = gather(c.unwrapped, c.members.front());
  double vol = 1.0;
  for (int k = 0; k < f.space.dim; ++k) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& p : pts) {
      lo = std::min(lo, p[k]);
      hi = std::max(hi, p[k]);
    }
    vol *= hi - lo;
  }
  return vol;
}

double jaccard(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::uint32_t> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  const double uni = static_cast<double>(a.size() + b.size() - inter.size());
  return static_cast<double>(inter.size()) / uni;
}

bool same_population(const Frame& a, const Frame& b) {
  return a.size() == b.size() && b.step > a.step;
}

FeatureRegistry make_default_registry() {
  FeatureRegistry r;
  // Structural group.
  r.add("cluster_count", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) { return double(w.clustering(f).members.size()); });
  });
  r.add("mean_cluster_size", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      const auto k = w.clustering(f).members.size();
      return k == 0 ? 0.0 : double(w.frames()[f].size()) / double(k);
    });
  });
  r.add("cluster_size_variance", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      std::vector<double> sizes;
      for (const auto& m : w.clustering(f).members) sizes.push_back(double(m.size()));
      return variance_of(sizes);
    });
  });
  r.add("largest_cluster_fraction", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      const auto& c = w.clustering(f);
      return c.members.empty() ? 0.0
                               : double(c.members.front().size()) / double(w.frames()[f].size());
    });
  });
  r.add("radius_of_gyration",
        [](const WindowAnalysis& w) { return w.frame_mean([&](std::size_t f) { return w.largest_rg(f); }); });
  r.add("bounding_volume", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) { return bounding_volume(w.frames()[f], w.clustering(f)); });
  });
  r.add("mean_nn_distance", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) { return mean_nn_distance(w.frames()[f]); });
  });
  r.add("mean_pair_distance", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) { return mean_pair_distance(w.frames()[f]); });
  });
  r.add("local_density_variance", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      const auto& deg = w.clustering(f).degree;
      return variance_of(std::vector<double>(deg.begin(), deg.end()));
    });
  });
  r.add("distinct_types", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      const auto& t = w.frames()[f].type;
      return double(std::set<std::uint64_t>(t.begin(), t.end()).size());
    });
  });
  r.add("type_entropy", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) { return type_entropy(w.frames()[f]); });
  });
  // Dynamic group.
  r.add("mean_speed", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      std::vector<double> s;
      for (const auto& v : w.frames()[f].velocity) s.push_back(norm(v));
      return mean_of(s);
    });
  });
  r.add("speed_variance", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      std::vector<double> s;
      for (const auto& v : w.frames()[f].velocity) s.push_back(norm(v));
      return variance_of(s);
    });
  });
  r.add("polarization", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) { return unit_sum_norm(w.frames()[f].velocity, nullptr); });
  });
  r.add("angular_momentum", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) { return angular_momentum(w.frames()[f], w.clustering(f)); });
  });
  r.add("centroid_drift", [](const WindowAnalysis& w) {
    return w.pair_mean([&](std::size_t a, std::size_t b) {
      const Frame& fa = w.frames()[a];
      const Frame& fb = w.frames()[b];
      Vec sum;
      for (std::size_t i = 0; i < fa.size(); ++i) sum += fa.space.displacement(fa.position[i], fb.position[i]);
      return norm(sum) / double(fa.size()) / double(fb.step - fa.step);
    });
  });
  r.add("turning_rate", [](const WindowAnalysis& w) {
    return w.pair_mean([&](std::size_t a, std::size_t b) {
      const Frame& fa = w.frames()[a];
      const Frame& fb = w.frames()[b];
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < fa.size(); ++i) {
        const double sa = norm(fa.velocity[i]);
        const double sb = norm(fb.velocity[i]);
        if (sa <= 0.0 || sb <= 0.0) continue;
        const double c = std::clamp(dot(fa.velocity[i], fb.velocity[i]) / (sa * sb), -1.0, 1.0);
        sum += std::acos(c);
        ++n;
      }
      return n == 0 ? 0.0 : sum / double(n) / double(fb.step - fa.step);
    });
  });
  r.add("kinetic_energy", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      std::vector<double> s;
      for (const auto& v : w.frames()[f].velocity) s.push_back(norm2(v));
      return mean_of(s);
    });
  });
  r.add("cluster_count_change_rate", [](const WindowAnalysis& w) {
    return w.pair_mean([&](std::size_t a, std::size_t b) {
      const double ca = double(w.clustering(a).members.size());
      const double cb = double(w.clustering(b).members.size());
      return std::abs(cb - ca) / double(w.frames()[b].step - w.frames()[a].step);
    });
  });
  r.add("rg_change_rate", [](const WindowAnalysis& w) {
    return w.pair_mean([&](std::size_t a, std::size_t b) {
      return std::abs(w.largest_rg(b) - w.largest_rg(a)) /
             double(w.frames()[b].step - w.frames()[a].step);
    });
  });
  r.add("collision_rate", [](const WindowAnalysis& w) {
    const auto& first = w.frames().front();
    const auto& last = w.frames().back();
    if (last.step <= first.step || last.size() == 0) return 0.0;
    return double(last.collisions - first.collisions) / double(last.step - first.step) /
           double(last.size());
  });
  r.add("redifferentiation_rate", [](const WindowAnalysis& w) {
    const auto& first = w.frames().front();
    const auto& last = w.frames().back();
    if (last.step <= first.step || last.size() == 0) return 0.0;
    return double(last.redifferentiations - first.redifferentiations) /
           double(last.step - first.step) / double(last.size());
  });
  r.add("largest_cluster_persistence", [](const WindowAnalysis& w) {
    const auto& a = w.clustering(0);
    const auto& b = w.clustering(w.frames().size() - 1);
    if (a.members.empty() || b.members.empty()) return 0.0;
    return jaccard(a.members.front(), b.members.front());
  });
  r.add("within_cluster_polarization", [](const WindowAnalysis& w) {
    return w.frame_mean([&](std::size_t f) {
      const auto& fr = w.frames()[f];
      if (fr.size() == 0) return 0.0;
      double sum = 0.0;
      for (const auto& m : w.clustering(f).members) sum += unit_sum_norm(fr.velocity, &m) * double(m.size());
      return sum / double(fr.size());
    });
  });
  return r;
}

}  // namespace

const FeatureRegistry& default_registry() {
  static const FeatureRegistry registry = make_default_registry();
  return registry;
}

WindowAnalysis::WindowAnalysis(std::span<const Frame> frames, const AnalyticsSettings& settings)
    : frames_(frames), settings_(settings) {
  clusters_.reserve(frames.size());
  for (const auto& f : frames) {
    clusters_.push_back(cluster_frame(f, settings.link_radius));
    const auto& c = clusters_.back();
    largest_rg_.push_back(c.members.empty() ? 0.0
                                            : radius_of_gyration(gather(c.unwrapped, c.members.front())));
  }
}

double WindowAnalysis::frame_mean(const std::function<double(std::size_t)>& per_frame) const {
  double sum = 0.0;
  for (std::size_t f = 0; f < frames_.size(); ++f) sum += per_frame(f);
  return frames_.empty() ? 0.0 : sum / static_cast<double>(frames_.size());
}

double WindowAnalysis::pair_mean(
    const std::function<double(std::size_t, std::size_t)>& per_pair) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f + 1 < frames_.size(); ++f) {
    if (!same_population(frames_[f], frames_[f + 1])) continue;
    sum += per_pair(f, f + 1);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

BehaviorVector compute_behavior_vector(std::span<const Frame> frames,
                                       const AnalyticsSettings& settings,
                                       const FeatureRegistry& registry) {
  if (frames.size() < 2) throw std::invalid_argument("behavior window needs at least 2 frames");
  const WindowAnalysis w(frames, settings);
  BehaviorVector v;
  v.values.reserve(registry.size());
  for (std::size_t i = 0; i < registry.size(); ++i) {
    const double x = registry.evaluate(i, w);
    v.values.push_back(std::isfinite(x) ? x : 0.0);
  }
  return v;
}

FeatureScaling FeatureScaling::fit(std::span<const BehaviorVector> vs) {
  FeatureScaling s;
  if (vs.empty()) return s;
  const std::size_t d = vs.front().values.size();
  s.lo.assign(d, INFINITY);
  std::vector<double> hi(d, -INFINITY);
  for (const auto& v : vs) {
    if (v.values.size() != d) throw std::invalid_argument("behavior vectors differ in length");
    for (std::size_t k = 0; k < d; ++k) {
      s.lo[k] = std::min(s.lo[k], v.values[k]);
      hi[k] = std::max(hi[k], v.values[k]);
    }
  }
  s.range.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    s.range[k] = hi[k] - s.lo[k];
    (s.range[k] > 0.0 ? s.kept : s.dropped).push_back(k);
  }
  return s;
}

std::vector<BehaviorVector> FeatureScaling::apply(std::span<const BehaviorVector> vs) const {
  std::vector<BehaviorVector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) {
    BehaviorVector n;
    n.values.reserve(kept.size());
    for (auto k : kept) n.values.push_back((v.values[k] - lo[k]) / range[k]);
    out.push_back(std::move(n));
  }
  return out;
}

namespace {

double coverage_normalized(std::span<const BehaviorVector> scaled, int resolution) {
  std::set<std::vector<int>> cells;
  for (const auto& v : scaled) {
    std::vector<int> cell(v.values.size());
    for (std::size_t k = 0; k < cell.size(); ++k) {
      const int b = static_cast<int>(std::floor(v.values[k] * resolution));
      cell[k] = std::clamp(b, 0, resolution - 1);
    }
    cells.insert(std::move(cell));
  }
  return static_cast<double>(cells.size()) / static_cast<double>(scaled.size());
}

}  // namespace

double diversity_coverage(std::span<const BehaviorVector> vs, int resolution,
                          const FeatureScaling* scaling) {
  if (vs.size() < 2) throw std::invalid_argument("coverage needs at least 2 vectors");
  if (resolution < 1) throw std::invalid_argument("coverage resolution must be >= 1");
  const FeatureScaling fitted = scaling ? FeatureScaling{} : FeatureScaling::fit(vs);
  const auto scaled = (scaling ? *scaling : fitted).apply(vs);
  return coverage_normalized(scaled, resolution);
}

double diversity_mean_pairwise(std::span<const BehaviorVector> vs) {
  if (vs.size() < 2) throw std::invalid_argument("mean pairwise distance needs at least 2 vectors");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < vs.size(); ++a) {
    for (std::size_t b = a + 1; b < vs.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < vs[a].values.size(); ++k) {
        const double d = vs[a].values[k] - vs[b].values[k];
        d2 += d * d;
      }
      sum += std::sqrt(d2);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

namespace {

double gaussian_entropy(std::span<const BehaviorVector> vs, std::span<const std::size_t> dims, double lambda) {
  const std::size_t d = dims.size();
  const std::size_t n = vs.size();
  if (n < d + 2) {
    throw std::invalid_argument("entropy needs at least " + std::to_string(d + 2) +
                                " vectors, got " + std::to_string(n));
  }
  if (d == 0) return 0.0;
  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) x(i, k) = vs[i].values[dims[k]];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  cov.diagonal().array() += lambda;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const double logdet = ldlt.vectorD().array().log().sum();
  return 0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi * std::numbers::e) + logdet);
}

}  // namespace

double diversity_entropy(std::span<const BehaviorVector> vs, double lambda) {
  return gaussian_entropy(vs, FeatureScaling::fit(vs).kept, lambda);
}

DiversityReport score_diversity(std::span<const BehaviorVector> vs, int resolution,
                                const FeatureScaling* scaling) {
  const FeatureScaling fitted = scaling ? FeatureScaling{} : FeatureScaling::fit(vs);
  const auto scaled = (scaling ? *scaling : fitted).apply(vs);
  DiversityReport r;
  r.coverage = coverage_normalized(scaled, resolution);
  r.mean_pairwise = diversity_mean_pairwise(scaled);
  // Dimensions come from the scaling, not from this subsample: a feature
  // constant here but not across the ensemble keeps its axis at the floor.
  std::vector<std::size_t> dims(scaled.empty() ? 0 : scaled.front().values.size());
  std::iota(dims.begin(), dims.end(), 0);
  r.entropy = gaussian_entropy(scaled, dims, kEntropyRegularizer);
  r.n_samples = vs.size();
  r.bootstrap_replicates = 1;
  return r;
}

std::vector<double> BootstrapResult::coverage() const {
  std::vector<double> out;
  for (const auto& r : reports) out.push_back(r.coverage);
  return out;
}

std::vector<double> BootstrapResult::mean_pairwise() const {
  std::vector<double> out;
  for (const auto& r : reports) out.push_back(r.mean_pairwise);
  return out;
}

std::vector<double> BootstrapResult::entropy() const {
  std::vector<double> out;
  for (const auto& r : reports) out.push_back(r.entropy);
  return out;
}

BootstrapResult bootstrap_diversity(std::span<const BehaviorVector> runs, std::size_t replicates,
                                    std::size_t subsample, Rng& rng, int resolution,
                                    const FeatureScaling* scaling) {
  if (subsample > runs.size() || subsample < 2) {
    throw std::invalid_argument("bootstrap subsample must be in [2, number of runs]");
  }
  const FeatureScaling fitted = scaling ? FeatureScaling{} : FeatureScaling::fit(runs);
  const FeatureScaling& s = scaling ? *scaling : fitted;
  BootstrapResult out;
  std::vector<std::size_t> idx(runs.size());
  std::vector<BehaviorVector> pick(subsample);
  for (std::size_t r = 0; r < replicates; ++r) {
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < subsample; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
      pick[i] = runs[idx[i]];
    }
    DiversityReport rep = score_diversity(pick, resolution, &s);
    rep.bootstrap_replicates = replicates;
    out.reports.push_back(rep);
  }
  return out;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

WindowSampler::WindowSampler(std::uint64_t total_steps, std::uint64_t window,
                             std::uint64_t interval)
    : first_step_(total_steps > window ? total_steps - window : 0),
      interval_(std::max<std::uint64_t>(interval, 1)) {}

void WindowSampler::observe(const World& world, const StepReport&) {
  if (world.step_count >= first_step_) frames_.push_back(make_frame(world));
}

std::string behavior_csv_header(const FeatureRegistry& registry) {
  std::string out = "label";
  for (const auto& n : registry.names()) out += "," + n;
  return out + "\n";
}

std::string behavior_csv_row(const std::string& label, const BehaviorVector& v) {
  std::string out = label;
  char buf[40];
  for (double x : v.values) {
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    out += buf;
  }
  return out + "\n";
}

}  // namespace swarm
