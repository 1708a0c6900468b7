#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "swarm/rng.hpp"
#include "swarm/world.hpp"

namespace swarm {

/// Immutable sample of one world state, enough for every analysis.
struct Frame {
  std::uint64_t step = 0;
  Space space{};
  std::vector<Vec> position;
  std::vector<Vec> velocity;
  std::vector<std::uint64_t> type;
  std::vector<KineticParams> active;
  std::uint64_t collisions = 0;          // cumulative counters
  std::uint64_t redifferentiations = 0;

  std::size_t size() const { return position.size(); }
};

Frame make_frame(const World& world);

/// Connected components of the graph linking particles closer than the
/// link radius. Clusters are ordered by size (desc), then smallest member.
struct Clustering {
  std::vector<std::uint32_t> label;               // cluster of each particle
  std::vector<std::vector<std::uint32_t>> members;  // sorted member lists
  std::vector<Vec> unwrapped;  // positions made contiguous inside each cluster
  std::vector<std::uint32_t> degree;  // links per particle
};

Clustering cluster_frame(const Frame& frame, double link_radius);

struct AnalyticsSettings {
  double link_radius = 30.0;
  friend bool operator==(const AnalyticsSettings&, const AnalyticsSettings&) = default;
};

struct BehaviorVector {
  std::vector<double> values;
  friend bool operator==(const BehaviorVector&, const BehaviorVector&) = default;
};

class WindowAnalysis;

/// Named feature functions evaluated over a trajectory window.
class FeatureRegistry {
 public:
  using Fn = std::function<double(const WindowAnalysis&)>;

  void add(std::string name, Fn fn);
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  double evaluate(std::size_t i, const WindowAnalysis& w) const { return fns_[i](w); }

 private:
  std::vector<std::string> names_;
  std::vector<Fn> fns_;
};

/// The default 24 structural and dynamic characteristics.
const FeatureRegistry& default_registry();

/// Precomputed per-frame structure shared by the feature functions.
class WindowAnalysis {
 public:
  WindowAnalysis(std::span<const Frame> frames, const AnalyticsSettings& settings);

  std::span<const Frame> frames() const { return frames_; }
  const Clustering& clustering(std::size_t f) const { return clusters_[f]; }
  const AnalyticsSettings& settings() const { return settings_; }

  // Per-frame helpers used by the registry.
  double largest_rg(std::size_t f) const { return largest_rg_[f]; }
  double frame_mean(const std::function<double(std::size_t)>& per_frame) const;
  double pair_mean(const std::function<double(std::size_t, std::size_t)>& per_pair) const;

 private:
  std::span<const Frame> frames_;
  AnalyticsSettings settings_;
  std::vector<Clustering> clusters_;
  std::vector<double> largest_rg_;
};

/// Throws std::invalid_argument for windows shorter than two frames.
BehaviorVector compute_behavior_vector(std::span<const Frame> frames,
                                       const AnalyticsSettings& settings = {},
                                       const FeatureRegistry& registry = default_registry());

/// Radius of gyration of a point set (already unwrapped).
double radius_of_gyration(std::span<const Vec> points);

/// Per-feature min-max scaling fitted on an ensemble. Zero-range features
/// are dropped.
struct FeatureScaling {
  std::vector<double> lo;
  std::vector<double> range;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> dropped;

  static FeatureScaling fit(std::span<const BehaviorVector> vs);
  std::vector<BehaviorVector> apply(std::span<const BehaviorVector> vs) const;
};

/// Occupied cells of a `resolution`-bin grid over the min-max normalized
/// features, divided by the number of vectors. Cells are counted as
/// distinct quantized tuples, so any dimensionality works.
double diversity_coverage(std::span<const BehaviorVector> vs, int resolution,
                          const FeatureScaling* scaling = nullptr);

/// Mean Euclidean distance over all unordered pairs, on the vectors as given.
double diversity_mean_pairwise(std::span<const BehaviorVector> vs);

/// Gaussian differential entropy 0.5 * ln((2 pi e)^d det(cov + lambda I))
/// on the vectors as given; zero-range features are dropped first.
/// Requires at least d + 2 vectors.
inline constexpr double kEntropyRegularizer = 1e-6;
double diversity_entropy(std::span<const BehaviorVector> vs, double lambda = kEntropyRegularizer);

struct DiversityReport {
  double coverage = 0.0;
  double mean_pairwise = 0.0;
  double entropy = 0.0;
  std::size_t n_samples = 0;
  std::size_t bootstrap_replicates = 0;
};

inline constexpr int kDefaultCoverageResolution = 10;

/// All three estimators on one ensemble, after min-max scaling (fitted on
/// `vs` unless a shared scaling is supplied). Entropy uses every feature the
/// scaling keeps, so reports under one scaling share a dimension.
DiversityReport score_diversity(std::span<const BehaviorVector> vs,
                                int resolution = kDefaultCoverageResolution,
                                const FeatureScaling* scaling = nullptr);

struct BootstrapResult {
  std::vector<DiversityReport> reports;

  std::vector<double> coverage() const;
  std::vector<double> mean_pairwise() const;
  std::vector<double> entropy() const;
};

inline constexpr std::size_t kDefaultBootstrapReplicates = 100;
inline constexpr std::size_t kDefaultBootstrapSubsample = 250;

/// `replicates` subsamples of size `subsample` drawn without replacement,
/// each scored with score_diversity. The scaling is fitted on the full
/// `runs` set unless supplied, so replicates stay comparable.
BootstrapResult bootstrap_diversity(std::span<const BehaviorVector> runs, std::size_t replicates,
                                    std::size_t subsample, Rng& rng,
                                    int resolution = kDefaultCoverageResolution,
                                    const FeatureScaling* scaling = nullptr);

double median(std::vector<double> xs);

/// Collects frames for the final analytics window of a run.
class WindowSampler : public Observer {
 public:
  WindowSampler(std::uint64_t total_steps, std::uint64_t window, std::uint64_t interval);
  std::uint64_t interval() const override { return interval_; }
  void observe(const World& world, const StepReport& report) override;
  const std::vector<Frame>& frames() const { return frames_; }

 private:
  std::uint64_t first_step_;
  std::uint64_t interval_;
  std::vector<Frame> frames_;
};

std::string behavior_csv_header(const FeatureRegistry& registry = default_registry());
std::string behavior_csv_row(const std::string& label, const BehaviorVector& v);

}  // namespace swarm
