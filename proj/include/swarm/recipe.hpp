#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarm/rng.hpp"

namespace swarm {

inline constexpr std::size_t kParamCount = 8;

inline constexpr std::array<std::string_view, kParamCount> kParamNames = {
    "r_perception", "v_normal",   "v_max",          "w_cohesion",
    "w_alignment",  "w_separation", "p_random_steer", "w_pacekeeping"};

/// Behavioral parameters of one particle type. Field order is the canonical
/// tuple order used for sorting, serialization and hashing.
struct KineticParams {
  double r_perception = 0.0;
  double v_normal = 0.0;
  double v_max = 0.0;
  double w_cohesion = 0.0;
  double w_alignment = 0.0;
  double w_separation = 0.0;
  double p_random_steer = 0.0;
  double w_pacekeeping = 0.0;

  std::array<double, kParamCount> to_array() const;
  static KineticParams from_array(const std::array<double, kParamCount>& a);

  friend auto operator<=>(const KineticParams&, const KineticParams&) = default;
};

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

struct ParamRanges {
  std::array<ParamRange, kParamCount> bounds{{{0, 300},
                                              {0, 20},
                                              {0, 40},
                                              {0, 1},
                                              {0, 1},
                                              {0, 100},
                                              {0, 0.5},
                                              {0, 1}}};

  const ParamRange& operator[](std::size_t i) const { return bounds[i]; }
  friend bool operator==(const ParamRanges&, const ParamRanges&) = default;
};

// Round to the 6 significant digits used by the recipe text format.
double quantize(double x);

/// Clamp every field into range, enforce v_normal <= v_max, quantize.
KineticParams clamp_params(const KineticParams& p, const ParamRanges& ranges = {});

/// Names of fields that violate their range, plus "v_normal" when it
/// exceeds v_max. Empty when the tuple is legal.
std::vector<std::string> param_violations(const KineticParams& p,
                                          const ParamRanges& ranges = {});

/// Stable 64-bit key of a parameter tuple; equal tuples give equal keys.
std::uint64_t type_key(const KineticParams& p);

struct RecipeEntry {
  int count = 0;
  KineticParams params;
  friend auto operator<=>(const RecipeEntry&, const RecipeEntry&) = default;
};

class RecipeError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Range, Empty };

  RecipeError(Kind kind, std::string message, int line = 0, int column = 0,
              std::vector<std::string> fields = {});

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  Kind kind_;
  int line_;
  int column_;
  std::vector<std::string> fields_;
};

/// Canonical swarm genome: entries sorted lexicographically by parameter
/// tuple, identical tuples merged, parameters clamped and quantized.
class Recipe {
 public:
  explicit Recipe(std::vector<RecipeEntry> entries, const ParamRanges& ranges = {});

  const std::vector<RecipeEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  int total_count() const;

  friend bool operator==(const Recipe&, const Recipe&) = default;

 private:
  std::vector<RecipeEntry> entries_;
};

Recipe parse_recipe(std::string_view text, const ParamRanges& ranges = {});
std::string serialize_recipe(const Recipe& r);

struct MutationConfig {
  double p_point = 0.05;
  double point_sigma_rel = 0.1;
  double p_duplicate_entry = 0.01;
  double p_delete_entry = 0.01;
  double p_resize_count = 0.05;
  double count_resize_rel = 0.2;

  static MutationConfig none();
  bool is_identity() const;
  std::vector<std::string> validate() const;

  friend bool operator==(const MutationConfig&, const MutationConfig&) = default;
};

Recipe mutate_recipe(const Recipe& r, const MutationConfig& cfg, Rng& rng,
                     const ParamRanges& ranges = {});

/// Entries present in both parents are always inherited; entries unique to
/// one parent survive with probability 1/2. An empty draw is repeated.
Recipe mix_recipes(const Recipe& a, const Recipe& b, Rng& rng);

struct RandomRecipeOptions {
  int min_types = 1;
  int max_types = 5;
  int total_count = 100;
  ParamRanges ranges{};
};

/// Uniformly drawn parameters, counts split at random over the types.
Recipe random_recipe(Rng& rng, const RandomRecipeOptions& opts = {});

/// Draw an entry index with probability proportional to its count.
std::size_t draw_entry(const Recipe& r, Rng& rng);

}  // namespace swarm
