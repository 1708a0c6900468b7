#include "swarm/recipe.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace swarm {

std::array<double, kParamCount> KineticParams::to_array() const {
  return {r_perception, v_normal,     v_max,          w_cohesion,
          w_alignment,  w_separation, p_random_steer, w_pacekeeping};
}

KineticParams KineticParams::from_array(const std::array<double, kParamCount>& a) {
  return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
}

double quantize(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  double q = std::strtod(buf, nullptr);
  return q == 0.0 ? 0.0 : q;  // drop negative zero
}

KineticParams clamp_params(const KineticParams& p, const ParamRanges& ranges) {
  auto a = p.to_array();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    double x = std::isnan(a[i]) ? ranges[i].lo : a[i];
    a[i] = quantize(std::clamp(x, ranges[i].lo, ranges[i].hi));
  }
  a[1] = std::min(a[1], a[2]);
  return KineticParams::from_array(a);
}

std::vector<std::string> param_violations(const KineticParams& p,
                                          const ParamRanges& ranges) {
  std::vector<std::string> out;
  const auto a = p.to_array();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (!(a[i] >= ranges[i].lo && a[i] <= ranges[i].hi)) out.emplace_back(kParamNames[i]);
  }
  if (p.v_normal > p.v_max &&
      std::find(out.begin(), out.end(), "v_normal") == out.end()) {
    out.emplace_back("v_normal");
  }
  return out;
}

std::uint64_t type_key(const KineticParams& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double x : p.to_array()) {
    if (x == 0.0) x = 0.0;
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(x));
  }
  return h;
}

RecipeError::RecipeError(Kind kind, std::string message, int line, int column,
                         std::vector<std::string> fields)
    : std::runtime_error(std::move(message)),
      kind_(kind),
      line_(line),
      column_(column),
      fields_(std::move(fields)) {}

Recipe::Recipe(std::vector<RecipeEntry> entries, const ParamRanges& ranges) {
  if (entries.empty()) throw RecipeError(RecipeError::Kind::Empty, "empty recipe");
  for (auto& e : entries) {
    if (e.count < 1) {
      throw RecipeError(RecipeError::Kind::Range, "entry count must be >= 1", 0, 0,
                        {"count"});
    }
    e.params = clamp_params(e.params, ranges);
  }
  std::sort(entries.begin(), entries.end(),
            [](const RecipeEntry& a, const RecipeEntry& b) { return a.params < b.params; });
  for (auto& e : entries) {
    if (!entries_.empty() && entries_.back().params == e.params) {
      entries_.back().count += e.count;
    } else {
      entries_.push_back(e);
    }
  }
}

int Recipe::total_count() const {
  int n = 0;
  for (const auto& e : entries_) n += e.count;
  return n;
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, int line_no) : s_(line), line_(line_no) {}

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "syntax error at line " << line_ << ", column " << pos_ + 1 << ": " << what;
    throw RecipeError(RecipeError::Kind::Syntax, msg.str(), line_,
                      static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  long long integer() {
    skip_ws();
    long long v = 0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail("expected integer count");
    pos_ = static_cast<std::size_t>(p - s_.data());
    return v;
  }

  double number() {
    skip_ws();
    double v = 0;
    const char* first = s_.data() + pos_;
    if (pos_ < s_.size() && s_[pos_] == '+') ++first;
    auto [p, ec] = std::from_chars(first, s_.data() + s_.size(), v);
    if (ec != std::errc{} || !std::isfinite(v)) fail("expected number");
    pos_ = static_cast<std::size_t>(p - s_.data());
    return v;
  }

  void end() {
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing characters");
  }

  int column() const { return static_cast<int>(pos_) + 1; }

 private:
  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

Recipe parse_recipe(std::string_view text, const ParamRanges& ranges) {
  std::vector<RecipeEntry> entries;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    ++line_no;
    start = nl + 1;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    LineParser p(line, line_no);
    const int count_col = [&] {
      std::size_t i = line.find_first_not_of(" \t");
      return static_cast<int>(i) + 1;
    }();
    const long long count = p.integer();
    p.expect('*');
    p.expect('(');
    std::array<double, kParamCount> values{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
      if (i > 0) p.expect(',');
      values[i] = p.number();
    }
    p.expect(')');
    p.end();

    std::vector<std::string> bad;
    if (count < 1 || count > 1'000'000'000) bad.emplace_back("count");
    auto params = KineticParams::from_array(values);
    for (auto& f : param_violations(params, ranges)) bad.push_back(std::move(f));
    if (!bad.empty()) {
      std::ostringstream msg;
      msg << "range error at line " << line_no << ": ";
      for (std::size_t i = 0; i < bad.size(); ++i) msg << (i ? ", " : "") << bad[i];
      throw RecipeError(RecipeError::Kind::Range, msg.str(), line_no, count_col, bad);
    }
    entries.push_back({static_cast<int>(count), params});
  }
  if (entries.empty()) throw RecipeError(RecipeError::Kind::Empty, "empty recipe");
  return Recipe(std::move(entries), ranges);
}

std::string serialize_recipe(const Recipe& r) {
  std::string out;
  char buf[512];
  for (const auto& e : r.entries()) {
    const auto& p = e.params;
    std::snprintf(buf, sizeof buf, "%d * (%.6g, %.6g, %.6g, %.6g, %.6g, %.6g, %.6g, %.6g)\n",
                  e.count, p.r_perception, p.v_normal, p.v_max, p.w_cohesion, p.w_alignment,
                  p.w_separation, p.p_random_steer, p.w_pacekeeping);
    out += buf;
  }
  return out;
}

MutationConfig MutationConfig::none() {
  MutationConfig c;
  c.p_point = c.p_duplicate_entry = c.p_delete_entry = c.p_resize_count = 0.0;
  return c;
}

bool MutationConfig::is_identity() const {
  return p_point == 0.0 && p_duplicate_entry == 0.0 && p_delete_entry == 0.0 &&
         p_resize_count == 0.0;
}

std::vector<std::string> MutationConfig::validate() const {
  std::vector<std::string> errs;
  auto prob = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) errs.push_back(std::string(name) + ": must be in [0, 1]");
  };
  prob(p_point, "p_point");
  prob(p_duplicate_entry, "p_duplicate_entry");
  prob(p_delete_entry, "p_delete_entry");
  prob(p_resize_count, "p_resize_count");
  if (!(point_sigma_rel > 0.0)) errs.emplace_back("point_sigma_rel: must be > 0");
  if (!(count_resize_rel > 0.0)) errs.emplace_back("count_resize_rel: must be > 0");
  return errs;
}

namespace {

KineticParams point_mutate(const KineticParams& p, double p_point, double sigma, Rng& rng,
                           const ParamRanges& ranges) {
  auto a = p.to_array();
  for (auto& x : a) {
    if (rng.uniform() < p_point) x *= 1.0 + sigma * rng.normal();
  }
  return clamp_params(KineticParams::from_array(a), ranges);
}

}  // namespace

Recipe mutate_recipe(const Recipe& r, const MutationConfig& cfg, Rng& rng,
                     const ParamRanges& ranges) {
  if (cfg.is_identity()) return r;
  std::vector<RecipeEntry> out;
  std::vector<RecipeEntry> duplicates;
  std::size_t remaining = r.size();
  for (const auto& e : r.entries()) {
    RecipeEntry m = e;
    if (rng.uniform() < cfg.p_resize_count) {
      const double scaled = m.count * (1.0 + cfg.count_resize_rel * rng.normal());
      m.count = static_cast<int>(std::clamp(std::lround(scaled), 1L, 1'000'000L));
    }
    m.params = point_mutate(m.params, cfg.p_point, cfg.point_sigma_rel, rng, ranges);
    if (rng.uniform() < cfg.p_duplicate_entry) {
      // The copy always carries a fresh point mutation so it forms a new type.
      RecipeEntry copy = m;
      copy.params = point_mutate(copy.params, 1.0, cfg.point_sigma_rel, rng, ranges);
      duplicates.push_back(copy);
    }
    const bool last_standing = out.empty() && remaining == 1 && duplicates.empty();
    --remaining;
    if (rng.uniform() < cfg.p_delete_entry && !last_standing) continue;
    out.push_back(m);
  }
  out.insert(out.end(), duplicates.begin(), duplicates.end());
  return Recipe(std::move(out), ranges);
}

Recipe mix_recipes(const Recipe& a, const Recipe& b, Rng& rng) {
  std::vector<RecipeEntry> shared;
  std::vector<RecipeEntry> optional;
  for (const auto& e : a.entries()) {
    const auto& be = b.entries();
    if (std::find(be.begin(), be.end(), e) != be.end()) {
      shared.push_back(e);
    } else {
      optional.push_back(e);
    }
  }
  for (const auto& e : b.entries()) {
    if (std::find(shared.begin(), shared.end(), e) == shared.end()) optional.push_back(e);
  }
  for (;;) {
    std::vector<RecipeEntry> kept = shared;
    for (const auto& e : optional) {
      if (rng.coin()) kept.push_back(e);
    }
    if (!kept.empty()) return Recipe(std::move(kept));
  }
}

Recipe random_recipe(Rng& rng, const RandomRecipeOptions& opts) {
  const int span = std::max(0, opts.max_types - opts.min_types);
  int types = opts.min_types + static_cast<int>(rng.below(static_cast<std::uint64_t>(span) + 1));
  types = std::clamp(types, 1, std::max(1, opts.total_count));
  std::vector<RecipeEntry> entries;
  std::vector<double> weights;
  double wsum = 0.0;
  for (int t = 0; t < types; ++t) {
    std::array<double, kParamCount> a{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
      a[i] = opts.ranges[i].lo + rng.uniform() * (opts.ranges[i].hi - opts.ranges[i].lo);
    }
    if (a[1] > a[2]) std::swap(a[1], a[2]);
    entries.push_back({1, KineticParams::from_array(a)});
    weights.push_back(rng.uniform() + 0.05);
    wsum += weights.back();
  }
  // Spread the remaining particles proportionally, remainder to the first type.
  int left = opts.total_count - types;
  int assigned = 0;
  for (int t = 0; t < types; ++t) {
    const int extra = static_cast<int>(std::floor(left * weights[t] / wsum));
    entries[t].count += extra;
    assigned += extra;
  }
  entries[0].count += left - assigned;
  return Recipe(std::move(entries), opts.ranges);
}

std::size_t draw_entry(const Recipe& r, Rng& rng) {
  const auto& es = r.entries();
  if (es.size() == 1) return 0;
  double target = rng.uniform() * r.total_count();
  for (std::size_t i = 0; i < es.size(); ++i) {
    target -= es[i].count;
    if (target < 0.0) return i;
  }
  return es.size() - 1;
}

}  // namespace swarm
