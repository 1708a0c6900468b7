#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "swarm/space.hpp"

namespace swarm {

/// Uniform grid over the world with cells about a third of `max_radius`
/// wide. A query scans the cells within its own radius, skipping cells
/// whose nearest point is out of range. A grid with one cell per axis
/// degenerates into a brute-force scan.
class NeighborIndex {
 public:
  NeighborIndex(const Space& space, std::span<const Vec> positions, double max_radius,
                bool brute_force = false);

  /// Calls fn(j, displacement_i_to_j, dist2) for every j != i with dist < r.
  template <class F>
  void for_each_neighbor(std::size_t i, double r, F&& fn) const {
    visit(positions_[i], r, [&](std::size_t j, const Vec& d, double d2) {
      if (j != i) fn(j, d, d2);
    });
  }

  /// Same as above for an arbitrary point; nothing is excluded.
  template <class F>
  void for_each_within(const Vec& p, double r, F&& fn) const {
    visit(p, r, fn);
  }

  std::vector<std::size_t> neighbors_of(std::size_t i, double r) const;

  const Space& space() const { return space_; }
  double max_radius() const { return max_radius_; }
  std::size_t size() const { return positions_.size(); }
  const std::array<int, 3>& cells_per_axis() const { return ncell_; }

 private:
  std::array<int, 3> cell_of(const Vec& p) const;
  std::size_t flat(const std::array<int, 3>& c) const {
    return (static_cast<std::size_t>(c[2]) * ncell_[1] + c[1]) * ncell_[0] + c[0];
  }

  /// Home cell of `p` and the offset of `p` inside it, per axis.
  void locate(const Vec& p, std::array<int, 3>& cell, Vec& local) const;

  template <class F>
  void visit(const Vec& p, double r, F&& fn) const {
    const double r2 = r * r;
    std::array<int, 3> home{0, 0, 0};
    Vec local;
    locate(p, home, local);
    const bool torus = space_.boundary == Boundary::Toroidal;

    // Scanned offsets per axis. When the reach spans the axis every cell is
    // listed once, without wrapping.
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
    std::array<bool, 3> whole{true, true, true};
    for (int k = 0; k < space_.dim; ++k) {
      const int n = ncell_[k];
      const double cells = std::ceil(r / cell_size_[k]);
      const int reach = cells < n ? static_cast<int>(cells) : n;
      whole[k] = 2 * reach + 1 >= n;
      if (whole[k]) {
        lo[k] = -home[k];
        hi[k] = n - 1 - home[k];
      } else if (torus) {
        lo[k] = -reach;
        hi[k] = reach;
      } else {
        lo[k] = std::max(-reach, -home[k]);
        hi[k] = std::min(reach, n - 1 - home[k]);
      }
    }
    // Lower bound on the distance from p to any point of the cell at offset o.
    auto gap2 = [&](int k, int o) {
      if (o == 0 || (whole[k] && torus)) return 0.0;
      const double cs = cell_size_[k];
      const double g = o > 0 ? (o - 1) * cs + (cs - local[k]) : (-o - 1) * cs + local[k];
      const double safe = std::max(0.0, g - 1e-9 * cs);
      return safe * safe;
    };
    auto wrap = [&](int k, int c) {
      const int n = ncell_[k];
      return c < 0 ? c + n : (c >= n ? c - n : c);
    };
    for (int o2 = lo[2]; o2 <= hi[2]; ++o2) {
      const double g2 = gap2(2, o2);
      if (g2 >= r2) continue;
      const int c2 = wrap(2, home[2] + o2);
      for (int o1 = lo[1]; o1 <= hi[1]; ++o1) {
        const double g1 = g2 + gap2(1, o1);
        if (g1 >= r2) continue;
        const int c1 = wrap(1, home[1] + o1);
        for (int o0 = lo[0]; o0 <= hi[0]; ++o0) {
          if (g1 + gap2(0, o0) >= r2) continue;
          const std::size_t cell = flat({wrap(0, home[0] + o0), c1, c2});
          for (std::uint32_t q = cell_start_[cell]; q < cell_start_[cell + 1]; ++q) {
            const Vec d = space_.displacement(p, sorted_pos_[q]);
            const double d2 = norm2(d);
            if (d2 < r2) fn(static_cast<std::size_t>(order_[q]), d, d2);
          }
        }
      }
    }
  }

  Space space_;
  double max_radius_;
  std::span<const Vec> positions_;
  std::array<int, 3> ncell_{1, 1, 1};
  std::array<double, 3> cell_size_{1.0, 1.0, 1.0};
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec> sorted_pos_;
};

}  // namespace swarm
