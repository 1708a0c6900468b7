#include "swarm/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swarm {

namespace {

constexpr double kCellsPerRadius = 3.0;

}  // namespace

NeighborIndex::NeighborIndex(const Space& space, std::span<const Vec> positions,
                             double max_radius, bool brute_force)
    : space_(space), max_radius_(max_radius), positions_(positions) {
  if (!(max_radius > 0.0)) throw std::invalid_argument("neighbor index radius must be > 0");
  for (int k = 0; k < space_.dim; ++k) {
    if (!brute_force) {
      const double cells = std::floor(space_.extent[k] * kCellsPerRadius / max_radius);
      ncell_[k] = static_cast<int>(std::clamp(cells, 1.0, 65536.0));
    }
  }
  // Coarsen until the grid is proportionate to the population; wider cells
  // never break correctness.
  const std::size_t budget = std::max<std::size_t>(64, 2 * positions.size());
  while (static_cast<std::size_t>(ncell_[0]) * ncell_[1] * ncell_[2] > budget) {
    auto widest = std::max_element(ncell_.begin(), ncell_.end());
    *widest = std::max(1, *widest / 2);
  }
  for (int k = 0; k < space_.dim; ++k) cell_size_[k] = space_.extent[k] / ncell_[k];
  const std::size_t total = static_cast<std::size_t>(ncell_[0]) * ncell_[1] * ncell_[2];

  std::vector<std::uint32_t> cell_of_particle(positions.size());
  cell_start_.assign(total + 1, 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto c = flat(cell_of(positions[i]));
    cell_of_particle[i] = static_cast<std::uint32_t>(c);
    ++cell_start_[c + 1];
  }
  for (std::size_t c = 0; c < total; ++c) cell_start_[c + 1] += cell_start_[c];

  order_.resize(positions.size());
  sorted_pos_.resize(positions.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto slot = fill[cell_of_particle[i]]++;
    order_[slot] = static_cast<std::uint32_t>(i);
    sorted_pos_[slot] = positions[i];
  }
}

std::array<int, 3> NeighborIndex::cell_of(const Vec& p) const {
  std::array<int, 3> c{0, 0, 0};
  for (int k = 0; k < space_.dim; ++k) {
    double x = p[k];
    if (space_.boundary == Boundary::Toroidal) x = x - space_.extent[k] * std::floor(x / space_.extent[k]);
    const int v = static_cast<int>(std::floor(x / cell_size_[k]));
    c[k] = std::clamp(v, 0, ncell_[k] - 1);
  }
  return c;
}

void NeighborIndex::locate(const Vec& p, std::array<int, 3>& cell, Vec& local) const {
  for (int k = 0; k < space_.dim; ++k) {
    double x = p[k];
    if (space_.boundary == Boundary::Toroidal) x = x - space_.extent[k] * std::floor(x / space_.extent[k]);
    const int v = static_cast<int>(std::floor(x / cell_size_[k]));
    cell[k] = std::clamp(v, 0, ncell_[k] - 1);
    local[k] = x - cell[k] * cell_size_[k];
  }
}

std::vector<std::size_t> NeighborIndex::neighbors_of(std::size_t i, double r) const {
  std::vector<std::size_t> out;
  for_each_neighbor(i, r, [&](std::size_t j, const Vec&, double) { out.push_back(j); });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace swarm
