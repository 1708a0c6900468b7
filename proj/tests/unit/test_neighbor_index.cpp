#include <doctest.h>

#include <cmath>
#include <vector>

#include "swarm/neighbor_index.hpp"
#include "swarm/rng.hpp"

using namespace swarm;

namespace {

// Written from the distance definition, without Space::displacement.
double oracle_dist2(const Vec& a, const Vec& b, int dim, const Vec& extent, bool toroidal) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    double d = std::abs(a[k] - b[k]);
    if (toroidal) d = std::min(d, extent[k] - d);
    s += d * d;
  }
  return s;
}

std::vector<std::size_t> oracle_neighbors(const std::vector<Vec>& pos, std::size_t i, double r,
                                          int dim, const Vec& extent, bool toroidal) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < pos.size(); ++j) {
    if (j != i && oracle_dist2(pos[i], pos[j], dim, extent, toroidal) < r * r) out.push_back(j);
  }
  return out;
}

}  // namespace

TEST_CASE("two particles at distance 5 see each other at r = 6") {
  const Space s{2, {100, 100, 0}, Boundary::Open};
  const std::vector<Vec> pos{{10, 10}, {13, 14}};
  const NeighborIndex idx(s, pos, 6.0);
  CHECK(idx.neighbors_of(0, 6.0) == std::vector<std::size_t>{1});
  CHECK(idx.neighbors_of(1, 6.0) == std::vector<std::size_t>{0});
  CHECK(idx.neighbors_of(0, 5.0).empty());
}

TEST_CASE("toroidal wrap makes x = 1 and x = 99 neighbours") {
  const Space torus{2, {100, 100, 0}, Boundary::Toroidal};
  const std::vector<Vec> pos{{1, 50}, {99, 50}};
  const NeighborIndex idx(torus, pos, 5.0);
  CHECK(idx.neighbors_of(0, 5.0) == std::vector<std::size_t>{1});
  CHECK(idx.neighbors_of(1, 5.0) == std::vector<std::size_t>{0});

  const Space open{2, {100, 100, 0}, Boundary::Open};
  const NeighborIndex idx_open(open, pos, 5.0);
  CHECK(idx_open.neighbors_of(0, 5.0).empty());
}

TEST_CASE("displacement reports the minimal image") {
  const Space torus{2, {100, 100, 0}, Boundary::Toroidal};
  std::vector<Vec> seen;
  const std::vector<Vec> pos{{1, 50}, {99, 50}};
  const NeighborIndex idx(torus, pos, 5.0);
  idx.for_each_neighbor(0, 5.0, [&](std::size_t, const Vec& d, double d2) {
    seen.push_back(d);
    CHECK(d2 == doctest::Approx(4.0));
  });
  REQUIRE(seen.size() == 1);
  CHECK(seen[0][0] == doctest::Approx(-2.0));
}

TEST_CASE("grid equals brute-force oracle on randomized instances") {
  Rng rng(2024);
  for (int inst = 0; inst < 120; ++inst) {
    const int dim = inst % 2 ? 3 : 2;
    const bool toroidal = (inst / 2) % 2 == 0;
    Vec extent{50 + 450 * rng.uniform(), 50 + 450 * rng.uniform(), dim == 3 ? 50 + 450 * rng.uniform() : 0};
    const Space s{dim, extent, toroidal ? Boundary::Toroidal : Boundary::Open};
    const std::size_t n = 2 + rng.below(500);
    std::vector<Vec> pos(n);
    for (auto& p : pos) {
      for (int k = 0; k < dim; ++k) p[k] = rng.uniform() * extent[k];
    }
    // Some coincident points and points on the far edge.
    if (n > 4) {
      pos[1] = pos[0];
      for (int k = 0; k < dim; ++k) pos[2][k] = toroidal ? 0.0 : extent[k];
    }
    const double rmax = 1 + 80 * rng.uniform();
    const NeighborIndex grid(s, pos, rmax);
    const NeighborIndex brute(s, pos, rmax, true);
    CHECK(brute.cells_per_axis() == std::array<int, 3>{1, 1, 1});
    for (std::size_t i = 0; i < n; ++i) {
      const double r = rmax * rng.uniform();
      const auto want = oracle_neighbors(pos, i, r, dim, extent, toroidal);
      REQUIRE(grid.neighbors_of(i, r) == want);
      REQUIRE(brute.neighbors_of(i, r) == want);
    }
  }
}

TEST_CASE("radius larger than half the extent does not double count") {
  const Space torus{2, {30, 30, 0}, Boundary::Toroidal};
  Rng rng(9);
  std::vector<Vec> pos(40);
  for (auto& p : pos) p = {rng.uniform() * 30, rng.uniform() * 30, 0};
  const NeighborIndex idx(torus, pos, 20.0);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    CHECK(idx.neighbors_of(i, 20.0) == oracle_neighbors(pos, i, 20.0, 2, torus.extent, true));
  }
}

TEST_CASE("long radii on elongated worlds match the oracle") {
  // One axis is covered whole by the query while the other is scanned
  // partially; points sit on cell boundaries.
  Rng rng(31);
  for (int inst = 0; inst < 40; ++inst) {
    const bool toroidal = inst % 2 == 0;
    const Vec extent{1200, 90, 0};
    const Space s{2, extent, toroidal ? Boundary::Toroidal : Boundary::Open};
    const double rmax = 60 + 400 * rng.uniform();
    std::vector<Vec> pos(300);
    const double cell = rmax / 3.0;
    for (auto& p : pos) {
      p = {rng.uniform() * extent[0], rng.uniform() * extent[1], 0};
      if (rng.coin()) p[0] = std::min(extent[0], std::floor(p[0] / cell) * cell);
    }
    const NeighborIndex grid(s, pos, rmax);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      const double r = i % 3 == 0 ? rmax : rmax * rng.uniform();
      REQUIRE(grid.neighbors_of(i, r) == oracle_neighbors(pos, i, r, 2, extent, toroidal));
    }
  }
}

TEST_CASE("point queries include every particle in range") {
  const Space s{3, {100, 100, 100}, Boundary::Open};
  const std::vector<Vec> pos{{10, 10, 10}, {12, 10, 10}, {60, 60, 60}};
  const NeighborIndex idx(s, pos, 10.0);
  std::size_t hits = 0;
  idx.for_each_within({11, 10, 10}, 5.0, [&](std::size_t, const Vec&, double) { ++hits; });
  CHECK(hits == 2);
}

TEST_CASE("non-positive radius is rejected") {
  const Space s{};
  const std::vector<Vec> pos{{1, 1}};
  CHECK_THROWS_AS(NeighborIndex(s, pos, 0.0), std::invalid_argument);
}
