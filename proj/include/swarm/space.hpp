#pragma once

#include <cmath>

#include "swarm/vec.hpp"

namespace swarm {

enum class Boundary { Toroidal, Open };

/// World geometry: dimensionality, per-axis extent and boundary rule.
/// Positions live in [0, extent) per axis (closed on the top for Open).
struct Space {
  int dim = 2;
  Vec extent{1000.0, 1000.0, 1000.0};
  Boundary boundary = Boundary::Toroidal;

  // Displacement from `from` to `to`, minimal image when toroidal.
  Vec displacement(const Vec& from, const Vec& to) const {
    Vec d;
    for (int k = 0; k < dim; ++k) {
      double x = to[k] - from[k];
      if (boundary == Boundary::Toroidal) {
        const double half = 0.5 * extent[k];
        if (x > half) {
          x -= extent[k];
        } else if (x < -half) {
          x += extent[k];
        }
      }
      d[k] = x;
    }
    return d;
  }

  double distance2(const Vec& a, const Vec& b) const { return norm2(displacement(a, b)); }

  Vec wrap(Vec p) const {
    for (int k = 0; k < dim; ++k) {
      const double L = extent[k];
      double x = p[k];
      if (x < 0.0 || x >= L) {
        x -= L * std::floor(x / L);
        if (x >= L || x < 0.0) x = 0.0;
      }
      p[k] = x;
    }
    return p;
  }

  /// Apply the boundary rule to a freshly moved particle.
  void confine(Vec& pos, Vec& vel) const {
    if (boundary == Boundary::Toroidal) {
      pos = wrap(pos);
      return;
    }
    for (int k = 0; k < dim; ++k) {
      if (pos[k] < 0.0) {
        pos[k] = 0.0;
        vel[k] = std::abs(vel[k]);
      } else if (pos[k] > extent[k]) {
        pos[k] = extent[k];
        vel[k] = -std::abs(vel[k]);
      }
    }
  }

  Vec center() const {
    Vec c = extent * 0.5;
    if (dim == 2) c[2] = 0.0;
    return c;
  }
};

}  // namespace swarm
