#pragma once

// Chart descriptions: flat torus, inward-flowing box, circle. A single
// global coordinate system covers each supported manifold; torus and
// circle coordinates are kept normalized to [0, L_i).

#include <cmath>

#include "morseflow/errors.hpp"
#include "morseflow/linalg.hpp"

namespace morseflow {

struct Manifold {
  enum class Kind { torus, box, circle };

  Kind kind = Kind::torus;
  int n = 0;
  VecN periods;       // torus, circle
  VecN lower, upper;  // box

  static Manifold torus(const VecN& periods) {
    Manifold m;
    m.kind = Kind::torus;
    m.n = periods.n;
    m.periods = periods;
    for (int i = 0; i < m.n; ++i)
      if (!(periods[i] > 0.0)) fail(Errc::config, "torus periods must be positive");
    return m;
  }

  static Manifold circle(double period) {
    Manifold m;
    m.kind = Kind::circle;
    m.n = 1;
    m.periods = VecN{period};
    if (!(period > 0.0)) fail(Errc::config, "circle period must be positive");
    return m;
  }

  static Manifold box(const VecN& lower, const VecN& upper) {
    Manifold m;
    m.kind = Kind::box;
    m.n = lower.n;
    m.lower = lower;
    m.upper = upper;
    if (lower.n != upper.n) fail(Errc::config, "box bounds dimension mismatch");
    for (int i = 0; i < m.n; ++i)
      if (!(lower[i] < upper[i])) fail(Errc::config, "box requires lower < upper componentwise");
    return m;
  }

  bool periodic() const { return kind != Kind::box; }

  // Wrap periodic coordinates into [0, L_i); identity on boxes.
  VecN normalize(const VecN& x) const {
    if (!periodic()) return x;
    VecN y = x;
    for (int i = 0; i < n; ++i) {
      double L = periods[i];
      y[i] = std::fmod(y[i], L);
      if (y[i] < 0.0) y[i] += L;
      if (y[i] >= L) y[i] -= L;  // fmod can land exactly on L after the add
    }
    return y;
  }

  // Minimum-image displacement to - from (each component in [-L/2, L/2]).
  VecN displacement(const VecN& from, const VecN& to) const {
    VecN d = to - from;
    if (periodic()) {
      for (int i = 0; i < n; ++i) {
        double L = periods[i];
        d[i] -= L * std::round(d[i] / L);
      }
    }
    return d;
  }

  double distance(const VecN& x, const VecN& y) const {
    return norm(displacement(x, y));
  }

  bool contains(const VecN& x, double slack = 0.0) const {
    if (periodic()) return true;
    for (int i = 0; i < n; ++i)
      if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
    return true;
  }

  double min_extent() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      m = std::min(m, periodic() ? periods[i] : upper[i] - lower[i]);
    return m;
  }
};

}  // namespace morseflow
