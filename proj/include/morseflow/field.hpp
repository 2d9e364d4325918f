#pragma once

// Catalog of builtin scalar fields with their natural charts.

#include <string>
#include <vector>

#include "morseflow/expr.hpp"
#include "morseflow/jet.hpp"
#include "morseflow/manifold.hpp"

namespace morseflow {

struct Builtin {
  std::string name;
  Expr f;
  Manifold manifold;
  std::string description;
};

inline const std::vector<Builtin>& builtin_catalog() {
  static const double tau = 6.283185307179586476925287;
  static const std::vector<Builtin> catalog = [] {
    std::vector<Builtin> c;
    VecN t2{tau, tau};
    c.push_back({"torus2_sep", parse_expr("cos(x1) + 0.5*cos(x2)", 2), Manifold::torus(t2),
                 "separable two-mode field on the flat 2-torus"});
    c.push_back({"torus2_skew",
                 parse_expr("cos(x1) + 0.5*cos(x2) + 0.3*cos(x1 - x2)", 2), Manifold::torus(t2),
                 "skewed two-mode field on the flat 2-torus"});
    c.push_back({"circle_1", parse_expr("sin(x1)", 1), Manifold::circle(tau),
                 "one maximum / one minimum on the circle"});
    c.push_back({"circle_2", parse_expr("sin(2*x1)", 1), Manifold::circle(tau),
                 "two maxima / two minima on the circle"});
    c.push_back({"circle_3", parse_expr("sin(3*x1)", 1), Manifold::circle(tau),
                 "three maxima / three minima on the circle"});
    c.push_back({"box_quad", parse_expr("-2*x1^2 - x2^2", 2),
                 Manifold::box(VecN{-1.0, -1.0}, VecN{1.0, 1.0}),
                 "concave quadratic -x'Qx, Q = diag(2,1); single maximum at the origin"});
    c.push_back({"box_bowl", parse_expr("x1^2 + 2*x2^2", 2),
                 Manifold::box(VecN{-1.0, -1.0}, VecN{1.0, 1.0}),
                 "convex quadratic x'Qx, Q = diag(1,2); single minimum, inward-flowing"});
    c.push_back({"interval_2", parse_expr("cos(3*x1)", 1),
                 Manifold::box(VecN{0.1}, VecN{tau - 0.1}),
                 "two maxima / three minima on an interval, inward-flowing"});
    return c;
  }();
  return catalog;
}

inline const Builtin& builtin(const std::string& name) {
  for (const Builtin& b : builtin_catalog())
    if (b.name == name) return b;
  fail(Errc::unknown_builtin, name);
}

}  // namespace morseflow
