#pragma once

// Landscape = chart + metric field + scalar field + reference density +
// tolerances. The Riemannian gradient is G^{-1} dF; the density defaults
// to the Riemannian volume weight sqrt(det G).

#include <optional>
#include <vector>

#include "morseflow/expr.hpp"
#include "morseflow/field.hpp"
#include "morseflow/jet.hpp"
#include "morseflow/manifold.hpp"
#include "morseflow/rng.hpp"

namespace morseflow {

struct ToleranceSet {
  double grad_tol = 1e-9;
  double dedup_radius = 1e-5;
  double gap_rel_tol = 1e-6;
  double capture_radius = 1e-3;
  double ode_rel_tol = 1e-9;
  double ode_abs_tol = 1e-12;
  double t_max = 1e4;

  void validate() const {
    if (!(grad_tol > 0 && dedup_radius > 0 && gap_rel_tol > 0 && capture_radius > 0 &&
          ode_rel_tol > 0 && ode_abs_tol > 0 && t_max > 0))
      fail(Errc::config, "all tolerances must be strictly positive");
  }

  // Uniformly tightened copy (used by the robustness re-runs).
  ToleranceSet tightened(double factor) const {
    ToleranceSet t = *this;
    t.grad_tol /= factor;
    t.ode_rel_tol /= factor;
    t.ode_abs_tol /= factor;
    t.capture_radius /= factor;
    return t;
  }
};

class MetricField {
 public:
  // Positive-definiteness is checked at every evaluation; entries above
  // the diagonal define the matrix, symmetry is by construction.
  struct Eval {
    MatN g;
    MatN chol;        // lower Cholesky factor
    double sqrt_det;  // prod of chol diagonal
  };

  static MetricField identity() { return MetricField(); }

  static MetricField from_entries(int n, const std::vector<std::vector<std::string>>& rows) {
    MetricField m;
    m.n_ = n;
    if (static_cast<int>(rows.size()) != n) fail(Errc::config, "metric matrix must be n x n");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != n)
        fail(Errc::config, "metric matrix must be n x n");
      for (int j = i; j < n; ++j)
        m.upper_.push_back(parse_expr(rows[static_cast<size_t>(i)][static_cast<size_t>(j)], n));
    }
    return m;
  }

  bool is_identity() const { return upper_.empty(); }
  int dim() const { return n_; }

  Eval eval(const VecN& x) const {
    Eval e;
    if (is_identity()) {
      e.g = MatN::identity(x.n);
      e.chol = e.g;
      e.sqrt_det = 1.0;
      return e;
    }
    e.g = MatN(n_);
    int k = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        double v = eval_value(upper_[static_cast<size_t>(k++)], x);
        e.g.at(i, j) = v;
        e.g.at(j, i) = v;
      }
    if (!cholesky(e.g, e.chol))
      fail(Errc::metric_not_spd, "metric not positive definite at " + to_string(x));
    e.sqrt_det = 1.0;
    for (int i = 0; i < n_; ++i) e.sqrt_det *= e.chol.at(i, i);
    return e;
  }

 private:
  int n_ = 0;
  std::vector<Expr> upper_;  // row-major upper triangle; empty => identity
};

struct Landscape {
  Manifold manifold;
  Expr f;
  MetricField metric = MetricField::identity();
  std::optional<Expr> density;  // empty => sqrt(det G)
  ToleranceSet tol;

  int dim() const { return manifold.n; }

  double density_at(const VecN& x) const {
    double mu = density ? eval_value(*density, x) : metric.eval(x).sqrt_det;
    if (!(mu > 0.0)) fail(Errc::config, "density not strictly positive at " + to_string(x));
    return mu;
  }
};

inline Landscape landscape_from_builtin(const std::string& name) {
  const Builtin& b = builtin(name);
  Landscape L;
  L.manifold = b.manifold;
  L.f = b.f;
  return L;
}

struct GradEval {
  double value;
  VecN df;     // coordinate differential
  VecN rgrad;  // G^{-1} df
};

inline GradEval rgrad_eval(const Landscape& L, const VecN& x) {
  GradEval r;
  Jet1 j = eval_jet1(L.f, x);
  r.value = j.v;
  r.df = j.g;
  if (L.metric.is_identity()) {
    r.rgrad = j.g;
  } else {
    MetricField::Eval m = L.metric.eval(x);
    r.rgrad = cholesky_solve(m.chol, j.g);
  }
  return r;
}

inline VecN riemannian_gradient(const Landscape& L, const VecN& x) {
  return rgrad_eval(L, x).rgrad;
}

// Draw one point distributed proportionally to the density restricted to
// the distance ball B_delta(p), by rejection from the enclosing cube.
// The density bound is fixed up front from a deterministic probe grid so
// that the draw is a pure function of the stream.
inline VecN sample_ball(const Landscape& L, const VecN& p, double delta, RandomStream& rng) {
  if (!(delta > 0.0)) fail(Errc::precondition, "sample_ball requires delta > 0");
  if (L.manifold.periodic() && delta > 0.5 * L.manifold.min_extent())
    fail(Errc::precondition, "ball does not fit in one chart");

  const int n = L.dim();
  double mu_cap = 0.0;
  const int probe = 5;
  long cells = 1;
  for (int i = 0; i < n; ++i) cells *= probe;
  VecN q(n);
  for (long cell = 0; cell < cells; ++cell) {
    long rem = cell;
    for (int i = 0; i < n; ++i) {
      int k = static_cast<int>(rem % probe);
      rem /= probe;
      q[i] = p[i] + delta * (2.0 * (k + 0.5) / probe - 1.0);
    }
    mu_cap = std::max(mu_cap, L.density_at(L.manifold.normalize(q)));
  }
  mu_cap *= 2.0;

  long attempts = 0, accepted_checked = 10000;
  for (;;) {
    ++attempts;
    VecN x(n);
    for (int i = 0; i < n; ++i) x[i] = p[i] + rng.uniform(-delta, delta);
    x = L.manifold.normalize(x);
    if (L.manifold.distance(x, p) > delta) {
      if (attempts >= accepted_checked) fail(Errc::rejection_overflow, "acceptance rate below 1e-4");
      continue;
    }
    double mu = L.density_at(x);
    if (mu > mu_cap) fail(Errc::internal, "density exceeded probe bound in sample_ball");
    if (rng.uniform01() * mu_cap <= mu) return x;
    if (attempts >= accepted_checked) fail(Errc::rejection_overflow, "acceptance rate below 1e-4");
  }
}

struct InvarianceReport {
  double min_margin = 0.0;  // min over boundary samples of dF . outward normal
  VecN worst_point;
  int samples = 0;
};

// Samples the box boundary and checks that the descent field -grad F
// points strictly inward, i.e. dF . nu > 0 for the outward normal nu.
inline InvarianceReport check_invariance(const Landscape& L, int boundary_samples) {
  if (L.manifold.kind != Manifold::Kind::box)
    fail(Errc::precondition, "check_invariance requires a box manifold");
  const int n = L.dim();
  InvarianceReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();

  int per_face = std::max(1, boundary_samples / (2 * n));
  int per_axis = 1;
  if (n > 1) {
    per_axis = static_cast<int>(std::ceil(std::pow(static_cast<double>(per_face), 1.0 / (n - 1))));
    per_axis = std::max(per_axis, 2);
  }

  for (int axis = 0; axis < n; ++axis) {
    for (int side = 0; side < 2; ++side) {
      long cells = 1;
      for (int i = 0; i < n - 1; ++i) cells *= per_axis;
      for (long cell = 0; cell < cells; ++cell) {
        VecN x(n);
        x[axis] = side ? L.manifold.upper[axis] : L.manifold.lower[axis];
        long rem = cell;
        for (int i = 0; i < n; ++i) {
          if (i == axis) continue;
          int k = static_cast<int>(rem % per_axis);
          rem /= per_axis;
          double t = (k + 0.5) / per_axis;
          x[i] = L.manifold.lower[i] + t * (L.manifold.upper[i] - L.manifold.lower[i]);
        }
        double nu_sign = side ? 1.0 : -1.0;
        GradEval g = rgrad_eval(L, x);
        double margin = nu_sign * g.rgrad[axis];  // (-grad F).nu = -margin
        ++rep.samples;
        if (margin < rep.min_margin) {
          rep.min_margin = margin;
          rep.worst_point = x;
        }
        if (!(margin > 0.0))
          fail(Errc::not_inward_flowing,
               "descent field does not point inward at " + to_string(x));
      }
    }
  }
  return rep;
}

}  // namespace morseflow
