#pragma once

// Critical point location and classification. Roots of the Riemannian
// gradient are found by Newton iteration seeded from a uniform grid,
// deduplicated, then classified through the linearization
// H = G(p)^{-1} Hess F(p), whose spectrum is computed via the symmetric
// similarity G^{-1/2} Hess G^{-1/2}.

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "morseflow/geometry.hpp"
#include "morseflow/rng.hpp"

namespace morseflow {

struct CriticalPoint {
  int id = -1;
  VecN location;
  double value = 0.0;
  int morse_index = 0;
  VecN eigenvalues;          // of H^g, ascending
  std::optional<VecN> v1;    // unit eigenvector of the smallest eigenvalue;
                             // maxima with a spectral gap only
  double gap_rel = 0.0;      // (lambda2 - lambda1)/|lambda1|; +inf when n == 1
  double nondeg_margin = 0.0;

  bool is_minimum(int n) const { (void)n; return morse_index == 0; }
  bool is_maximum(int n) const { return morse_index == n; }
  bool is_saddle(int n) const { return morse_index > 0 && morse_index < n; }
};

struct CriticalSet {
  std::vector<CriticalPoint> points;  // ids equal indices
  std::vector<int> minima, saddles, maxima;

  int size() const { return static_cast<int>(points.size()); }

  // Nearest critical point; ties broken by lowest id.
  int nearest(const Manifold& m, const VecN& x, double* dist_out = nullptr) const {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const CriticalPoint& p : points) {
      double d = m.distance(x, p.location);
      if (d < best_d) {
        best_d = d;
        best = p.id;
      }
    }
    if (dist_out) *dist_out = best_d;
    return best;
  }

  // Distance from point id to the nearest other critical point.
  double nearest_other_distance(const Manifold& m, int id) const {
    double best = std::numeric_limits<double>::infinity();
    for (const CriticalPoint& p : points) {
      if (p.id == id) continue;
      best = std::min(best, m.distance(points[static_cast<size_t>(id)].location, p.location));
    }
    return best;
  }
};

struct EigenData {
  VecN values;  // ascending
  MatN vectors; // eigenvectors of H = G^{-1} Hess F, columns
};

inline MatN linearization(const Landscape& L, const VecN& p) {
  Jet2 j = eval_jet2(L.f, p);
  MatN hess = j.h.to_mat();
  if (L.metric.is_identity()) return hess;
  MetricField::Eval m = L.metric.eval(p);
  MatN h(L.dim());
  for (int c = 0; c < L.dim(); ++c) {
    VecN col = cholesky_solve(m.chol, hess.col(c));
    for (int r = 0; r < L.dim(); ++r) h.at(r, c) = col[r];
  }
  return h;
}

inline EigenData linearization_eigen(const Landscape& L, const VecN& p) {
  Jet2 j = eval_jet2(L.f, p);
  MatN hess = j.h.to_mat();
  EigenData out;
  if (L.metric.is_identity()) {
    EigenSym e = jacobi_eigensym(hess);
    out.values = e.values;
    out.vectors = e.vectors;
    return out;
  }
  MetricField::Eval m = L.metric.eval(p);
  MatN gih = sym_inv_sqrt(m.g);
  EigenSym e = jacobi_eigensym(symmetrized(mul(gih, mul(hess, gih))));
  out.values = e.values;
  out.vectors = MatN(L.dim());
  for (int k = 0; k < L.dim(); ++k) {
    VecN u = normalized(mul(gih, e.vectors.col(k)));
    for (int i = 0; i < L.dim(); ++i) out.vectors.at(i, k) = u[i];
  }
  return out;
}

namespace detail {

inline VecN sign_normalized(VecN v) {
  for (int i = 0; i < v.n; ++i) {
    if (std::fabs(v[i]) > 1e-12) {
      if (v[i] < 0.0) v *= -1.0;
      break;
    }
  }
  return v;
}

// Jacobian of the Riemannian gradient: exact (AD Hessian) for the
// identity metric, central finite differences otherwise.
inline MatN rgrad_jacobian(const Landscape& L, const VecN& x) {
  if (L.metric.is_identity()) return eval_jet2(L.f, x).h.to_mat();
  const int n = L.dim();
  MatN jac(n);
  for (int j = 0; j < n; ++j) {
    double h = 1e-6 * (1.0 + std::fabs(x[j]));
    VecN xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    VecN gp = riemannian_gradient(L, xp);
    VecN gm = riemannian_gradient(L, xm);
    for (int i = 0; i < n; ++i) jac.at(i, j) = (gp[i] - gm[i]) / (2.0 * h);
  }
  return jac;
}

struct NewtonRoot {
  VecN x;
  double residual;
};

inline std::optional<NewtonRoot> newton_from(const Landscape& L, VecN x) {
  const double extent = L.manifold.min_extent();
  for (int iter = 0; iter < 60; ++iter) {
    GradEval g = rgrad_eval(L, x);
    double res = norm(g.rgrad);
    if (res <= 0.5 * L.tol.grad_tol) return NewtonRoot{L.manifold.normalize(x), res};
    MatN jac = rgrad_jacobian(L, x);
    VecN dx;
    if (!solve_general(jac, -1.0 * g.rgrad, dx)) return std::nullopt;
    if (norm(dx) > extent) return std::nullopt;  // diverging; grid gives redundancy
    x += dx;
    if (!L.manifold.contains(x, 0.05 * extent)) return std::nullopt;
    x = L.manifold.normalize(x);
  }
  return std::nullopt;
}

}  // namespace detail

inline CriticalSet find_critical_points(const Landscape& L, int grid_per_axis = 32) {
  if (grid_per_axis < 4) fail(Errc::precondition, "grid_per_axis must be at least 4");
  const int n = L.dim();
  const Manifold& M = L.manifold;

  std::vector<detail::NewtonRoot> roots;
  long cells = 1;
  for (int i = 0; i < n; ++i) cells *= grid_per_axis;
  for (long cell = 0; cell < cells; ++cell) {
    VecN seed(n);
    long rem = cell;
    for (int i = 0; i < n; ++i) {
      int k = static_cast<int>(rem % grid_per_axis);
      rem /= grid_per_axis;
      if (M.periodic()) {
        seed[i] = M.periods[i] * (k + 0.5) / grid_per_axis;
      } else {
        seed[i] = M.lower[i] + (M.upper[i] - M.lower[i]) * (k + 0.5) / grid_per_axis;
      }
    }
    if (auto root = detail::newton_from(L, seed)) {
      if (M.contains(root->x)) roots.push_back(*root);
    }
  }

  // Deterministic dedup: sort lexicographically, cluster by dedup_radius,
  // keep the best-converged member of each cluster.
  std::sort(roots.begin(), roots.end(), [](const detail::NewtonRoot& a, const detail::NewtonRoot& b) {
    for (int i = 0; i < a.x.n; ++i)
      if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
    return false;
  });
  std::vector<detail::NewtonRoot> reps;
  for (const detail::NewtonRoot& r : roots) {
    bool merged = false;
    for (detail::NewtonRoot& rep : reps) {
      if (M.distance(r.x, rep.x) < L.tol.dedup_radius) {
        if (r.residual < rep.residual) rep = r;
        merged = true;
        break;
      }
    }
    if (!merged) reps.push_back(r);
  }
  std::sort(reps.begin(), reps.end(), [](const detail::NewtonRoot& a, const detail::NewtonRoot& b) {
    for (int i = 0; i < a.x.n; ++i)
      if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
    return false;
  });

  CriticalSet cs;
  for (const detail::NewtonRoot& r : reps) {
    if (r.residual > L.tol.grad_tol) continue;
    CriticalPoint p;
    p.id = static_cast<int>(cs.points.size());
    p.location = r.x;
    p.value = eval_value(L.f, r.x);
    EigenData e = linearization_eigen(L, r.x);
    p.eigenvalues = e.values;
    p.nondeg_margin = std::numeric_limits<double>::infinity();
    p.morse_index = 0;
    for (int i = 0; i < n; ++i) {
      p.nondeg_margin = std::min(p.nondeg_margin, std::fabs(e.values[i]));
      if (e.values[i] < 0.0) ++p.morse_index;
    }
    if (p.nondeg_margin <= std::sqrt(L.tol.grad_tol))
      fail(Errc::degenerate_critical_point,
           "non-degeneracy margin " + std::to_string(p.nondeg_margin) + " at " + to_string(r.x));
    p.gap_rel = n == 1 ? std::numeric_limits<double>::infinity()
                       : (e.values[1] - e.values[0]) / std::fabs(e.values[0]);
    if (p.morse_index == n && p.gap_rel > L.tol.gap_rel_tol)
      p.v1 = detail::sign_normalized(e.vectors.col(0));
    cs.points.push_back(p);
  }

  for (const CriticalPoint& p : cs.points) {
    if (p.morse_index == 0)
      cs.minima.push_back(p.id);
    else if (p.morse_index == n)
      cs.maxima.push_back(p.id);
    else
      cs.saddles.push_back(p.id);
  }
  return cs;
}

struct SimplicityResult {
  bool simple = false;  // false => tie within gap_rel_tol
  std::optional<VecN> v1;
  double gap_rel = 0.0;
};

inline SimplicityResult simplicity_gap(const CriticalPoint& p, int n, double gap_rel_tol) {
  if (!p.is_maximum(n)) fail(Errc::precondition, "simplicity_gap requires a maximum");
  SimplicityResult r;
  r.gap_rel = p.gap_rel;
  if (n == 1) {
    r.simple = true;
    r.v1 = VecN{1.0};
    return r;
  }
  if (p.gap_rel > gap_rel_tol) {
    r.simple = true;
    r.v1 = p.v1;
  }
  return r;
}

// Constructive perturbation making the product (A+Q)B have distinct
// eigenvalues: diagonalize B^{1/2} A B^{1/2} = P D P', push strictly
// increasing shifts through v_i = B^{-1/2} p_i, and keep ||Q|| < eps.
inline MatN perturb_distinct_eigs(const MatN& A, const MatN& B, double eps) {
  if (!(eps > 0.0)) fail(Errc::precondition, "eps must be positive");
  const int n = A.n;
  MatN chk;
  if (!cholesky(A, chk) || !cholesky(B, chk))
    fail(Errc::precondition, "perturb_distinct_eigs requires SPD inputs");

  EigenSym eb = jacobi_eigensym(B);
  MatN bh(n), bih(n);
  for (int k = 0; k < n; ++k) {
    double s = std::sqrt(eb.values[k]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        bh.at(i, j) += s * eb.vectors.at(i, k) * eb.vectors.at(j, k);
        bih.at(i, j) += (1.0 / s) * eb.vectors.at(i, k) * eb.vectors.at(j, k);
      }
  }

  EigenSym es = jacobi_eigensym(symmetrized(mul(bh, mul(A, bh))));
  // eigenvalues ascending: strictly increasing shifts keep every pair of
  // shifted values separated
  double cap = 0.9 * eps * eb.values[0];
  MatN E(n);
  for (int i = 0; i < n; ++i) E.at(i, i) = cap * (i + 1) / (n + 1);
  MatN Q = symmetrized(mul(bih, mul(es.vectors, mul(E, mul(es.vectors.transposed(), bih)))));
  return Q;
}

struct EigvecContinuityReport {
  double gap = 0.0;
  double max_ratio = 0.0;  // principal angle * gap / eta, over all trials
  double max_angle = 0.0;
  int trials = 0;
};

// For random symmetric perturbations E with ||E|| = eta, measures the
// rotation of the eigenvector of the smallest eigenvalue.
inline EigvecContinuityReport eigvec_continuity_check(const MatN& A, double eta, int trials,
                                                      RandomStream& rng) {
  const int n = A.n;
  if (n < 2) fail(Errc::precondition, "need dimension >= 2");
  EigenSym ea = jacobi_eigensym(symmetrized(A));
  double gap = ea.values[1] - ea.values[0];
  if (!(gap > 0.0)) fail(Errc::gap_too_small, "smallest eigenvalue is not simple");
  if (!(eta > 0.0) || eta > gap / 4.0)
    fail(Errc::gap_too_small, "perturbation size must satisfy 0 < eta <= gap/4");

  VecN v1 = ea.vectors.col(0);
  EigvecContinuityReport rep;
  rep.gap = gap;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    MatN E(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double g = rng.gaussian();
        E.at(i, j) = g;
        E.at(j, i) = g;
      }
    double s = norm2_sym(E);
    if (s < 1e-12) continue;
    E = (eta / s) * E;
    EigenSym ep = jacobi_eigensym(symmetrized(A + E));
    double c = std::fabs(dot(v1, ep.vectors.col(0)));
    double angle = std::acos(std::min(1.0, c));
    rep.max_angle = std::max(rep.max_angle, angle);
    rep.max_ratio = std::max(rep.max_ratio, angle * gap / eta);
  }
  return rep;
}

}  // namespace morseflow
