#include <doctest.h>

#include <cmath>

#include "morseflow/critical.hpp"
#include "oracles.hpp"

using namespace morseflow;

namespace {
const double pi = 3.14159265358979323846;

MatN mat2(double a, double b, double c, double d) {
  MatN m(2);
  m.at(0, 0) = a;
  m.at(0, 1) = b;
  m.at(1, 0) = c;
  m.at(1, 1) = d;
  return m;
}

MatN random_spd(int n, RandomStream& rng) {
  MatN V(n);
  for (int k = 0; k < n; ++k) {
    VecN v = rng.gaussian_vec(n);
    for (int j = 0; j < k; ++j) {
      VecN prev = V.col(j);
      v -= dot(v, prev) * prev;
    }
    v = normalized(v);
    for (int i = 0; i < n; ++i) V.at(i, k) = v[i];
  }
  MatN A(n);
  for (int k = 0; k < n; ++k) {
    double lam = rng.uniform(0.3, 2.5);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A.at(i, j) += lam * V.at(i, k) * V.at(j, k);
  }
  return symmetrized(A);
}
}  // namespace

TEST_CASE("torus2_sep critical set matches the analytic solution") {
  Landscape L = landscape_from_builtin("torus2_sep");
  CriticalSet cs = find_critical_points(L);
  REQUIRE(cs.size() == 4);
  CHECK(cs.maxima.size() == 1);
  CHECK(cs.saddles.size() == 2);
  CHECK(cs.minima.size() == 1);
  // Euler characteristic of the 2-torus
  CHECK(static_cast<int>(cs.minima.size()) - static_cast<int>(cs.saddles.size()) +
            static_cast<int>(cs.maxima.size()) ==
        0);

  const CriticalPoint& mx = cs.points[static_cast<size_t>(cs.maxima[0])];
  CHECK(L.manifold.distance(mx.location, VecN{0.0, 0.0}) < 1e-9);
  CHECK(mx.value == doctest::Approx(1.5));
  const CriticalPoint& mn = cs.points[static_cast<size_t>(cs.minima[0])];
  CHECK(L.manifold.distance(mn.location, VecN{pi, pi}) < 1e-9);
  for (int s : cs.saddles) {
    const CriticalPoint& sp = cs.points[static_cast<size_t>(s)];
    bool at_0pi = L.manifold.distance(sp.location, VecN{0.0, pi}) < 1e-9;
    bool at_pi0 = L.manifold.distance(sp.location, VecN{pi, 0.0}) < 1e-9;
    CHECK((at_0pi || at_pi0));
  }
}

TEST_CASE("circle_1 has its extrema at the quarter points") {
  Landscape L = landscape_from_builtin("circle_1");
  CriticalSet cs = find_critical_points(L);
  REQUIRE(cs.size() == 2);
  REQUIRE(cs.maxima.size() == 1);
  REQUIRE(cs.minima.size() == 1);
  CHECK(L.manifold.distance(cs.points[static_cast<size_t>(cs.maxima[0])].location,
                            VecN{pi / 2}) < 1e-9);
  CHECK(L.manifold.distance(cs.points[static_cast<size_t>(cs.minima[0])].location,
                            VecN{3 * pi / 2}) < 1e-9);
}

TEST_CASE("torus2_skew critical points agree with the grid-refinement oracle") {
  Landscape L = landscape_from_builtin("torus2_skew");
  CriticalSet cs = find_critical_points(L);
  REQUIRE(cs.size() == 4);
  CHECK(static_cast<int>(cs.minima.size()) - static_cast<int>(cs.saddles.size()) +
            static_cast<int>(cs.maxima.size()) ==
        0);
  for (const CriticalPoint& p : cs.points) CHECK(p.nondeg_margin > std::sqrt(L.tol.grad_tol));

  std::vector<VecN> oracle = oracles::grid_refine_critical_points(L);
  REQUIRE(oracle.size() == 4);
  for (const VecN& root : oracle) {
    double best = 1e9;
    for (const CriticalPoint& p : cs.points)
      best = std::min(best, L.manifold.distance(root, p.location));
    CHECK(best < 1e-8);
  }
}

TEST_CASE("newton grid search works under a position-dependent metric") {
  Landscape L = landscape_from_builtin("torus2_sep");
  L.metric = MetricField::from_entries(
      2, {{"1 + 0.5*sin(x1)^2", "0.1*cos(x2)"}, {"0.1*cos(x2)", "1"}});
  CriticalSet cs = find_critical_points(L, 16);
  // roots of G^{-1} dF are the roots of dF
  REQUIRE(cs.size() == 4);
  CHECK(cs.maxima.size() == 1);
  CHECK(cs.minima.size() == 1);
  CHECK(L.manifold.distance(cs.points[static_cast<size_t>(cs.maxima[0])].location,
                            VecN{0.0, 0.0}) < 1e-8);
}

TEST_CASE("linearization at the separable maximum") {
  Landscape L = landscape_from_builtin("torus2_sep");
  MatN h = linearization(L, VecN{0.0, 0.0});
  CHECK(h.at(0, 0) == doctest::Approx(-1.0));
  CHECK(h.at(1, 1) == doctest::Approx(-0.5));
  CHECK(std::fabs(h.at(0, 1)) < 1e-15);

  EigenData e = linearization_eigen(L, VecN{0.0, 0.0});
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(-0.5));
}

TEST_CASE("repeated eigenvalue for the symmetric field") {
  Landscape L;
  L.manifold = Manifold::torus(VecN{2 * pi, 2 * pi});
  L.f = parse_expr("cos(x1) + cos(x2)", 2);
  EigenData e = linearization_eigen(L, VecN{0.0, 0.0});
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(-1.0));
}

TEST_CASE("the metric can create eigenvalue ties") {
  Landscape L;
  L.manifold = Manifold::box(VecN{-1.0, -1.0}, VecN{1.0, 1.0});
  L.f = parse_expr("-2*x1^2 - 0.5*x2^2", 2);  // Hess = diag(-4, -1)
  L.metric = MetricField::from_entries(2, {{"4", "0"}, {"0", "1"}});
  EigenData e = linearization_eigen(L, VecN{0.0, 0.0});
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(-1.0));
}

TEST_CASE("eigenvalues of the linearization are chart independent") {
  Landscape L = landscape_from_builtin("torus2_skew");
  VecN p{0.0, 0.0};  // near the maximum; exact criticality not needed here
  MatN hess = eval_jet2(L.f, p).h.to_mat();
  MatN G = MatN::identity(2);

  RandomStream rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    MatN A(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) A.at(i, j) = (i == j ? 1.0 : 0.0) + 0.3 * rng.gaussian();
    // pull back: Hess' = A' Hess A, G' = A' G A; spectrum of G'^-1 Hess'
    // equals the spectrum of G^-1 Hess
    MatN hess2 = symmetrized(mul(A.transposed(), mul(hess, A)));
    MatN g2 = symmetrized(mul(A.transposed(), mul(G, A)));
    MatN chk;
    if (!cholesky(g2, chk)) continue;  // rare ill-conditioned draw
    MatN gih = sym_inv_sqrt(g2);
    EigenSym e2 = jacobi_eigensym(symmetrized(mul(gih, mul(hess2, gih))));
    EigenSym e1 = jacobi_eigensym(hess);
    for (int k = 0; k < 2; ++k)
      CHECK(std::fabs(e2.values[k] - e1.values[k]) <= 1e-8 * (1 + std::fabs(e1.values[k])));
  }
}

TEST_CASE("morse index equals the negative eigenvalue count everywhere") {
  for (const char* name : {"torus2_sep", "torus2_skew", "circle_3", "interval_2"}) {
    Landscape L = landscape_from_builtin(name);
    CriticalSet cs = find_critical_points(L);
    for (const CriticalPoint& p : cs.points) {
      int neg = 0;
      for (int i = 0; i < L.dim(); ++i)
        if (p.eigenvalues[i] < 0) ++neg;
      CHECK(p.morse_index == neg);
      if (p.morse_index == L.dim())
        for (int i = 0; i < L.dim(); ++i) CHECK(p.eigenvalues[i] < 0);
      if (p.morse_index == 0)
        for (int i = 0; i < L.dim(); ++i) CHECK(p.eigenvalues[i] > 0);
    }
    // pairwise separation from dedup
    for (const CriticalPoint& a : cs.points)
      for (const CriticalPoint& b : cs.points)
        if (a.id != b.id) CHECK(L.manifold.distance(a.location, b.location) >= L.tol.dedup_radius);
  }
}

TEST_CASE("degenerate critical point is a hard error") {
  Landscape L;
  L.manifold = Manifold::box(VecN{-1.0, -1.0}, VecN{1.0, 1.0});
  L.f = parse_expr("x1^4 + x2^2", 2);
  try {
    find_critical_points(L, 8);
    FAIL("expected DegenerateCriticalPoint");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_critical_point);
  }
}

TEST_CASE("simplicity gap on the separable maximum") {
  Landscape L = landscape_from_builtin("torus2_sep");
  CriticalSet cs = find_critical_points(L);
  const CriticalPoint& mx = cs.points[static_cast<size_t>(cs.maxima[0])];
  SimplicityResult r = simplicity_gap(mx, 2, L.tol.gap_rel_tol);
  CHECK(r.simple);
  CHECK(r.gap_rel == doctest::Approx(0.5).epsilon(1e-9));
  REQUIRE(r.v1);
  CHECK((*r.v1)[0] == doctest::Approx(1.0).epsilon(1e-9));  // sign-normalized e1
  CHECK(std::fabs((*r.v1)[1]) < 1e-9);
}

TEST_CASE("ties are values, not errors") {
  CriticalPoint p;
  p.morse_index = 2;
  p.eigenvalues = VecN{-1.0, -1.0};
  p.gap_rel = 0.0;
  CHECK_FALSE(simplicity_gap(p, 2, 1e-6).simple);

  p.eigenvalues = VecN{-1.0, -1.0 + 1e-9};
  p.gap_rel = 1e-9;
  CHECK_FALSE(simplicity_gap(p, 2, 1e-6).simple);

  CriticalPoint mn;
  mn.morse_index = 0;
  CHECK_THROWS_AS(simplicity_gap(mn, 2, 1e-6), Error);
}

TEST_CASE("perturbation of the identity pair") {
  MatN I2 = MatN::identity(2);
  MatN Q = perturb_distinct_eigs(I2, I2, 0.1);
  EigenSym eq = jacobi_eigensym(Q);
  CHECK(eq.values[0] > 0);            // SPD
  CHECK(eq.values[1] < 0.1);          // norm bound
  CHECK(eq.values[1] != eq.values[0]);
  EigenSym e = jacobi_eigensym(symmetrized(I2 + Q));  // (I+Q) I
  CHECK(e.values[1] - e.values[0] > 1e-3);
}

TEST_CASE("random SPD pairs with forced repeated product spectrum") {
  RandomStream rng(2718);
  int done = 0;
  while (done < 200) {
    int n = 2 + static_cast<int>(rng.uniform_index(3));
    MatN B = random_spd(n, rng);
    // choose D with a forced tie, then A = B^-1/2 P D P' B^-1/2 so that
    // AB has exactly spectrum D
    EigenSym eb = jacobi_eigensym(B);
    MatN bih(n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          bih.at(i, j) += (1.0 / std::sqrt(eb.values[k])) * eb.vectors.at(i, k) * eb.vectors.at(j, k);
    MatN D(n);
    double tie = rng.uniform(0.5, 2.0);
    for (int i = 0; i < n; ++i) D.at(i, i) = i < 2 ? tie : rng.uniform(0.5, 3.0);
    MatN P(n);
    {
      MatN tmp = random_spd(n, rng);
      P = jacobi_eigensym(tmp).vectors;  // orthogonal
    }
    MatN A = symmetrized(mul(bih, mul(P, mul(D, mul(P.transposed(), bih)))));

    double eps = done % 2 == 0 ? 1e-3 : 1e-8;
    MatN Q = perturb_distinct_eigs(A, B, eps);

    EigenSym eq = jacobi_eigensym(Q);
    CHECK(eq.values[0] > 0);
    CHECK(norm2_sym(Q) < eps);

    // eigenvalues of (A+Q)B via the symmetric similarity
    MatN bh(n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          bh.at(i, j) += std::sqrt(eb.values[k]) * eb.vectors.at(i, k) * eb.vectors.at(j, k);
    EigenSym prod = jacobi_eigensym(symmetrized(mul(bh, mul(A + Q, bh))));
    for (int i = 1; i < n; ++i) CHECK(prod.values[i] - prod.values[i - 1] > 0);
    ++done;
  }
}

TEST_CASE("eigenvector continuity under small symmetric perturbations") {
  MatN A = mat2(2, 0, 0, 1);
  // gap of the smallest eigenvalue is 1
  RandomStream rng(99);
  EigvecContinuityReport rep = eigvec_continuity_check(A, 1e-4, 100, rng);
  CHECK(rep.gap == doctest::Approx(1.0));
  CHECK(rep.max_angle <= 4e-4);
  CHECK(rep.max_ratio <= 4.0);

  // zero perturbation leaves the eigenvector fixed
  EigenSym e1 = jacobi_eigensym(A);
  EigenSym e2 = jacobi_eigensym(A);
  CHECK(std::fabs(dot(e1.vectors.col(0), e2.vectors.col(0))) == doctest::Approx(1.0));

  try {
    eigvec_continuity_check(A, 1.0, 10, rng);  // eta = gap
    FAIL("expected GapTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::gap_too_small);
  }
}
