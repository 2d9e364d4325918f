#include <doctest.h>

#include <cmath>

#include "morseflow/config.hpp"
#include "morseflow/geometry.hpp"
#include "oracles.hpp"

using namespace morseflow;

namespace {
const double pi = 3.14159265358979323846;
const double tau = 2 * pi;

Landscape torus_skew_with_metric() {
  Landscape L = landscape_from_builtin("torus2_skew");
  L.metric = MetricField::from_entries(
      2, {{"1 + 0.5*sin(x1)^2", "0.1*cos(x2)"}, {"0.1*cos(x2)", "1"}});
  return L;
}
}  // namespace

TEST_CASE("riemannian gradient with the identity metric is the differential") {
  Landscape L;
  L.manifold = Manifold::circle(tau);
  L.f = parse_expr("cos(x1)", 1);
  VecN g = riemannian_gradient(L, VecN{pi / 2});
  CHECK(g[0] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("diagonal metric rescales the differential") {
  Landscape L;
  L.manifold = Manifold::box(VecN{-1.0, -1.0}, VecN{1.0, 1.0});
  L.f = parse_expr("2*x1 + 3*x2", 2);
  L.metric = MetricField::from_entries(2, {{"4", "0"}, {"0", "1"}});
  VecN g = riemannian_gradient(L, VecN{0.0, 0.0});
  CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("full metric solve against the hand inverse") {
  Landscape L;
  L.manifold = Manifold::box(VecN{-1.0, -1.0}, VecN{1.0, 1.0});
  L.f = parse_expr("x1", 2);  // dF = (1, 0)
  L.metric = MetricField::from_entries(2, {{"2", "1"}, {"1", "2"}});
  VecN g = riemannian_gradient(L, VecN{0.0, 0.0});
  // inverse of [[2,1],[1,2]] applied to (1,0) is (2/3, -1/3)
  CHECK(g[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(-1.0 / 3).epsilon(1e-14));
}

TEST_CASE("defining identity g(grad F, X) = dF.X holds pointwise") {
  Landscape L = torus_skew_with_metric();
  RandomStream rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    VecN x{rng.uniform(0, tau), rng.uniform(0, tau)};
    VecN X = rng.gaussian_vec(2);
    GradEval ge = rgrad_eval(L, x);
    MatN G = L.metric.eval(x).g;
    double lhs = dot(mul(G, ge.rgrad), X);
    double rhs = dot(ge.df, X);
    CHECK(std::fabs(lhs - rhs) <= 1e-10 * (1 + std::fabs(rhs)));
  }
}

TEST_CASE("metric must be positive definite") {
  Landscape L;
  L.manifold = Manifold::box(VecN{-1.0, -1.0}, VecN{1.0, 1.0});
  L.f = parse_expr("x1", 2);
  L.metric = MetricField::from_entries(2, {{"1", "2"}, {"2", "1"}});
  try {
    riemannian_gradient(L, VecN{0.0, 0.0});
    FAIL("expected MetricNotSPD");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::metric_not_spd);
  }
}

TEST_CASE("torus distance uses the minimum image") {
  Manifold m = Manifold::torus(VecN{tau, tau});
  CHECK(m.distance(VecN{0.1, 0.0}, VecN{tau - 0.1, 0.0}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m.distance(VecN{1.0, 2.0}, VecN{1.0, 2.0}) == 0.0);
}

TEST_CASE("box distance is Euclidean") {
  Manifold m = Manifold::box(VecN{-10.0, -10.0}, VecN{10.0, 10.0});
  CHECK(m.distance(VecN{0.0, 0.0}, VecN{3.0, 4.0}) == doctest::Approx(5.0));
}

TEST_CASE("periodic distance is a metric on random triples") {
  Manifold m = Manifold::torus(VecN{tau, 1.0});
  RandomStream rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    VecN a{rng.uniform(0, tau), rng.uniform(0, 1)};
    VecN b{rng.uniform(0, tau), rng.uniform(0, 1)};
    VecN c{rng.uniform(0, tau), rng.uniform(0, 1)};
    CHECK(m.distance(a, b) == doctest::Approx(m.distance(b, a)).epsilon(1e-14));
    CHECK(m.distance(a, c) <= m.distance(a, b) + m.distance(b, c) + 1e-12);
    CHECK(m.distance(a, a) == 0.0);
  }
}

TEST_CASE("sample_ball is deterministic given the stream") {
  Landscape L = landscape_from_builtin("torus2_sep");
  RandomStream s1 = RandomStream(99).child(1);
  RandomStream s2 = RandomStream(99).child(1);
  for (int i = 0; i < 50; ++i) {
    VecN a = sample_ball(L, VecN{1.0, 1.0}, 0.3, s1);
    VecN b = sample_ball(L, VecN{1.0, 1.0}, 0.3, s2);
    CHECK(a == b);
  }
}

TEST_CASE("sample_ball mean converges to the center under constant density") {
  Landscape L = landscape_from_builtin("torus2_sep");
  VecN p{2.0, 3.0};
  const double delta = 0.4;
  const int N = 20000;
  RandomStream root(7);
  VecN acc(2);
  for (int i = 0; i < N; ++i) {
    RandomStream st = root.child(static_cast<uint64_t>(i));
    acc += L.manifold.displacement(p, sample_ball(L, p, delta, st));
  }
  acc *= 1.0 / N;
  // standard error of the mean is about delta/(2 sqrt N)
  CHECK(norm(acc) < 5 * delta / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("sample_ball respects a non-uniform density") {
  Landscape L = landscape_from_builtin("torus2_sep");
  L.density = parse_expr("1 + 0.9*sin(x1)", 2);
  VecN p{0.0, 0.0};
  const double delta = 0.5;
  const int N = 20000;
  RandomStream root(8);
  double mean_dx = 0;
  for (int i = 0; i < N; ++i) {
    RandomStream st = root.child(static_cast<uint64_t>(i));
    mean_dx += L.manifold.displacement(p, sample_ball(L, p, delta, st))[0];
  }
  mean_dx /= N;
  // with mu ~ 1 + 0.9 x1 near p the first moment shifts by about
  // 0.9 E[x1^2] = 0.9 delta^2/4
  CHECK(mean_dx == doctest::Approx(0.9 * delta * delta / 4).epsilon(0.15));
}

TEST_CASE("sample_ball angular chi-square uniformity over 8 sectors") {
  Landscape L = landscape_from_builtin("torus2_sep");
  VecN p{3.0, 3.0};
  const int N = 20000;
  RandomStream root(13);
  long counts[8] = {0};
  for (int i = 0; i < N; ++i) {
    RandomStream st = root.child(static_cast<uint64_t>(i));
    VecN d = L.manifold.displacement(p, sample_ball(L, p, 0.3, st));
    double angle = std::atan2(d[1], d[0]);
    int sector = static_cast<int>(std::floor((angle + pi) / (2 * pi) * 8));
    sector = std::clamp(sector, 0, 7);
    ++counts[sector];
  }
  double expected = N / 8.0;
  double chi2 = 0;
  for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // chi-square critical value, 7 dof, significance 0.001
  CHECK(chi2 < 24.3219);
}

TEST_CASE("sample_ball rejection overflow on a needle density") {
  Landscape L;
  L.manifold = Manifold::box(VecN{0.0}, VecN{1.0});
  L.f = parse_expr("x1", 1);
  L.density = parse_expr("1e-12 + exp(-(x1 - 0.5)^2*1e10)", 1);
  RandomStream st(3);
  try {
    sample_ball(L, VecN{0.5}, 0.45, st);
    FAIL("expected RejectionOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rejection_overflow);
  }
}

TEST_CASE("inward flow check passes for the convex bowl") {
  // descent of x'Qx with Q = diag(1,2) points inward on [-1,1]^2;
  // on the face x1 = 1 the margin is dF.e1 = 2
  Landscape L = landscape_from_builtin("box_bowl");
  InvarianceReport rep = check_invariance(L, 400);
  CHECK(rep.min_margin == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.samples >= 400);
}

TEST_CASE("inward flow check passes for the 1-D interval landscape") {
  Landscape L = landscape_from_builtin("interval_2");
  InvarianceReport rep = check_invariance(L, 10);
  CHECK(rep.min_margin > 0);
}

TEST_CASE("linear field exits through a face") {
  Landscape L;
  L.manifold = Manifold::box(VecN{-1.0, -1.0}, VecN{1.0, 1.0});
  L.f = parse_expr("x1", 2);
  try {
    check_invariance(L, 100);
    FAIL("expected NotInwardFlowing");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_inward_flowing);
  }
}

TEST_CASE("concave quadratic is not inward flowing for descent") {
  Landscape L = landscape_from_builtin("box_quad");
  CHECK_THROWS_AS(check_invariance(L, 100), Error);
}

TEST_CASE("invariance check requires a box") {
  Landscape L = landscape_from_builtin("torus2_sep");
  try {
    check_invariance(L, 100);
    FAIL("expected precondition violation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::precondition);
  }
}

TEST_CASE("landscape config round trip") {
  nlohmann::json j = {
      {"manifold", {{"kind", "torus"}, {"periods", {tau, tau}}}},
      {"dimension", 2},
      {"F", "cos(x1) + 0.5*cos(x2)"},
      {"metric", "identity"},
      {"density", "riemannian"},
      {"tolerances", {{"grad_tol", 1e-10}}},
  };
  Landscape L = landscape_from_json(j);
  CHECK(L.dim() == 2);
  CHECK(L.tol.grad_tol == 1e-10);
  CHECK(L.tol.dedup_radius == 1e-5);  // default survives partial override
  CHECK(L.density_at(VecN{0.0, 0.0}) == 1.0);

  nlohmann::json jb = {{"F", "builtin:circle_3"}};
  Landscape Lb = landscape_from_json(jb);
  CHECK(Lb.dim() == 1);
  CHECK(Lb.manifold.kind == Manifold::Kind::circle);

  nlohmann::json bad = {{"F", "cos(x1)"}};
  CHECK_THROWS_AS(landscape_from_json(bad), Error);
}
