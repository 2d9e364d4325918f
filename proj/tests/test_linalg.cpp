#include <doctest.h>

#include "morseflow/linalg.hpp"
#include "morseflow/rng.hpp"

using namespace morseflow;

namespace {

MatN random_spd(int n, RandomStream& rng, double min_eig = 0.2, double max_eig = 3.0) {
  // random orthogonal basis from QR-free Gram-Schmidt of gaussians
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
    double lam = rng.uniform(min_eig, max_eig);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A.at(i, j) += lam * V.at(i, k) * V.at(j, k);
  }
  return symmetrized(A);
}

}  // namespace

TEST_CASE("jacobi eigensolver on a known 2x2") {
  MatN A(2);
  A.at(0, 0) = 2;
  A.at(0, 1) = 1;
  A.at(1, 0) = 1;
  A.at(1, 1) = 2;
  EigenSym e = jacobi_eigensym(A);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-14));
  // eigenvector of 1 is (1,-1)/sqrt(2) up to sign
  CHECK(std::fabs(e.vectors.at(0, 0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(e.vectors.at(0, 0) * e.vectors.at(1, 0) < 0);
}

TEST_CASE("jacobi reconstructs random symmetric matrices") {
  RandomStream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_index(5));
    MatN A(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double g = rng.gaussian();
        A.at(i, j) = g;
        A.at(j, i) = g;
      }
    EigenSym e = jacobi_eigensym(A);
    // A V = V diag(lambda), and eigenvalues ascending
    for (int k = 0; k < n; ++k) {
      VecN residual = mul(A, e.vectors.col(k)) - e.values[k] * e.vectors.col(k);
      CHECK(norm(residual) < 1e-12);
      if (k) CHECK(e.values[k] >= e.values[k - 1]);
    }
  }
}

TEST_CASE("cholesky solve matches a hand inverse") {
  MatN G(2);
  G.at(0, 0) = 2;
  G.at(0, 1) = 1;
  G.at(1, 0) = 1;
  G.at(1, 1) = 2;
  MatN L;
  REQUIRE(cholesky(G, L));
  VecN b{1.0, 0.0};
  VecN x = cholesky_solve(L, b);
  // inverse of [[2,1],[1,2]] is [[2,-1],[-1,2]]/3
  CHECK(x[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(-1.0 / 3).epsilon(1e-14));
}

TEST_CASE("cholesky rejects indefinite matrices") {
  MatN A(2);
  A.at(0, 0) = 1;
  A.at(0, 1) = 2;
  A.at(1, 0) = 2;
  A.at(1, 1) = 1;
  MatN L;
  CHECK_FALSE(cholesky(A, L));
}

TEST_CASE("sym_inv_sqrt inverts the square") {
  RandomStream rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_index(4));
    MatN G = random_spd(n, rng);
    MatN gih = sym_inv_sqrt(G);
    MatN should_be_identity = mul(gih, mul(G, gih));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(should_be_identity.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
  }
}

TEST_CASE("solve_general handles a permuted system") {
  MatN A(3);
  A.at(0, 1) = 1;
  A.at(1, 0) = 2;
  A.at(2, 2) = 4;
  VecN b{3.0, 2.0, 8.0};
  VecN x;
  REQUIRE(solve_general(A, b, x));
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(3.0));
  CHECK(x[2] == doctest::Approx(2.0));
}

TEST_CASE("counter-based streams are reproducible and lane-independent") {
  RandomStream a(42);
  RandomStream b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RandomStream root(123);
  RandomStream c1 = root.child(5);
  RandomStream c2 = root.child(6);
  CHECK(c1.next_u64() != c2.next_u64());

  // derivation does not depend on the parent's draw history
  RandomStream root2(123);
  root2.next_u64();
  RandomStream c1_again = root2.child(5);
  RandomStream c1_ref = RandomStream(123).child(5);
  CHECK(c1_again.next_u64() == c1_ref.next_u64());
}

TEST_CASE("uniform01 is in range and roughly centered") {
  RandomStream rng(9);
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    acc += u;
  }
  CHECK(acc / n == doctest::Approx(0.5).epsilon(0.02));
}
