#pragma once

// Small dense vectors and matrices for dimensions up to kMaxDim.
// Everything is stack-allocated; the eigensolver is cyclic Jacobi,
// which at these sizes is accurate to machine precision.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>

#include "morseflow/errors.hpp"

namespace morseflow {

inline constexpr int kMaxDim = 8;

struct VecN {
  int n = 0;
  std::array<double, kMaxDim> a{};

  VecN() = default;
  explicit VecN(int dim) : n(dim) { a.fill(0.0); }
  VecN(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
    int i = 0;
    for (double x : xs) a[static_cast<size_t>(i++)] = x;
  }

  double& operator[](int i) { return a[static_cast<size_t>(i)]; }
  double operator[](int i) const { return a[static_cast<size_t>(i)]; }

  static VecN zero(int dim) { return VecN(dim); }
  static VecN unit(int dim, int axis) {
    VecN v(dim);
    v[axis] = 1.0;
    return v;
  }

  VecN& operator+=(const VecN& o) {
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)] += o[i];
    return *this;
  }
  VecN& operator-=(const VecN& o) {
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)] -= o[i];
    return *this;
  }
  VecN& operator*=(double s) {
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)] *= s;
    return *this;
  }

  friend VecN operator+(VecN x, const VecN& y) { return x += y; }
  friend VecN operator-(VecN x, const VecN& y) { return x -= y; }
  friend VecN operator*(double s, VecN x) { return x *= s; }
  friend VecN operator*(VecN x, double s) { return x *= s; }
  friend VecN operator-(VecN x) { return x *= -1.0; }

  friend bool operator==(const VecN& x, const VecN& y) {
    if (x.n != y.n) return false;
    for (int i = 0; i < x.n; ++i)
      if (x[i] != y[i]) return false;
    return true;
  }
};

inline double dot(const VecN& x, const VecN& y) {
  double s = 0.0;
  for (int i = 0; i < x.n; ++i) s += x[i] * y[i];
  return s;
}

inline double norm(const VecN& x) { return std::sqrt(dot(x, x)); }

inline double norm_inf(const VecN& x) {
  double m = 0.0;
  for (int i = 0; i < x.n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

inline VecN normalized(const VecN& x) {
  double nx = norm(x);
  if (nx == 0.0) fail(Errc::internal, "cannot normalize zero vector");
  VecN y = x;
  y *= 1.0 / nx;
  return y;
}

inline std::string to_string(const VecN& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.n; ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ")";
  return os.str();
}

struct MatN {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim> m{};

  MatN() = default;
  explicit MatN(int dim) : n(dim) { m.fill(0.0); }

  double& at(int i, int j) { return m[static_cast<size_t>(i * kMaxDim + j)]; }
  double at(int i, int j) const { return m[static_cast<size_t>(i * kMaxDim + j)]; }

  static MatN identity(int dim) {
    MatN r(dim);
    for (int i = 0; i < dim; ++i) r.at(i, i) = 1.0;
    return r;
  }

  VecN col(int j) const {
    VecN v(n);
    for (int i = 0; i < n; ++i) v[i] = at(i, j);
    return v;
  }

  MatN transposed() const {
    MatN r(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r.at(i, j) = at(j, i);
    return r;
  }

  friend MatN operator+(const MatN& x, const MatN& y) {
    MatN r(x.n);
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.n; ++j) r.at(i, j) = x.at(i, j) + y.at(i, j);
    return r;
  }
  friend MatN operator-(const MatN& x, const MatN& y) {
    MatN r(x.n);
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.n; ++j) r.at(i, j) = x.at(i, j) - y.at(i, j);
    return r;
  }
  friend MatN operator*(double s, const MatN& x) {
    MatN r(x.n);
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.n; ++j) r.at(i, j) = s * x.at(i, j);
    return r;
  }
};

inline VecN mul(const MatN& A, const VecN& x) {
  VecN y(A.n);
  for (int i = 0; i < A.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.n; ++j) s += A.at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline MatN mul(const MatN& A, const MatN& B) {
  MatN C(A.n);
  for (int i = 0; i < A.n; ++i)
    for (int k = 0; k < A.n; ++k) {
      double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < A.n; ++j) C.at(i, j) += aik * B.at(k, j);
    }
  return C;
}

inline MatN outer(const VecN& x, const VecN& y) {
  MatN r(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) r.at(i, j) = x[i] * y[j];
  return r;
}

// Forces exact symmetry; used after products that are symmetric in exact
// arithmetic but not in floating point.
inline MatN symmetrized(const MatN& A) {
  MatN r(A.n);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) r.at(i, j) = 0.5 * (A.at(i, j) + A.at(j, i));
  return r;
}

// Cholesky factor L (lower triangular, A = L L^T). Returns false if A is
// not positive definite.
inline bool cholesky(const MatN& A, MatN& L) {
  const int n = A.n;
  L = MatN(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A.at(i, j);
      for (int k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s)) return false;
        L.at(i, i) = std::sqrt(s);
      } else {
        L.at(i, j) = s / L.at(j, j);
      }
    }
  }
  return true;
}

inline VecN cholesky_solve(const MatN& L, const VecN& b) {
  const int n = L.n;
  VecN y(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= L.at(i, k) * y[k];
    y[i] = s / L.at(i, i);
  }
  VecN x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= L.at(k, i) * x[k];
    x[i] = s / L.at(i, i);
  }
  return x;
}

// Gaussian elimination with partial pivoting. Returns false if singular
// to working precision.
inline bool solve_general(MatN A, VecN b, VecN& x) {
  const int n = A.n;
  std::array<int, kMaxDim> piv{};
  for (int i = 0; i < n; ++i) piv[static_cast<size_t>(i)] = i;
  for (int c = 0; c < n; ++c) {
    int best = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(A.at(r, c)) > std::fabs(A.at(best, c))) best = r;
    if (best != c) {
      for (int j = 0; j < n; ++j) std::swap(A.at(c, j), A.at(best, j));
      std::swap(b[c], b[best]);
    }
    double p = A.at(c, c);
    if (std::fabs(p) < 1e-300) return false;
    for (int r = c + 1; r < n; ++r) {
      double f = A.at(r, c) / p;
      if (f == 0.0) continue;
      for (int j = c; j < n; ++j) A.at(r, j) -= f * A.at(c, j);
      b[r] -= f * b[c];
    }
  }
  x = VecN(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A.at(i, j) * x[j];
    x[i] = s / A.at(i, i);
  }
  return true;
}

struct EigenSym {
  VecN values;   // ascending
  MatN vectors;  // columns, matching values
};

// Cyclic Jacobi for symmetric matrices. Sweeps until the off-diagonal
// mass is at machine-epsilon level relative to the Frobenius norm.
inline EigenSym jacobi_eigensym(MatN A) {
  const int n = A.n;
  MatN V = MatN::identity(n);
  if (n == 1) {
    EigenSym e;
    e.values = VecN(1);
    e.values[0] = A.at(0, 0);
    e.vectors = V;
    return e;
  }
  double frob2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) frob2 += A.at(i, j) * A.at(i, j);
  const double stop = 1e-30 * (frob2 + 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += A.at(p, q) * A.at(p, q);
    if (off <= stop) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = A.at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        double theta = (A.at(q, q) - A.at(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);
        double app = A.at(p, p), aqq = A.at(q, q);
        A.at(p, p) = app - t * apq;
        A.at(q, q) = aqq + t * apq;
        A.at(p, q) = 0.0;
        A.at(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            double arp = A.at(r, p), arq = A.at(r, q);
            A.at(r, p) = arp - s * (arq + tau * arp);
            A.at(p, r) = A.at(r, p);
            A.at(r, q) = arq + s * (arp - tau * arq);
            A.at(q, r) = A.at(r, q);
          }
          double vrp = V.at(r, p), vrq = V.at(r, q);
          V.at(r, p) = vrp - s * (vrq + tau * vrp);
          V.at(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  // sort ascending, carrying columns
  std::array<int, kMaxDim> order{};
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (A.at(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]) <
          A.at(order[static_cast<size_t>(i)], order[static_cast<size_t>(i)]))
        std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);

  EigenSym e;
  e.values = VecN(n);
  e.vectors = MatN(n);
  for (int k = 0; k < n; ++k) {
    int src = order[static_cast<size_t>(k)];
    e.values[k] = A.at(src, src);
    for (int i = 0; i < n; ++i) e.vectors.at(i, k) = V.at(i, src);
  }
  return e;
}

// Spectral 2-norm of a symmetric matrix.
inline double norm2_sym(const MatN& A) {
  EigenSym e = jacobi_eigensym(A);
  double m = 0.0;
  for (int i = 0; i < A.n; ++i) m = std::max(m, std::fabs(e.values[i]));
  return m;
}

// f(A) for symmetric A via the spectral decomposition.
template <class F>
inline MatN sym_apply(const MatN& A, F&& f) {
  EigenSym e = jacobi_eigensym(A);
  MatN r(A.n);
  for (int k = 0; k < A.n; ++k) {
    double fk = f(e.values[k]);
    for (int i = 0; i < A.n; ++i)
      for (int j = 0; j < A.n; ++j)
        r.at(i, j) += fk * e.vectors.at(i, k) * e.vectors.at(j, k);
  }
  return r;
}

inline MatN sym_sqrt(const MatN& A) {
  return sym_apply(A, [](double x) {
    if (x <= 0.0) fail(Errc::metric_not_spd, "matrix square root of non-SPD matrix");
    return std::sqrt(x);
  });
}

inline MatN sym_inv_sqrt(const MatN& A) {
  return sym_apply(A, [](double x) {
    if (x <= 0.0) fail(Errc::metric_not_spd, "inverse square root of non-SPD matrix");
    return 1.0 / std::sqrt(x);
  });
}

}  // namespace morseflow
