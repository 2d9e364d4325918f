#pragma once

// Forward-mode derivative carriers. Jet1 propagates value + gradient,
// Jet2 additionally the second-order coefficients. The Hessian is stored
// as a packed upper triangle, so symmetry is exact by construction.

#include <cmath>

#include "morseflow/errors.hpp"
#include "morseflow/expr.hpp"
#include "morseflow/linalg.hpp"

namespace morseflow {

struct SymTri {
  int n = 0;
  std::array<double, kMaxDim*(kMaxDim + 1) / 2> t{};

  SymTri() = default;
  explicit SymTri(int dim) : n(dim) { t.fill(0.0); }

  // i <= j required
  double& up(int i, int j) { return t[static_cast<size_t>(i * n - i * (i - 1) / 2 + (j - i))]; }
  double up(int i, int j) const { return t[static_cast<size_t>(i * n - i * (i - 1) / 2 + (j - i))]; }

  double at(int i, int j) const { return i <= j ? up(i, j) : up(j, i); }

  MatN to_mat() const {
    MatN m(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        m.at(i, j) = up(i, j);
        m.at(j, i) = up(i, j);
      }
    return m;
  }

  int packed_size() const { return n * (n + 1) / 2; }
};

struct Jet1 {
  double v = 0.0;
  VecN g;

  static Jet1 constant(double c, int n) {
    Jet1 j;
    j.v = c;
    j.g = VecN(n);
    return j;
  }
  static Jet1 variable(double x, int i, int n) {
    Jet1 j = constant(x, n);
    j.g[i] = 1.0;
    return j;
  }
};

struct Jet2 {
  double v = 0.0;
  VecN g;
  SymTri h;

  static Jet2 constant(double c, int n) {
    Jet2 j;
    j.v = c;
    j.g = VecN(n);
    j.h = SymTri(n);
    return j;
  }
  static Jet2 variable(double x, int i, int n) {
    Jet2 j = constant(x, n);
    j.g[i] = 1.0;
    return j;
  }
};

namespace detail {

[[noreturn]] inline void eval_fail(const char* what) {
  fail(Errc::eval, std::string(what));
}

inline void chain_coeffs(Op op, double u, double& f, double& f1, double& f2) {
  switch (op) {
    case Op::sin: f = std::sin(u); f1 = std::cos(u); f2 = -f; return;
    case Op::cos: f = std::cos(u); f1 = -std::sin(u); f2 = -f; return;
    case Op::exp: f = std::exp(u); f1 = f; f2 = f; return;
    case Op::log:
      if (u <= 0.0) eval_fail("log of non-positive value");
      f = std::log(u); f1 = 1.0 / u; f2 = -1.0 / (u * u);
      return;
    case Op::tanh: {
      f = std::tanh(u);
      f1 = 1.0 - f * f;
      f2 = -2.0 * f * f1;
      return;
    }
    case Op::neg: f = -u; f1 = -1.0; f2 = 0.0; return;
    default: eval_fail("not a unary operation");
  }
}

inline void pow_coeffs(double u, double c, double& f, double& f1, double& f2) {
  f = std::pow(u, c);
  f1 = (c == 0.0) ? 0.0 : c * std::pow(u, c - 1.0);
  f2 = (c == 0.0 || c == 1.0) ? 0.0 : c * (c - 1.0) * std::pow(u, c - 2.0);
  if (!std::isfinite(f) || !std::isfinite(f1) || !std::isfinite(f2))
    eval_fail("pow with non-differentiable base/exponent combination");
}

inline void recip_coeffs(double u, double& f, double& f1, double& f2) {
  if (u == 0.0 || !std::isfinite(1.0 / u)) eval_fail("division by zero");
  f = 1.0 / u;
  f1 = -f * f;
  f2 = -2.0 * f1 * f;
}

// ---- Jet1 arithmetic ----

inline Jet1 japply(const Jet1& u, double f, double f1) {
  Jet1 r;
  r.v = f;
  r.g = VecN(u.g.n);
  for (int i = 0; i < u.g.n; ++i) r.g[i] = f1 * u.g[i];
  return r;
}

inline Jet1 jadd(const Jet1& a, const Jet1& b) {
  Jet1 r = a;
  r.v += b.v;
  r.g += b.g;
  return r;
}
inline Jet1 jsub(const Jet1& a, const Jet1& b) {
  Jet1 r = a;
  r.v -= b.v;
  r.g -= b.g;
  return r;
}
inline Jet1 jmul(const Jet1& a, const Jet1& b) {
  Jet1 r;
  r.v = a.v * b.v;
  r.g = VecN(a.g.n);
  for (int i = 0; i < a.g.n; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  return r;
}

// ---- Jet2 arithmetic ----

inline Jet2 japply(const Jet2& u, double f, double f1, double f2) {
  Jet2 r;
  const int n = u.g.n;
  r.v = f;
  r.g = VecN(n);
  r.h = SymTri(n);
  for (int i = 0; i < n; ++i) r.g[i] = f1 * u.g[i];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) r.h.up(i, j) = f1 * u.h.up(i, j) + f2 * u.g[i] * u.g[j];
  return r;
}

inline Jet2 jadd(const Jet2& a, const Jet2& b) {
  Jet2 r = a;
  r.v += b.v;
  r.g += b.g;
  for (int k = 0; k < r.h.packed_size(); ++k) r.h.t[static_cast<size_t>(k)] += b.h.t[static_cast<size_t>(k)];
  return r;
}
inline Jet2 jsub(const Jet2& a, const Jet2& b) {
  Jet2 r = a;
  r.v -= b.v;
  r.g -= b.g;
  for (int k = 0; k < r.h.packed_size(); ++k) r.h.t[static_cast<size_t>(k)] -= b.h.t[static_cast<size_t>(k)];
  return r;
}
inline Jet2 jmul(const Jet2& a, const Jet2& b) {
  Jet2 r;
  const int n = a.g.n;
  r.v = a.v * b.v;
  r.g = VecN(n);
  r.h = SymTri(n);
  for (int i = 0; i < n; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      r.h.up(i, j) = a.v * b.h.up(i, j) + b.v * a.h.up(i, j) + a.g[i] * b.g[j] + a.g[j] * b.g[i];
  return r;
}

template <class J>
inline J eval_program(const Expr& e, const VecN& x) {
  if (x.n != e.dim) fail(Errc::precondition, "point dimension does not match expression");
  std::array<J, 64> stack;
  if (e.max_stack > 64) fail(Errc::internal, "expression too deep");
  int top = -1;
  double f, f1, f2;
  for (const ExprNode& nd : e.prog) {
    switch (nd.op) {
      case Op::constant:
        stack[static_cast<size_t>(++top)] = J::constant(nd.value, e.dim);
        break;
      case Op::variable:
        stack[static_cast<size_t>(++top)] = J::variable(x[nd.var], nd.var, e.dim);
        break;
      case Op::add: {
        const J& b = stack[static_cast<size_t>(top--)];
        stack[static_cast<size_t>(top)] = jadd(stack[static_cast<size_t>(top)], b);
        break;
      }
      case Op::sub: {
        const J& b = stack[static_cast<size_t>(top--)];
        stack[static_cast<size_t>(top)] = jsub(stack[static_cast<size_t>(top)], b);
        break;
      }
      case Op::mul: {
        const J& b = stack[static_cast<size_t>(top--)];
        stack[static_cast<size_t>(top)] = jmul(stack[static_cast<size_t>(top)], b);
        break;
      }
      case Op::div: {
        const J& b = stack[static_cast<size_t>(top--)];
        recip_coeffs(b.v, f, f1, f2);
        J rb;
        if constexpr (std::is_same_v<J, Jet1>)
          rb = japply(b, f, f1);
        else
          rb = japply(b, f, f1, f2);
        stack[static_cast<size_t>(top)] = jmul(stack[static_cast<size_t>(top)], rb);
        break;
      }
      case Op::pow: {
        J& u = stack[static_cast<size_t>(top)];
        pow_coeffs(u.v, nd.value, f, f1, f2);
        if constexpr (std::is_same_v<J, Jet1>)
          u = japply(u, f, f1);
        else
          u = japply(u, f, f1, f2);
        break;
      }
      default: {
        J& u = stack[static_cast<size_t>(top)];
        chain_coeffs(nd.op, u.v, f, f1, f2);
        if constexpr (std::is_same_v<J, Jet1>)
          u = japply(u, f, f1);
        else
          u = japply(u, f, f1, f2);
        break;
      }
    }
  }
  return stack[0];
}

}  // namespace detail

inline double eval_value(const Expr& e, const VecN& x) {
  if (x.n != e.dim) fail(Errc::precondition, "point dimension does not match expression");
  std::array<double, 64> stack;
  int top = -1;
  for (const ExprNode& nd : e.prog) {
    switch (nd.op) {
      case Op::constant: stack[static_cast<size_t>(++top)] = nd.value; break;
      case Op::variable: stack[static_cast<size_t>(++top)] = x[nd.var]; break;
      case Op::add: { double b = stack[static_cast<size_t>(top--)]; stack[static_cast<size_t>(top)] += b; break; }
      case Op::sub: { double b = stack[static_cast<size_t>(top--)]; stack[static_cast<size_t>(top)] -= b; break; }
      case Op::mul: { double b = stack[static_cast<size_t>(top--)]; stack[static_cast<size_t>(top)] *= b; break; }
      case Op::div: {
        double b = stack[static_cast<size_t>(top--)];
        if (b == 0.0) detail::eval_fail("division by zero");
        stack[static_cast<size_t>(top)] /= b;
        break;
      }
      case Op::neg: stack[static_cast<size_t>(top)] = -stack[static_cast<size_t>(top)]; break;
      case Op::pow: {
        double r = std::pow(stack[static_cast<size_t>(top)], nd.value);
        if (!std::isfinite(r)) detail::eval_fail("pow out of domain");
        stack[static_cast<size_t>(top)] = r;
        break;
      }
      case Op::sin: stack[static_cast<size_t>(top)] = std::sin(stack[static_cast<size_t>(top)]); break;
      case Op::cos: stack[static_cast<size_t>(top)] = std::cos(stack[static_cast<size_t>(top)]); break;
      case Op::exp: stack[static_cast<size_t>(top)] = std::exp(stack[static_cast<size_t>(top)]); break;
      case Op::log: {
        double u = stack[static_cast<size_t>(top)];
        if (u <= 0.0) detail::eval_fail("log of non-positive value");
        stack[static_cast<size_t>(top)] = std::log(u);
        break;
      }
      case Op::tanh: stack[static_cast<size_t>(top)] = std::tanh(stack[static_cast<size_t>(top)]); break;
    }
  }
  double v = stack[0];
  if (!std::isfinite(v)) detail::eval_fail("non-finite value");
  return v;
}

inline Jet1 eval_jet1(const Expr& e, const VecN& x) {
  Jet1 j = detail::eval_program<Jet1>(e, x);
  if (!std::isfinite(j.v)) detail::eval_fail("non-finite value");
  for (int i = 0; i < j.g.n; ++i)
    if (!std::isfinite(j.g[i])) detail::eval_fail("non-finite gradient");
  return j;
}

inline Jet2 eval_jet2(const Expr& e, const VecN& x) {
  Jet2 j = detail::eval_program<Jet2>(e, x);
  if (!std::isfinite(j.v)) detail::eval_fail("non-finite value");
  for (int i = 0; i < j.g.n; ++i)
    if (!std::isfinite(j.g[i])) detail::eval_fail("non-finite gradient");
  for (int k = 0; k < j.h.packed_size(); ++k)
    if (!std::isfinite(j.h.t[static_cast<size_t>(k)])) detail::eval_fail("non-finite hessian");
  return j;
}

}  // namespace morseflow
