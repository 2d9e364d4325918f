#pragma once

// Exact oracle for the diagonal linear system z' = Lambda z with
// lambda_1 < lambda_2 <= ... <= lambda_n < 0: closed-form flow, limit
// tangent directions, the invariant region V_{r,r0} swept out by the top
// spherical cap, its boundary functions F_l and F_u, and the Monte Carlo
// volume-scaling estimate.

#include <functional>
#include <optional>
#include <vector>

#include "morseflow/linalg.hpp"
#include "morseflow/rng.hpp"
#include "morseflow/stats.hpp"

namespace morseflow {
namespace linear_model {

struct DiagonalSystem {
  VecN lambda;  // strictly gapped leading eigenvalue, all negative
  double r = 1.0;
  double r0 = 0.5;
  double rho = 0.0;  // sqrt(r^2 - r0^2), radius of the cap boundary sphere

  DiagonalSystem(const VecN& lam, double r_, double r0_) : lambda(lam), r(r_), r0(r0_) {
    const int n = lam.n;
    if (n < 2) fail(Errc::config, "diagonal system needs dimension >= 2");
    if (!(lam[0] < lam[1])) fail(Errc::config, "requires a strict gap lambda1 < lambda2");
    for (int i = 0; i < n; ++i)
      if (!(lam[i] < 0.0)) fail(Errc::config, "all eigenvalues must be negative");
    for (int i = 2; i < n; ++i)
      if (!(lam[i - 1] <= lam[i])) fail(Errc::config, "eigenvalues must be ascending");
    if (!(r0 > 0.0 && r0 < r)) fail(Errc::config, "requires 0 < r0 < r");
    rho = std::sqrt(r * r - r0 * r0);
  }

  int dim() const { return lambda.n; }
  double ratio() const { return lambda[0] / lambda[1]; }  // > 1
};

inline VecN flow(const DiagonalSystem& sys, const VecN& z0, double t) {
  VecN z(z0.n);
  for (int i = 0; i < z0.n; ++i) z[i] = std::exp(sys.lambda[i] * t) * z0[i];
  return z;
}

// Direction along which the trajectory through z0 approaches the origin:
// the slowest mode with a nonzero coefficient dominates. Returns the unit
// vector on the side of approach (sign of the surviving coefficient);
// nullopt for z0 = 0. Equals +/- e1 exactly when only the first
// coefficient survives.
inline std::optional<VecN> limit_tangent(const DiagonalSystem& sys, const VecN& z0) {
  const int n = z0.n;
  double lam_star = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (z0[i] != 0.0) {
      any = true;
      lam_star = std::max(lam_star, sys.lambda[i]);
    }
  }
  if (!any) return std::nullopt;
  VecN dir(n);
  for (int i = 0; i < n; ++i)
    if (z0[i] != 0.0 && sys.lambda[i] == lam_star) dir[i] = z0[i];
  return normalized(dir);
}

namespace detail_lm {
inline double radial_upper(const DiagonalSystem& sys, double s) {
  return std::pow(s / sys.rho, sys.ratio()) * sys.r0;
}
}  // namespace detail_lm

// F_u(w) = (||w||/rho)^(lambda1/lambda2) r0, the rotationally symmetric
// dominating graph.
inline double f_upper(const DiagonalSystem& sys, const VecN& w) {
  if (w.n != sys.dim() - 1) fail(Errc::precondition, "w must have dimension n-1");
  double s = norm(w);
  if (s > sys.rho * (1.0 + 1e-12)) fail(Errc::out_of_domain, "||w|| exceeds rho");
  return detail_lm::radial_upper(sys, std::min(s, sys.rho));
}

// F_l(w) = exp(lambda1 t(w)) r0 where t(w) >= 0 solves
// sum_i w_i^2 exp(-2 lambda_{i+1} t) = rho^2 (strictly increasing in t, so
// bisection on an exact bracket converges unconditionally).
inline double f_lower(const DiagonalSystem& sys, const VecN& w) {
  const int n = sys.dim();
  if (w.n != n - 1) fail(Errc::precondition, "w must have dimension n-1");
  double s = norm(w);
  if (s > sys.rho * (1.0 + 1e-12)) fail(Errc::not_reached, "||w|| exceeds rho");
  if (s == 0.0) return 0.0;  // differentiable extension at the origin
  s = std::min(s, sys.rho);

  auto h = [&](double t) {
    double acc = 0.0;
    for (int i = 0; i < n - 1; ++i)
      acc += w[i] * w[i] * std::exp(-2.0 * sys.lambda[i + 1] * t);
    return acc - sys.rho * sys.rho;
  };

  // exact bracket from the extreme decay rates; for n = 2 it collapses to
  // the closed form
  double lo = std::log(sys.rho / s) / (-sys.lambda[1]);
  double hi = std::log(sys.rho / s) / (-sys.lambda[n - 1]);
  if (hi < lo) std::swap(lo, hi);
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-13 * (1.0 + hi); ++iter) {
    double mid = 0.5 * (lo + hi);
    if (h(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double t = 0.5 * (lo + hi);
  return std::exp(sys.lambda[0] * t) * sys.r0;
}

// Membership in V_{r,r0}: the epigraph of F_l over the disc of radius rho,
// intersected with the ball of radius r.
inline bool in_invariant_region(const DiagonalSystem& sys, const VecN& z) {
  const int n = sys.dim();
  if (z.n != n) fail(Errc::precondition, "z must have dimension n");
  VecN w(n - 1);
  for (int i = 1; i < n; ++i) w[i - 1] = z[i];
  if (norm(w) > sys.rho * (1.0 + 1e-12)) return false;
  if (norm(z) > sys.r * (1.0 + 1e-12)) return false;
  double fl = f_lower(sys, w);
  return z[0] >= fl - 1e-12 * (1.0 + std::fabs(fl));
}

struct ScalingEstimate {
  std::vector<double> deltas;
  std::vector<double> ratios;  // vol(D+_delta ∩ Hyp F_u) / vol(D+_delta)
  std::vector<long> hits;
  double slope = 0.0;  // of log ratio vs log delta; expect lambda1/lambda2 - 1
};

// Monte Carlo volume ratio per delta, stratified in ||w|| so the thin
// hypograph keeps enough hits at small delta; then a log-log slope fit.
inline ScalingEstimate scaling_exponent_estimate(const DiagonalSystem& sys,
                                                 const std::vector<double>& deltas,
                                                 long samples_per_delta, uint64_t seed,
                                                 int strata = 32) {
  if (deltas.size() < 4) fail(Errc::precondition, "need at least 4 deltas");
  for (size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) fail(Errc::precondition, "delta list must be decreasing");
  if (samples_per_delta < 100000) fail(Errc::precondition, "need at least 1e5 samples per delta");
  for (double d : deltas)
    if (!(d > 0.0 && d <= sys.rho)) fail(Errc::precondition, "deltas must lie in (0, rho]");

  const int n = sys.dim();
  const int wdim = n - 1;  // radial exponent of the w-ball is wdim - 1
  RandomStream root(seed);
  ScalingEstimate est;
  est.deltas = deltas;

  for (size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    long per_stratum = samples_per_delta / strata;
    double num = 0.0, den = 0.0;
    long hit_count = 0;
    for (int k = 0; k < strata; ++k) {
      double a = delta * k / strata;
      double b = delta * (k + 1) / strata;
      // stratum weight: shell volume factor of the (n-1)-dim w-ball
      double wk = std::pow(b, wdim) - std::pow(a, wdim);
      RandomStream st = root.child(di, static_cast<uint64_t>(k));
      double sum_h = 0.0, sum_hit = 0.0;
      for (long i = 0; i < per_stratum; ++i) {
        double u = st.uniform01();
        double s = std::pow(std::pow(a, wdim) + u * (std::pow(b, wdim) - std::pow(a, wdim)),
                            1.0 / wdim);
        double height = std::sqrt(std::max(0.0, delta * delta - s * s));
        double z1 = st.uniform01() * height;
        bool hit = s <= sys.rho && z1 <= detail_lm::radial_upper(sys, s);
        sum_h += height;
        if (hit) {
          sum_hit += height;
          ++hit_count;
        }
      }
      num += wk * sum_hit / static_cast<double>(per_stratum);
      den += wk * sum_h / static_cast<double>(per_stratum);
    }
    if (hit_count < 100)
      fail(Errc::insufficient_samples,
           "only " + std::to_string(hit_count) + " hits at delta " + std::to_string(delta));
    est.ratios.push_back(num / den);
    est.hits.push_back(hit_count);
  }
  est.slope = log_log_slope(est.deltas, est.ratios);
  return est;
}

using Membership = std::function<bool(const VecN&)>;

// The geometry used by the half-ball union check: the upper half-space
// minus the hypograph of F_u, and its mirror image.
inline std::pair<Membership, Membership> standard_union_regions(const DiagonalSystem& sys) {
  auto upper = [sys](const VecN& z) {
    if (z[0] < 0.0) return false;
    VecN w(z.n - 1);
    for (int i = 1; i < z.n; ++i) w[i - 1] = z[i];
    double s = norm(w);
    if (s <= sys.rho && z[0] <= detail_lm::radial_upper(sys, s)) return false;
    return true;
  };
  auto lower = [upper](const VecN& z) {
    VecN m = z;
    m[0] = -m[0];
    return upper(m);
  };
  return {upper, lower};
}

struct MeasureUnionReport {
  std::vector<double> deltas;
  std::vector<double> half1, half2, full;  // per-delta Monte Carlo ratios
  bool pass = false;
};

// Checks, on sampled balls, that the full-ball ratio of V1 u V2 is
// consistent with the two half-ball ratios (tolerance 0.01) and does not
// degrade from the largest delta to the smallest.
inline MeasureUnionReport measure_union_check(int n, const Membership& v1, const Membership& v2,
                                              const std::vector<double>& deltas, long samples,
                                              uint64_t seed) {
  if (deltas.size() < 2) fail(Errc::precondition, "need at least 2 deltas");
  MeasureUnionReport rep;
  rep.deltas = deltas;
  RandomStream root(seed);
  for (size_t di = 0; di < deltas.size(); ++di) {
    double delta = deltas[di];
    long upper_n = 0, lower_n = 0, upper_in = 0, lower_in = 0, full_in = 0;
    long kept = 0;
    RandomStream st = root.child(di);
    while (kept < samples) {
      VecN z(n);
      for (int i = 0; i < n; ++i) z[i] = st.uniform(-delta, delta);
      if (norm(z) > delta) continue;
      ++kept;
      bool in1 = v1(z), in2 = v2(z);
      if (z[0] >= 0.0) {
        ++upper_n;
        if (in1) ++upper_in;
      } else {
        ++lower_n;
        if (in2) ++lower_in;
      }
      if (in1 || in2) ++full_in;
    }
    rep.half1.push_back(upper_n ? static_cast<double>(upper_in) / upper_n : 0.0);
    rep.half2.push_back(lower_n ? static_cast<double>(lower_in) / lower_n : 0.0);
    rep.full.push_back(static_cast<double>(full_in) / samples);
  }
  rep.pass = true;
  for (size_t i = 0; i < rep.deltas.size(); ++i) {
    if (rep.full[i] < rep.half1[i] - 0.01 || rep.full[i] < rep.half2[i] - 0.01) rep.pass = false;
  }
  if (rep.full.back() < rep.full.front() - 0.01) rep.pass = false;
  return rep;
}

}  // namespace linear_model
}  // namespace morseflow
