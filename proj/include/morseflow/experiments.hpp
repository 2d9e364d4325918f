#pragma once

// Concentration experiment: sample balls of shrinking radius around a
// simple maximum, classify every sample by its descent terminal, and
// estimate the fraction captured by the two principal-line minima.
// Work is split over counter-based substreams, so reports are identical
// for any thread count.

#include <cmath>
#include <set>
#include <vector>

#include "morseflow/flow.hpp"
#include "morseflow/parallel.hpp"
#include "morseflow/stats.hpp"

namespace morseflow {

struct DeltaStats {
  double delta = 0.0;
  long n = 0;
  std::vector<long> terminal_counts;  // indexed by critical id
  long unresolved = 0;
  double f = 0.0;  // fraction of resolved samples ending at {m+, m-}
  WilsonInterval wilson;
};

struct ConcentrationReport {
  int maximum_id = -1;
  int m_plus = -1, m_minus = -1;
  uint64_t seed = 0;
  std::vector<DeltaStats> rows;
};

inline ConcentrationReport run_concentration(const Landscape& L, const CriticalSet& critset,
                                             const PrincipalFlowLine& plus,
                                             const PrincipalFlowLine& minus,
                                             const std::vector<double>& deltas, long n_per_delta,
                                             uint64_t seed, int threads = 1) {
  if (deltas.empty()) fail(Errc::precondition, "empty delta list");
  for (size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) fail(Errc::precondition, "delta list must be decreasing");
  if (plus.maximum_id != minus.maximum_id)
    fail(Errc::precondition, "principal lines belong to different maxima");
  if (plus.outcome != PrincipalFlowLine::Outcome::minimum ||
      minus.outcome != PrincipalFlowLine::Outcome::minimum)
    fail(Errc::non_simple_input, "principal line terminals are not minima");

  const int max_id = plus.maximum_id;
  const CriticalPoint& p = critset.points[static_cast<size_t>(max_id)];
  double d_other = critset.nearest_other_distance(L.manifold, max_id);
  if (deltas.front() > 0.5 * d_other)
    fail(Errc::precondition, "largest delta exceeds half the distance to the nearest critical point");

  ConcentrationReport rep;
  rep.maximum_id = max_id;
  rep.m_plus = plus.terminal_id;
  rep.m_minus = minus.terminal_id;
  rep.seed = seed;

  RandomStream root(seed);
  const int k = critset.size();

  for (size_t di = 0; di < deltas.size(); ++di) {
    DeltaStats row;
    row.delta = deltas[di];
    row.n = n_per_delta;
    row.terminal_counts.assign(static_cast<size_t>(k), 0);

    std::vector<std::vector<long>> local_counts(
        static_cast<size_t>(std::max(1, threads)), std::vector<long>(static_cast<size_t>(k), 0));
    std::vector<long> local_unresolved(static_cast<size_t>(std::max(1, threads)), 0);

    parallel_chunks(n_per_delta, threads, [&](int chunk, long lo, long hi) {
      std::vector<long>& counts = local_counts[static_cast<size_t>(chunk)];
      for (long i = lo; i < hi; ++i) {
        RandomStream st = root.child(di, static_cast<uint64_t>(i));
        VecN x = sample_ball(L, p.location, row.delta, st);
        std::optional<int> id = classify_point(L, critset, x);
        if (id)
          ++counts[static_cast<size_t>(*id)];
        else
          ++local_unresolved[static_cast<size_t>(chunk)];
      }
    });

    for (size_t c = 0; c < local_counts.size(); ++c) {
      for (int j = 0; j < k; ++j)
        row.terminal_counts[static_cast<size_t>(j)] += local_counts[c][static_cast<size_t>(j)];
      row.unresolved += local_unresolved[c];
    }

    if (static_cast<double>(row.unresolved) > 0.001 * static_cast<double>(n_per_delta))
      fail(Errc::too_many_unresolved,
           std::to_string(row.unresolved) + " unresolved samples out of " +
               std::to_string(n_per_delta) + " at delta " + std::to_string(row.delta));

    std::set<int> targets{rep.m_plus, rep.m_minus};
    long captured = 0;
    for (int t : targets) captured += row.terminal_counts[static_cast<size_t>(t)];
    long resolved = n_per_delta - row.unresolved;
    row.f = resolved > 0 ? static_cast<double>(captured) / static_cast<double>(resolved) : 0.0;
    row.wilson = wilson95(captured, resolved);
    rep.rows.push_back(row);
  }
  return rep;
}

struct ScalingRow {
  double delta = 0.0;
  double one_minus_f = 0.0;
  double predicted = 0.0;  // c * delta^(lambda1/lambda2 - 1)
};

struct ScalingComparison {
  ConcentrationReport base;
  double lambda_ratio = 0.0;       // lambda1/lambda2 of H^g at the maximum
  double expected_exponent = 0.0;  // lambda_ratio - 1
  double fitted_exponent = 0.0;
  double deviation = 0.0;
  bool fit_ok = false;
  bool slow_convergence = false;  // near-tie eigenvalues, exponent near 0
  std::vector<ScalingRow> rows;
};

inline ScalingComparison run_scaling_comparison(const Landscape& L, const CriticalSet& critset,
                                                const PrincipalFlowLine& plus,
                                                const PrincipalFlowLine& minus,
                                                const std::vector<double>& deltas,
                                                long n_per_delta, uint64_t seed, int threads = 1) {
  ScalingComparison cmp;
  cmp.base = run_concentration(L, critset, plus, minus, deltas, n_per_delta, seed, threads);

  const CriticalPoint& p = critset.points[static_cast<size_t>(cmp.base.maximum_id)];
  cmp.lambda_ratio = p.eigenvalues[0] / p.eigenvalues[1];
  cmp.expected_exponent = cmp.lambda_ratio - 1.0;
  cmp.slow_convergence = cmp.expected_exponent < 0.5;

  std::vector<double> xs, ys;
  for (const DeltaStats& row : cmp.base.rows) {
    double miss = 1.0 - row.f;
    if (miss > 0.0) {
      xs.push_back(row.delta);
      ys.push_back(miss);
    }
  }
  double log_c = 0.0;
  if (xs.size() >= 2) {
    cmp.fitted_exponent = log_log_slope(xs, ys);
    cmp.deviation = std::fabs(cmp.fitted_exponent - cmp.expected_exponent);
    cmp.fit_ok = true;
    for (size_t i = 0; i < xs.size(); ++i)
      log_c += std::log(ys[i]) - cmp.expected_exponent * std::log(xs[i]);
    log_c /= static_cast<double>(xs.size());
  }
  for (const DeltaStats& row : cmp.base.rows) {
    ScalingRow r;
    r.delta = row.delta;
    r.one_minus_f = 1.0 - row.f;
    r.predicted = cmp.fit_ok ? std::exp(log_c) * std::pow(row.delta, cmp.expected_exponent) : 0.0;
    cmp.rows.push_back(r);
  }
  return cmp;
}

}  // namespace morseflow
