#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "morseflow/errors.hpp"

namespace morseflow {

struct WilsonInterval {
  double lo = 0.0, hi = 1.0;
  double half_width() const { return 0.5 * (hi - lo); }
};

// Wilson score interval at 95% (z = 1.96); well behaved for f near 1.
inline WilsonInterval wilson95(long successes, long n) {
  if (n <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  double p = static_cast<double>(successes) / static_cast<double>(n);
  double z2n = z * z / static_cast<double>(n);
  double denom = 1.0 + z2n;
  double center = (p + 0.5 * z2n) / denom;
  double hw = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + 0.25 * z2n / static_cast<double>(n)) / denom;
  return {std::max(0.0, center - hw), std::min(1.0, center + hw)};
}

// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(Errc::precondition, "need >= 2 points for a slope");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t m = x.size();
  for (size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail(Errc::precondition, "log-log fit needs positive data");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(m);
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace morseflow
