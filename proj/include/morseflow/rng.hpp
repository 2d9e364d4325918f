#pragma once

// Counter-based random streams. A stream is identified by a key derived
// from (seed, lane indices); drawing advances only a local counter, so
// per-task streams can be created independently on any thread and the
// aggregate result does not depend on scheduling.

#include <cmath>
#include <cstdint>

#include "morseflow/linalg.hpp"

namespace morseflow {

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

class RandomStream {
 public:
  RandomStream() : key_(0) {}
  explicit RandomStream(uint64_t seed) : key_(detail::mix64(seed)) {}

  // Child stream for lane (a, b, c); derivation is a pure function of the
  // key and the lane, never of draw history.
  RandomStream child(uint64_t a, uint64_t b = 0, uint64_t c = 0) const {
    RandomStream s;
    s.key_ = detail::mix64(key_ ^ detail::mix64(a ^ detail::mix64(b ^ detail::mix64(c))));
    return s;
  }

  uint64_t next_u64() {
    ++counter_;
    return detail::mix64(key_ ^ detail::mix64(counter_));
  }

  // uniform in [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform integer in [0, n)
  uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

  double gaussian() {
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  VecN gaussian_vec(int n) {
    VecN v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  // uniform on the unit sphere S^{n-1}
  VecN unit_vector(int n) {
    for (;;) {
      VecN v = gaussian_vec(n);
      double r = norm(v);
      if (r > 1e-12) return v * (1.0 / r);
    }
  }

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace morseflow
