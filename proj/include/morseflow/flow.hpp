#pragma once

// Gradient descent/ascent trajectories: adaptive Dormand-Prince 5(4)
// integration with a convergence event (capture radius AND small
// gradient), principal flow line tracing, and basin classification.

#include <optional>
#include <ostream>
#include <vector>

#include "morseflow/critical.hpp"
#include "morseflow/geometry.hpp"

namespace morseflow {

enum class Direction { descent, ascent };
enum class Terminal { converged, timed_out, left_domain };

struct Trajectory {
  struct Sample {
    double t;
    VecN x;
    double f;
  };
  std::vector<Sample> samples;  // accepted steps, when recorded
  Terminal terminal = Terminal::timed_out;
  int critical_id = -1;  // set when terminal == converged
  double total_time = 0.0;
  VecN final_state;
  double final_value = 0.0;
  // max observed increase of F per accepted step along the dissipative
  // direction (descent: F should not increase)
  double monotonicity_margin = 0.0;
  long steps = 0;
  long rhs_evals = 0;
};

struct IntegrateOptions {
  bool record_path = true;
  bool capture = true;       // stop at the convergence event
  double t_limit = -1.0;     // <= 0 means tolerance t_max
};

namespace detail {

struct Dopri5 {
  // Butcher tableau of the Dormand-Prince 5(4) pair
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

inline Trajectory integrate(const Landscape& L, const VecN& x0, Direction dir,
                            const CriticalSet& critset, const IntegrateOptions& opts = {}) {
  using D = detail::Dopri5;
  const Manifold& M = L.manifold;
  const double sign = dir == Direction::descent ? -1.0 : 1.0;
  const double t_limit = opts.t_limit > 0.0 ? opts.t_limit : L.tol.t_max;
  const double grad_stop = 10.0 * L.tol.grad_tol;
  const double box_slack = M.periodic() ? 0.0 : 1e-9 * M.min_extent();

  Trajectory traj;
  VecN x = M.normalize(x0);
  if (!M.contains(x, box_slack))
    fail(Errc::left_domain, "initial state outside the box at " + to_string(x));

  auto rhs = [&](const VecN& y, double& value_out) {
    GradEval g = rgrad_eval(L, y);
    ++traj.rhs_evals;
    value_out = g.value;
    return sign * g.rgrad;
  };

  double f_here = 0.0;
  VecN k1 = rhs(x, f_here);
  double gnorm = norm(k1);
  if (opts.record_path) traj.samples.push_back({0.0, x, f_here});

  auto captured = [&](const VecN& y, double grad_norm, int& id_out) {
    if (!opts.capture || critset.points.empty()) return false;
    double d;
    int id = critset.nearest(M, y, &d);
    if (d <= L.tol.capture_radius && grad_norm <= grad_stop) {
      id_out = id;
      return true;
    }
    return false;
  };

  int cap_id = -1;
  if (captured(x, gnorm, cap_id)) {
    traj.terminal = Terminal::converged;
    traj.critical_id = cap_id;
    traj.final_state = x;
    traj.final_value = f_here;
    return traj;
  }

  double t = 0.0;
  double h = std::min({0.01 * (1.0 + norm(x)) / (1.0 + gnorm), t_limit, 0.1});
  const double h_max = 10.0;
  VecN k2, k3, k4, k5, k6, k7;
  double dump;

  while (t < t_limit) {
    h = std::min({h, h_max, t_limit - t});
    if (h < 1e-14)
      fail(Errc::step_underflow, "step size underflow at t=" + std::to_string(t) + ", x=" + to_string(x));

    k2 = rhs(x + h * D::a21 * k1, dump);
    k3 = rhs(x + h * (D::a31 * k1 + D::a32 * k2), dump);
    k4 = rhs(x + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3), dump);
    k5 = rhs(x + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4), dump);
    k6 = rhs(x + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5), dump);
    VecN x_new = x + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
    double f_new;
    k7 = rhs(x_new, f_new);  // FSAL stage

    VecN err = h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);
    double err_norm = 0.0;
    for (int i = 0; i < x.n; ++i) {
      double sc = L.tol.ode_abs_tol +
                  L.tol.ode_rel_tol * std::max(std::fabs(x[i]), std::fabs(x_new[i]));
      double q = err[i] / sc;
      err_norm += q * q;
    }
    err_norm = std::sqrt(err_norm / x.n);

    if (err_norm <= 1.0) {
      t += h;
      double increase = dir == Direction::descent ? f_new - f_here : f_here - f_new;
      traj.monotonicity_margin = std::max(traj.monotonicity_margin, increase);
      x = M.normalize(x_new);
      f_here = f_new;
      k1 = k7;
      ++traj.steps;
      if (!M.contains(x, box_slack))
        fail(Errc::left_domain, "trajectory left the box at t=" + std::to_string(t) +
                                    ", x=" + to_string(x));
      if (opts.record_path) traj.samples.push_back({t, x, f_here});
      if (captured(x, norm(k7), cap_id)) {
        traj.terminal = Terminal::converged;
        traj.critical_id = cap_id;
        break;
      }
    }
    double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
  }

  traj.total_time = t;
  traj.final_state = x;
  traj.final_value = f_here;
  if (traj.terminal != Terminal::converged) traj.terminal = Terminal::timed_out;
  return traj;
}

struct PrincipalFlowLine {
  enum class Outcome { minimum, saddle_hit, maximum_hit, unresolved };
  int maximum_id = -1;
  int sign = +1;          // which side of v1 the line leaves from
  double seed_eps = 0.0;
  Trajectory trajectory;  // traced in reverse: descent from p +/- eps v1
  int terminal_id = -1;
  Outcome outcome = Outcome::unresolved;
};

// Both principal flow lines of a simple maximum, traced as descent from
// p +/- eps_seed v1. eps_seed <= 0 selects the default, 1e-4 times the
// distance to the nearest other critical point.
inline std::pair<PrincipalFlowLine, PrincipalFlowLine> trace_principal(
    const Landscape& L, const CriticalSet& critset, int maximum_id, double eps_seed = -1.0,
    bool record_path = false) {
  const CriticalPoint& p = critset.points[static_cast<size_t>(maximum_id)];
  const int n = L.dim();
  SimplicityResult simp = simplicity_gap(p, n, L.tol.gap_rel_tol);
  if (!simp.simple)
    fail(Errc::non_simple_input,
         "maximum " + std::to_string(maximum_id) + " has an eigenvalue tie (gap_rel " +
             std::to_string(p.gap_rel) + ")");
  const VecN v1 = *simp.v1;

  double d_other = critset.nearest_other_distance(L.manifold, maximum_id);
  if (eps_seed <= 0.0) eps_seed = 1e-4 * d_other;
  if (eps_seed > 0.5 * d_other)
    fail(Errc::seed_too_large, "seed offset " + std::to_string(eps_seed) +
                                   " exceeds half the distance to the nearest critical point");

  auto trace_one = [&](int sgn) {
    PrincipalFlowLine line;
    line.maximum_id = maximum_id;
    line.sign = sgn;
    line.seed_eps = eps_seed;
    VecN seed = L.manifold.normalize(p.location + (sgn * eps_seed) * v1);
    IntegrateOptions opts;
    opts.record_path = record_path;
    line.trajectory = integrate(L, seed, Direction::descent, critset, opts);
    if (line.trajectory.terminal == Terminal::converged) {
      line.terminal_id = line.trajectory.critical_id;
      const CriticalPoint& q = critset.points[static_cast<size_t>(line.terminal_id)];
      if (q.morse_index == 0)
        line.outcome = PrincipalFlowLine::Outcome::minimum;
      else if (q.morse_index == n)
        line.outcome = PrincipalFlowLine::Outcome::maximum_hit;
      else
        line.outcome = PrincipalFlowLine::Outcome::saddle_hit;
    }
    return line;
  };

  return {trace_one(+1), trace_one(-1)};
}

// Terminal critical point of the descent trajectory from x, or nullopt if
// the integration timed out.
inline std::optional<int> classify_point(const Landscape& L, const CriticalSet& critset,
                                         const VecN& x) {
  IntegrateOptions opts;
  opts.record_path = false;
  Trajectory t = integrate(L, x, Direction::descent, critset, opts);
  if (t.terminal == Terminal::converged) return t.critical_id;
  return std::nullopt;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int dim) {
  os << "t";
  for (int i = 1; i <= dim; ++i) os << ",x" << i;
  os << ",F\n";
  char buf[64];
  for (const Trajectory::Sample& s : traj.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    os << buf;
    for (int i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", s.x[i]);
      os << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", s.f);
    os << ',' << buf << '\n';
  }
}

}  // namespace morseflow
