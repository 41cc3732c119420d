#pragma once

// Brute-force reference computations the tests check the library against.
// These deliberately re-derive everything from first principles and share no
// code path with the implementation.

#include <cmath>
#include <limits>
#include <vector>

#include "oco/baselines.hpp"
#include "oco/geometry.hpp"
#include "oco/problem.hpp"
#include "oco/solver.hpp"

namespace oracles {

using oco::Vec;

/// Value of the proximal round objective
///   V gf'(y - x) + sum_k Q_k gg_k'(y - x) + alpha ||y - x||^2
/// evaluated directly from its definition.
inline double xupdate_objective(const Vec& y, const Vec& x, const oco::StepFeedback& fb, const Vec& q, double V,
                                double alpha) {
  double val = V * fb.loss_subgradient.dot(y - x) + alpha * (y - x).squaredNorm();
  for (int k = 0; k < q.size(); ++k) val += q[k] * fb.constraint_subgradients.row(k).dot(y - x);
  return val;
}

/// Grid argmin of the round objective over a box. The objective is a sum of
/// per-coordinate terms, so the argmin over the product grid equals the
/// per-coordinate grid argmins; grid_argmin_xupdate_full below verifies that
/// identity by exhaustive scan at coarse resolution.
inline Vec grid_argmin_xupdate(const Vec& x, const oco::StepFeedback& fb, const Vec& q, double V, double alpha,
                               const Vec& lower, const Vec& upper, double resolution) {
  const int n = static_cast<int>(x.size());
  Vec best(n);
  for (int i = 0; i < n; ++i) {
    double coeff = V * fb.loss_subgradient[i];
    for (int k = 0; k < q.size(); ++k) coeff += q[k] * fb.constraint_subgradients(k, i);
    const int steps = static_cast<int>(std::floor((upper[i] - lower[i]) / resolution + 0.5));
    double best_val = std::numeric_limits<double>::infinity();
    double best_y = lower[i];
    for (int j = 0; j <= steps; ++j) {
      const double y = lower[i] + j * resolution;
      const double d = y - x[i];
      const double val = coeff * d + alpha * d * d;
      if (val < best_val) {
        best_val = val;
        best_y = y;
      }
    }
    best[i] = best_y;
  }
  return best;
}

/// Exhaustive 2-D grid argmin of the same objective (no separability used).
inline Vec grid_argmin_xupdate_full(const Vec& x, const oco::StepFeedback& fb, const Vec& q, double V, double alpha,
                                    const Vec& lower, const Vec& upper, double resolution) {
  const int steps0 = static_cast<int>(std::floor((upper[0] - lower[0]) / resolution + 0.5));
  const int steps1 = static_cast<int>(std::floor((upper[1] - lower[1]) / resolution + 0.5));
  Vec best(2), y(2);
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps0; ++i) {
    y[0] = lower[0] + i * resolution;
    for (int j = 0; j <= steps1; ++j) {
      y[1] = lower[1] + j * resolution;
      const double val = xupdate_objective(y, x, fb, q, V, alpha);
      if (val < best_val) {
        best_val = val;
        best = y;
      }
    }
  }
  return best;
}

/// Brute-force nearest point on the 3-D unit-scale simplex over a grid.
inline Vec grid_project_simplex3(const Vec& p, double scale, double resolution) {
  Vec best(3);
  double best_val = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::floor(scale / resolution + 0.5));
  for (int i = 0; i <= steps; ++i) {
    const double x0 = i * resolution;
    for (int j = 0; i + j <= steps; ++j) {
      const double x1 = j * resolution;
      const double x2 = scale - x0 - x1;
      const double d0 = x0 - p[0], d1 = x1 - p[1], d2 = x2 - p[2];
      const double val = d0 * d0 + d1 * d1 + d2 * d2;
      if (val < best_val) {
        best_val = val;
        best << x0, x1, x2;
      }
    }
  }
  return best;
}

/// Grid minimization of a hindsight problem over [lo, hi] in 1-D, keeping
/// only points whose empirical-mean constraints are feasible to tol.
inline double grid_hindsight_1d(const oco::HistoryOracles& h, double lo, double hi, double resolution, double tol,
                                double* arg = nullptr) {
  double best_val = std::numeric_limits<double>::infinity();
  double best_x = lo;
  const int steps = static_cast<int>(std::floor((hi - lo) / resolution + 0.5));
  for (int i = 0; i <= steps; ++i) {
    Vec x(1);
    x[0] = lo + i * resolution;
    bool ok = true;
    for (int k = 0; k < h.m && ok; ++k) {
      double mean = 0.0;
      for (int t = 1; t <= h.T; ++t) mean += h.constraint_value(t, k, x);
      ok = mean / h.T <= tol;
    }
    if (!ok) continue;
    double val = 0.0;
    for (int t = 1; t <= h.T; ++t) val += h.loss_value(t, x);
    if (val < best_val) {
      best_val = val;
      best_x = x[0];
    }
  }
  if (arg) *arg = best_x;
  return best_val;
}

/// Same over a 2-D box grid.
inline double grid_hindsight_2d(const oco::HistoryOracles& h, const Vec& lo, const Vec& hi, double resolution,
                                double tol, Vec* arg = nullptr) {
  double best_val = std::numeric_limits<double>::infinity();
  Vec best = lo;
  const int s0 = static_cast<int>(std::floor((hi[0] - lo[0]) / resolution + 0.5));
  const int s1 = static_cast<int>(std::floor((hi[1] - lo[1]) / resolution + 0.5));
  Vec x(2);
  for (int i = 0; i <= s0; ++i) {
    x[0] = lo[0] + i * resolution;
    for (int j = 0; j <= s1; ++j) {
      x[1] = lo[1] + j * resolution;
      bool ok = true;
      for (int k = 0; k < h.m && ok; ++k) {
        double mean = 0.0;
        for (int t = 1; t <= h.T; ++t) mean += h.constraint_value(t, k, x);
        ok = mean / h.T <= tol;
      }
      if (!ok) continue;
      double val = 0.0;
      for (int t = 1; t <= h.T; ++t) val += h.loss_value(t, x);
      if (val < best_val) {
        best_val = val;
        best = x;
      }
    }
  }
  if (arg) *arg = best;
  return best_val;
}

/// Extended-precision evaluation of the expected-queue-bound formula.
inline long double expected_bound_ld(long double theta, long double t0, long double delta, long double zeta) {
  const long double d2 = delta * delta;
  return theta + t0 * (4.0L * d2 / zeta) * std::log(1.0L + (8.0L * d2 / (zeta * zeta)) * std::exp(zeta / (4.0L * delta)));
}

}  // namespace oracles
