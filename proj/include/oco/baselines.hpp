#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "oco/geometry.hpp"
#include "oco/server_model.hpp"

namespace oco {

// ============================================================================
// Hindsight benchmark
// ============================================================================

/// The realized history of a finished run: per-round losses and per-round
/// realized constraint functions, as callables.
struct HistoryOracles {
  int T = 0;
  int m = 0;
  std::function<double(int, const Vec&)> loss_value;            // f^t(x)
  std::function<Vec(int, const Vec&)> loss_subgradient;
  std::function<double(int, int, const Vec&)> constraint_value;  // g_k^t(x)
  std::function<Vec(int, int, const Vec&)> constraint_subgradient;
};

struct HindsightSolution {
  Vec x_star;
  double objective = 0.0;                ///< sum_t f^t(x_star)
  Vec empirical_constraint_means;        ///< (1/T) sum_t g_k^t(x_star)
  double solver_residual = 0.0;          ///< objective change over the final window
  bool feasible = true;
  int penalty_escalations = 0;
};

/// Best fixed decision against the empirical-mean constraints:
///   min sum_t f^t(x)  s.t.  x in set, (1/T) sum_t g_k^t(x) <= 0.
/// Solved by projected subgradient descent on the exact-penalty objective
/// (time-averaged internally) with geometrically decaying normalized steps;
/// the penalty weight escalates x10 until the means are feasible to tol,
/// at most 10 times. Note this benchmarks the empirical means, which for
/// stochastic constraints stand in for the unknown expectations.
inline HindsightSolution hindsight_solve(const HistoryOracles& h, const FeasibleSet& set, double tol) {
  if (h.T < 1) throw std::invalid_argument("hindsight_solve: empty history");
  if (!(tol > 0.0)) throw std::invalid_argument("hindsight_solve: tol must be positive");
  const double invT = 1.0 / static_cast<double>(h.T);

  const auto mean_loss = [&](const Vec& x) {
    double s = 0.0;
    for (int t = 1; t <= h.T; ++t) s += h.loss_value(t, x);
    return s * invT;
  };
  const auto mean_loss_grad = [&](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    for (int t = 1; t <= h.T; ++t) g += h.loss_subgradient(t, x);
    return Vec((g * invT).eval());
  };
  const auto mean_constraint = [&](int k, const Vec& x) {
    double s = 0.0;
    for (int t = 1; t <= h.T; ++t) s += h.constraint_value(t, k, x);
    return s * invT;
  };
  const auto mean_constraint_grad = [&](int k, const Vec& x) {
    Vec g = Vec::Zero(x.size());
    for (int t = 1; t <= h.T; ++t) g += h.constraint_subgradient(t, k, x);
    return Vec((g * invT).eval());
  };

  const auto max_mean_violation = [&](const Vec& x) {
    double worst = 0.0;
    for (int k = 0; k < h.m; ++k) worst = std::max(worst, mean_constraint(k, x));
    return worst;
  };

  Vec x = set.center();
  double rho = std::max(1.0, 10.0 * mean_loss_grad(x).norm());
  HindsightSolution sol;

  for (int escalation = 0; escalation <= 10; ++escalation) {
    const auto penalized = [&](const Vec& y) {
      double v = mean_loss(y);
      for (int k = 0; k < h.m; ++k) v += rho * std::max(mean_constraint(k, y), 0.0);
      return v;
    };

    Vec best = x;
    double best_val = penalized(x);
    double eta = 0.25 * set.diameter();
    double residual = std::numeric_limits<double>::infinity();

    // Geometric step decay; a phase that fails to improve by tol halves the
    // step. Stale phases only end the solve once the step has decayed far
    // enough that oscillation at large eta cannot be mistaken for
    // convergence.
    int stale_phases = 0;
    for (int phase = 0; phase < 64 && (stale_phases < 2 || phase < 24); ++phase, eta *= 0.5) {
      const double phase_start = best_val;
      for (int j = 0; j < 150; ++j) {
        Vec grad = mean_loss_grad(x);
        for (int k = 0; k < h.m; ++k)
          if (mean_constraint(k, x) > 0.0) grad += rho * mean_constraint_grad(k, x);
        const double gn = grad.norm();
        if (gn == 0.0) break;
        x = set.project(x - (eta / gn) * grad);
        const double v = penalized(x);
        if (v < best_val) {
          best_val = v;
          best = x;
        }
      }
      residual = phase_start - best_val;
      stale_phases = (residual < tol) ? stale_phases + 1 : 0;
    }

    x = best;
    sol.solver_residual = residual;
    sol.penalty_escalations = escalation;
    if (max_mean_violation(x) <= tol) {
      sol.feasible = true;
      break;
    }
    sol.feasible = false;
    rho *= 10.0;
  }

  sol.x_star = x;
  sol.objective = mean_loss(x) * static_cast<double>(h.T);
  sol.empirical_constraint_means.resize(h.m);
  for (int k = 0; k < h.m; ++k) sol.empirical_constraint_means[k] = mean_constraint(k, x);
  return sol;
}

// ============================================================================
// Data-center policy baselines
// ============================================================================

struct ReactDecision {
  Vec power;
  bool saturated = false;  ///< some server could not reach its target rate
};

/// Spread the estimated arrivals evenly: each server targets
/// mu = estimate / n and inverts its service curve (bisection), clamping
/// to its power interval.
inline ReactDecision react_policy(double arrival_estimate, const std::vector<ServerModel>& servers) {
  if (arrival_estimate < 0.0) throw std::invalid_argument("react_policy: negative arrival estimate");
  if (servers.empty()) throw std::invalid_argument("react_policy: no servers");
  const double mu = arrival_estimate / static_cast<double>(servers.size());
  ReactDecision d;
  d.power.resize(static_cast<Eigen::Index>(servers.size()));
  for (size_t i = 0; i < servers.size(); ++i) {
    if (mu > servers[i].max_rate()) d.saturated = true;
    d.power[static_cast<Eigen::Index>(i)] = servers[i].power_for_rate(mu);
  }
  return d;
}

struct LowPowerDecision {
  Vec power;
  double shortfall = 0.0;  ///< required rate left unmet after all servers filled
};

/// Fill servers to full power in ascending order of estimated price (ties by
/// server index) until the cumulative full-power rate covers the required
/// rate; everything else idles at minimum power. Undercapacity is allowed
/// and reported as a shortfall.
inline LowPowerDecision lowpower_policy(const Vec& price_estimates, double required_rate,
                                        const std::vector<ServerModel>& servers) {
  if (static_cast<size_t>(price_estimates.size()) != servers.size())
    throw std::invalid_argument("lowpower_policy: price/server count mismatch");
  std::vector<int> order(servers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return price_estimates[a] < price_estimates[b];
  });

  LowPowerDecision d;
  d.power.resize(static_cast<Eigen::Index>(servers.size()));
  for (size_t i = 0; i < servers.size(); ++i) d.power[static_cast<Eigen::Index>(i)] = servers[i].x_min;
  double cum = 0.0;
  for (int idx : order) {
    if (cum >= required_rate) break;
    d.power[idx] = servers[static_cast<size_t>(idx)].x_max;
    cum += servers[static_cast<size_t>(idx)].max_rate();
  }
  d.shortfall = std::max(0.0, required_rate - cum);
  return d;
}

/// Mean of the most recent `window` values before slot t (1-based). Slot 1
/// has no history and is seeded with the true first-slot value.
inline double trailing_mean(const std::vector<double>& series, int t, int window = 5) {
  if (t <= 1) return series.empty() ? 0.0 : series.front();
  const int hi = t - 1;                       // last observed slot
  const int lo = std::max(1, t - window);     // at most `window` slots back
  double s = 0.0;
  for (int i = lo; i <= hi; ++i) s += series[static_cast<size_t>(i - 1)];
  return s / static_cast<double>(hi - lo + 1);
}

}  // namespace oco
