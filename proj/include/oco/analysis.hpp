#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "oco/parallel.hpp"
#include "oco/solver.hpp"

namespace oco {

// ============================================================================
// Metrics
// ============================================================================

/// Cumulative loss of the trajectory minus the benchmark's cumulative loss.
inline double regret(const Trajectory& traj, const std::vector<double>& benchmark_losses) {
  if (static_cast<int>(benchmark_losses.size()) != traj.T())
    throw std::invalid_argument("regret: benchmark length does not match horizon");
  double own = 0.0, bench = 0.0;
  for (int t = 0; t < traj.T(); ++t) {
    own += traj.rounds[static_cast<size_t>(t)].loss;
    bench += benchmark_losses[static_cast<size_t>(t)];
  }
  return own - bench;
}

/// Signed per-constraint sums of realized values; negative means slack.
inline Vec cumulative_violation(const Trajectory& traj) {
  Vec v = Vec::Zero(traj.m);
  for (const auto& r : traj.rounds) v += r.g;
  return v;
}

/// Coordinate-wise mean of the decisions; inside the set by convexity.
inline Vec averaged_iterate(const Trajectory& traj) {
  if (traj.T() < 1) throw std::invalid_argument("averaged_iterate: empty trajectory");
  Vec s = Vec::Zero(traj.rounds.front().x.size());
  for (const auto& r : traj.rounds) s += r.x;
  return s / static_cast<double>(traj.T());
}

struct RunSummary {
  double regret = 0.0;
  Vec violations;
  double max_queue = 0.0;
  Vec averaged_iterate;
};

inline RunSummary summarize(const Trajectory& traj, const std::vector<double>& benchmark_losses) {
  RunSummary s;
  s.regret = regret(traj, benchmark_losses);
  s.violations = cumulative_violation(traj);
  s.averaged_iterate = averaged_iterate(traj);
  for (int t = 1; t <= traj.T() + 1; ++t) s.max_queue = std::max(s.max_queue, traj.queue_at(t).norm());
  return s;
}

// ============================================================================
// Queue-size constants
// ============================================================================

/// Constants of the multi-step drift argument from which expected and tail
/// queue bounds are computed.
struct BoundConstants {
  double delta_max = 0.0;  ///< one-step queue jump bound G + sqrt(m) D2 R
  double zeta = 0.0;       ///< per-step expected decrease, epsilon / 2
  int t0 = 1;              ///< drift window length
  double theta = 0.0;      ///< drift switching threshold
  double B = 0.0;          ///< window-free part of the expected bound
};

/// Populate the queue-bound constants for constraint count m. Requires the
/// Slater margin; theta is
///   (eps/2) t0 + delta t0 + 2 alpha R^2/(t0 eps) + (2 V D1 R + delta^2)/eps
/// with delta = G + sqrt(m) D2 R.
inline BoundConstants theta_constant(int t0, const AlgorithmParams& params, const ProblemBounds& bounds, int m) {
  if (t0 < 1) throw std::invalid_argument("theta_constant: t0 must be a positive integer");
  if (!bounds.epsilon || !(*bounds.epsilon > 0.0))
    throw std::invalid_argument("theta_constant: bounds.epsilon is required and must be positive");
  const double eps = *bounds.epsilon;
  const double delta = bounds.G + std::sqrt(static_cast<double>(m)) * bounds.D2 * bounds.R;
  BoundConstants c;
  c.delta_max = delta;
  c.zeta = 0.5 * eps;
  c.t0 = t0;
  c.theta = 0.5 * eps * t0 + delta * t0 + 2.0 * params.alpha * bounds.R * bounds.R / (t0 * eps) +
            (2.0 * params.V * bounds.D1 * bounds.R + delta * delta) / eps;
  c.B = (8.0 * delta * delta / eps) *
        std::log1p((32.0 * delta * delta / (eps * eps)) * std::exp(eps / (8.0 * delta)));
  if (!(c.zeta > 0.0 && c.zeta <= c.delta_max))
    throw std::invalid_argument("theta_constant: need 0 < zeta <= delta_max (epsilon too large for G)");
  return c;
}

/// Expected-value bound on the queue norm:
///   theta + t0 (4 delta^2 / zeta) log(1 + (8 delta^2 / zeta^2) e^{zeta/(4 delta)}).
inline double drift_expected_bound(const BoundConstants& c) {
  const double d2 = c.delta_max * c.delta_max;
  return c.theta + c.t0 * (4.0 * d2 / c.zeta) *
                       std::log1p((8.0 * d2 / (c.zeta * c.zeta)) * std::exp(c.zeta / (4.0 * c.delta_max)));
}

/// Tail threshold z with P(queue norm >= z) <= mu at every round:
/// the expected bound plus t0 (4 delta^2 / zeta) log(1/mu). Requires mu in (0,1).
inline double drift_tail_threshold(const BoundConstants& c, double mu) {
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("drift_tail_threshold: mu must lie in (0,1)");
  const double d2 = c.delta_max * c.delta_max;
  return drift_expected_bound(c) + c.t0 * (4.0 * d2 / c.zeta) * std::log(1.0 / mu);
}

// ============================================================================
// Deterministic per-trajectory checks
// ============================================================================

/// Outcome of a per-trajectory inequality check. slack is the worst observed
/// margin (bound minus attained value); negative beyond tolerance fails and
/// records the witness.
struct CheckReport {
  std::string check;
  bool passed = true;
  double worst_slack = std::numeric_limits<double>::infinity();
  int witness_round = -1;
  int witness_k = -1;
  std::string note;

  void update(double slack, int round, int k, double tol) {
    if (slack < worst_slack) {
      worst_slack = slack;
      witness_round = round;
      witness_k = k;
    }
    if (slack < -tol) passed = false;
  }
};

/// Every round must satisfy the one-step queue-energy inequality
///   (||Q(t+1)||^2 - ||Q(t)||^2)/2 <= sum_k Q_k (g_k + gg_k' dx) + (G + sqrt(m) D2 R)^2 / 2.
inline CheckReport check_drift_bound(const Trajectory& traj, double tol = 1e-9) {
  CheckReport rep{"drift_bound"};
  const double delta = traj.bounds.G + std::sqrt(static_cast<double>(traj.m)) * traj.bounds.D2 * traj.bounds.R;
  const double pad = 0.5 * delta * delta;
  for (int t = 1; t <= traj.T(); ++t) {
    const auto& r = traj.rounds[static_cast<size_t>(t - 1)];
    const Vec dx = traj.displacement(t);
    const double lhs = 0.5 * (traj.queue_at(t + 1).squaredNorm() - r.queue.squaredNorm());
    double rhs = pad;
    for (int k = 0; k < traj.m; ++k) rhs += r.queue[k] * (r.g[k] + r.g_grad.row(k).dot(dx));
    rep.update(rhs - lhs, t, -1, tol);
  }
  return rep;
}

/// Every round must satisfy the step-size bound
///   ||x(t+1) - x(t)|| <= V D1 / (2 alpha) + sqrt(m) D2 ||Q(t)|| / (2 alpha).
inline CheckReport check_step_bound(const Trajectory& traj, double tol = 1e-9) {
  CheckReport rep{"step_size_bound"};
  const double sm = std::sqrt(static_cast<double>(traj.m));
  const double inv_two_alpha = 0.5 / traj.params.alpha;
  for (int t = 1; t <= traj.T(); ++t) {
    const auto& r = traj.rounds[static_cast<size_t>(t - 1)];
    const double bound =
        traj.params.V * traj.bounds.D1 * inv_two_alpha + sm * traj.bounds.D2 * r.queue.norm() * inv_two_alpha;
    rep.update(bound - traj.displacement(t).norm(), t, -1, tol);
  }
  return rep;
}

/// Every round must keep the queue norm inside the jump corridor
///   ||Q(t)|| - G - sqrt(m) D2 R <= ||Q(t+1)|| <= ||Q(t)|| + G.
inline CheckReport check_queue_jump_bound(const Trajectory& traj, double tol = 1e-9) {
  CheckReport rep{"queue_jump_bound"};
  const double delta = traj.bounds.G + std::sqrt(static_cast<double>(traj.m)) * traj.bounds.D2 * traj.bounds.R;
  for (int t = 1; t <= traj.T(); ++t) {
    const double qn = traj.queue_at(t).norm();
    const double qn_next = traj.queue_at(t + 1).norm();
    rep.update(qn + traj.bounds.G - qn_next, t, -1, tol);  // upper jump
    rep.update(qn_next - (qn - delta), t, -1, tol);        // lower jump
  }
  return rep;
}

/// Replays the queue recurrence from the recorded decisions and constraint
/// values (any mismatch is a corrupted or inconsistent trajectory), then
/// checks both cumulative-violation bridges for every constraint:
///   sum_t g_k <= ||Q(T+1)|| + D2 sum_t ||dx(t)||                  (displacement form)
///   sum_t g_k <= ||Q(T+1)|| + V T D1 D2/(2a) + sqrt(m) D2^2/(2a) sum_t ||Q(t)||.
inline CheckReport check_queue_violation_bound(const Trajectory& traj, const ProblemBounds& bounds,
                                               const AlgorithmParams& params, double tol = 1e-9) {
  CheckReport rep{"queue_violation_bound"};

  QueueState q = QueueState::zeros(traj.m);
  for (int t = 1; t <= traj.T(); ++t) {
    const auto& r = traj.rounds[static_cast<size_t>(t - 1)];
    if ((q.q - r.queue).lpNorm<Eigen::Infinity>() > 0.0) {
      rep.passed = false;
      rep.worst_slack = -(q.q - r.queue).lpNorm<Eigen::Infinity>();
      rep.witness_round = t;
      rep.note = "queue record does not replay from the update rule";
      return rep;
    }
    q = queue_update(q, r.g, r.g_grad, traj.displacement(t));
  }
  if ((q.q - traj.final_queue).lpNorm<Eigen::Infinity>() > 0.0) {
    rep.passed = false;
    rep.worst_slack = -(q.q - traj.final_queue).lpNorm<Eigen::Infinity>();
    rep.witness_round = traj.T() + 1;
    rep.note = "final queue does not replay from the update rule";
    return rep;
  }

  double disp_sum = 0.0, queue_norm_sum = 0.0;
  for (int t = 1; t <= traj.T(); ++t) {
    disp_sum += traj.displacement(t).norm();
    queue_norm_sum += traj.queue_at(t).norm();
  }
  const Vec viol = cumulative_violation(traj);
  const double q_final = traj.final_queue.norm();
  const double sm = std::sqrt(static_cast<double>(traj.m));
  const double inv_two_alpha = 0.5 / params.alpha;
  for (int k = 0; k < traj.m; ++k) {
    const double lhs = viol[k];
    rep.update(q_final + bounds.D2 * disp_sum - lhs, -1, k, tol);
    rep.update(q_final + params.V * traj.T() * bounds.D1 * bounds.D2 * inv_two_alpha +
                   sm * bounds.D2 * bounds.D2 * inv_two_alpha * queue_norm_sum - lhs,
               -1, k, tol);
  }
  return rep;
}

/// The committed update must beat every candidate z by the strong-convexity
/// margin: for sampled rounds and random z in the set,
///   V gf'(x+ - x) + sum Q_k gg_k'(x+ - x) + a||x+ - x||^2
///     <= V gf'(z - x) + sum Q_k gg_k'(z - x) + a||z - x||^2 - a||z - x+||^2.
inline CheckReport check_decision_optimality(const Trajectory& traj, const FeasibleSet& set, int z_samples = 100,
                                             std::uint64_t seed = 7, double tol = 1e-7) {
  CheckReport rep{"decision_optimality"};
  CounterRng rng(seed, 0);
  const int stride = std::max(1, traj.T() / 16);
  for (int t = 1; t <= traj.T(); t += stride) {
    const auto& r = traj.rounds[static_cast<size_t>(t - 1)];
    const Vec x_next = (t < traj.T()) ? traj.rounds[static_cast<size_t>(t)].x : traj.final_x;
    const Vec dx = x_next - r.x;
    double lhs = traj.params.V * r.loss_grad.dot(dx) + traj.params.alpha * dx.squaredNorm();
    for (int k = 0; k < traj.m; ++k) lhs += r.queue[k] * r.g_grad.row(k).dot(dx);
    for (int j = 0; j < z_samples; ++j) {
      const Vec z = set.sample(rng);
      const Vec dz = z - r.x;
      double rhs = traj.params.V * r.loss_grad.dot(dz) + traj.params.alpha * dz.squaredNorm() -
                   traj.params.alpha * (z - x_next).squaredNorm();
      for (int k = 0; k < traj.m; ++k) rhs += r.queue[k] * r.g_grad.row(k).dot(dz);
      rep.update(rhs - lhs, t, -1, tol);
    }
  }
  return rep;
}

// ============================================================================
// Statistical (Monte-Carlo) checks
// ============================================================================

/// Outcome of a sampled-expectation check; the assertion allows three
/// standard errors of slack so fixed-seed CI runs stay deterministic.
struct StatReport {
  std::string check;
  bool passed = true;
  double worst_margin = -std::numeric_limits<double>::infinity();  // estimate - allowed, worst over rounds
  std::vector<int> rounds;
  std::vector<double> estimates;
  std::vector<double> thresholds;
  std::vector<double> std_errors;
  int seeds = 0;
  std::string note;
};

/// Estimates E[sum_k Q_k(t) g_k(x_hat; omega(t))] at sampled rounds over
/// repeated seeded runs and asserts it is at most -margin * mean||Q(t)||
/// plus three standard errors. With margin = epsilon this is the Slater-point
/// negativity push; with margin = 0 it is the benchmark-feasibility version.
inline StatReport check_slater_negativity(const ProblemInstance& problem, const AlgorithmParams& params,
                                          const Vec& slater_point, double margin, int n_seeds,
                                          std::uint64_t base_seed = 1000, int sample_rounds = 5, int threads = 0) {
  if (n_seeds < 30) throw std::invalid_argument("check_slater_negativity: need at least 30 seeds");
  StatReport rep{"slater_negativity"};
  rep.seeds = n_seeds;
  if (problem.m == 0) {
    rep.note = "no constraints; vacuous";
    return rep;
  }

  const int T = params.horizon;
  std::vector<int> rounds;
  for (int i = 1; i <= sample_rounds; ++i) rounds.push_back(std::max(1, (T * i) / sample_rounds));

  const size_t nr = rounds.size();
  std::vector<std::vector<double>> v(nr), u(nr);
  for (auto& col : v) col.resize(static_cast<size_t>(n_seeds));
  for (auto& col : u) col.resize(static_cast<size_t>(n_seeds));

  parallel_for(n_seeds, threads, [&](int s) {
    const Trajectory traj = run(problem, params, base_seed + static_cast<std::uint64_t>(s));
    for (size_t i = 0; i < nr; ++i) {
      const auto& r = traj.rounds[static_cast<size_t>(rounds[i] - 1)];
      double dot = 0.0;
      for (int k = 0; k < problem.m; ++k) dot += r.queue[k] * problem.constraints.value(k, slater_point, r.omega);
      v[i][static_cast<size_t>(s)] = dot;
      u[i][static_cast<size_t>(s)] = r.queue.norm();
    }
  });

  for (size_t i = 0; i < nr; ++i) {
    double mean_stat = 0.0;
    for (int s = 0; s < n_seeds; ++s) mean_stat += v[i][static_cast<size_t>(s)] + margin * u[i][static_cast<size_t>(s)];
    mean_stat /= n_seeds;
    double var = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
      const double d = v[i][static_cast<size_t>(s)] + margin * u[i][static_cast<size_t>(s)] - mean_stat;
      var += d * d;
    }
    var /= std::max(1, n_seeds - 1);
    const double se = std::sqrt(var / n_seeds);
    rep.rounds.push_back(rounds[i]);
    rep.estimates.push_back(mean_stat);
    rep.thresholds.push_back(3.0 * se);
    rep.std_errors.push_back(se);
    rep.worst_margin = std::max(rep.worst_margin, mean_stat - 3.0 * se);
    if (mean_stat > 3.0 * se) rep.passed = false;
  }
  return rep;
}

/// Least-squares slope of log(metric) against log(T). Metrics must be
/// positive; callers shift a series upward (and say so) when a metric can
/// legitimately be nonpositive, e.g. negative regret.
inline double sublinearity_slope(const std::vector<double>& horizons, const std::vector<double>& metrics) {
  if (horizons.size() != metrics.size()) throw std::invalid_argument("sublinearity_slope: length mismatch");
  if (horizons.size() < 3) throw std::invalid_argument("sublinearity_slope: need at least 3 horizons");
  for (double t : horizons)
    if (!(t > 0.0)) throw std::invalid_argument("sublinearity_slope: horizons must be positive");
  for (double m : metrics)
    if (!(m > 0.0)) throw std::invalid_argument("sublinearity_slope: metrics must be positive");
  const size_t n = horizons.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += std::log(horizons[i]);
    my += std::log(metrics[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(horizons[i]) - mx;
    sxy += dx * (std::log(metrics[i]) - my);
    sxx += dx * dx;
  }
  if (sxx <= 0.0) throw std::invalid_argument("sublinearity_slope: degenerate horizon grid");
  return sxy / sxx;
}

/// Shift a series so its minimum is 1 when any entry is nonpositive;
/// returns the applied shift (0 when untouched).
inline double positivity_shift(std::vector<double>& metrics) {
  double mn = std::numeric_limits<double>::infinity();
  for (double m : metrics) mn = std::min(mn, m);
  if (mn > 0.0) return 0.0;
  const double shift = 1.0 - mn;
  for (double& m : metrics) m += shift;
  return shift;
}

// ============================================================================
// Seed-sweep drivers
// ============================================================================

struct QueueNormStats {
  Vec mean_norm_per_round;  ///< mean over seeds of ||Q(t)||, t = 1..T+1
  double max_mean_norm = 0.0;
  int seeds = 0;
};

/// Per-round mean of the queue norm across seeded runs.
inline QueueNormStats queue_norm_stats(const ProblemInstance& problem, const AlgorithmParams& params, int n_seeds,
                                       std::uint64_t base_seed = 1, int threads = 0) {
  QueueNormStats stats;
  stats.seeds = n_seeds;
  const int rows = params.horizon + 1;
  std::vector<Vec> partials = parallel_reduce<Vec>(n_seeds, threads, Vec::Zero(rows), [&](int s, Vec& acc) {
    const Trajectory traj = run(problem, params, base_seed + static_cast<std::uint64_t>(s));
    for (int t = 1; t <= params.horizon + 1; ++t) acc[t - 1] += traj.queue_at(t).norm();
  });
  Vec total = Vec::Zero(rows);
  for (const Vec& p : partials) total += p;
  stats.mean_norm_per_round = total / static_cast<double>(n_seeds);
  stats.max_mean_norm = stats.mean_norm_per_round.maxCoeff();
  return stats;
}

/// Fraction of seeded runs whose maximal queue norm reaches the threshold.
inline double fraction_max_queue_at_least(const ProblemInstance& problem, const AlgorithmParams& params, int n_seeds,
                                          double threshold, std::uint64_t base_seed = 1, int threads = 0) {
  std::vector<int> hits = parallel_reduce<int>(n_seeds, threads, 0, [&](int s, int& acc) {
    const Trajectory traj = run(problem, params, base_seed + static_cast<std::uint64_t>(s));
    double mx = 0.0;
    for (int t = 1; t <= params.horizon + 1; ++t) mx = std::max(mx, traj.queue_at(t).norm());
    if (mx >= threshold) ++acc;
  });
  int total = 0;
  for (int h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(n_seeds);
}

}  // namespace oco
