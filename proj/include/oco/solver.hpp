#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oco/problem.hpp"

namespace oco {

/// What a round reveals once the decision is committed: the loss subgradient
/// at x(t), the realized constraint values g_k(x(t)), and their subgradients
/// (one row per constraint).
struct StepFeedback {
  Vec loss_subgradient;
  Vec constraint_values;
  Mat constraint_subgradients;  // m x n
};

struct TrajectoryRecord {
  Vec x;          ///< decision x(t)
  Vec queue;      ///< queue backlogs Q(t)
  double loss;    ///< f^t(x(t))
  Vec g;          ///< realized constraint values g^t(x(t))
  Vec omega;      ///< realization parameters drawn for the round
  Vec loss_grad;  ///< loss subgradient at x(t)
  Mat g_grad;     ///< constraint subgradients at x(t), m x n
};

/// Full record of a run: one entry per round plus the decision and queue the
/// final update produced. Everything the per-round inequality checkers need
/// is recorded, so trajectories can be audited standalone.
struct Trajectory {
  std::vector<TrajectoryRecord> rounds;
  Vec final_x;      ///< x(T+1)
  Vec final_queue;  ///< Q(T+1)

  int m = 0;
  ProblemBounds bounds;
  AlgorithmParams params;
  std::uint64_t seed = 0;

  int T() const { return static_cast<int>(rounds.size()); }

  /// x(t+1) - x(t) for t in 1..T; the last round uses final_x.
  Vec displacement(int t) const {
    const Vec& next = (t < T()) ? rounds[static_cast<size_t>(t)].x : final_x;
    return next - rounds[static_cast<size_t>(t - 1)].x;
  }

  /// Q(t) for t in 1..T+1.
  const Vec& queue_at(int t) const {
    return (t <= T()) ? rounds[static_cast<size_t>(t - 1)].queue : final_queue;
  }
};

/// Descent direction d(t) = V * grad f + sum_k Q_k * grad g_k.
inline Vec dpp_direction(const StepFeedback& fb, const QueueState& queue, const AlgorithmParams& params) {
  if (queue.q.size() != fb.constraint_subgradients.rows())
    throw std::invalid_argument("dpp_direction: queue/constraint dimension mismatch");
  Vec d = params.V * fb.loss_subgradient;
  for (int k = 0; k < queue.q.size(); ++k) d += queue.q[k] * fb.constraint_subgradients.row(k).transpose();
  return d;
}

/// The gradient step length the queue-free update reduces to: V / (2 alpha),
/// evaluated exactly as dpp_step evaluates it.
inline double ogd_gamma(const AlgorithmParams& params) { return params.V * (0.5 / params.alpha); }

/// Projected gradient step x+ = P[x - gamma * grad f].
inline Vec ogd_step(const Vec& x, const Vec& loss_subgradient, double gamma, const FeasibleSet& set) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ogd_step: gamma must be positive");
  return set.project(x - gamma * loss_subgradient);
}

/// The queue-weighted proximal update: minimizes
///   V*gf'(x-xt) + sum_k Q_k*gg_k'(x-xt) + alpha*||x-xt||^2
/// over the set, i.e. the projection of x - d(t)/(2 alpha). The terms are
/// accumulated so that with no constraints the arithmetic is identical,
/// operation for operation, to ogd_step with gamma = ogd_gamma(params).
inline Vec dpp_step(const Vec& x, const StepFeedback& fb, const QueueState& queue, const AlgorithmParams& params,
                    const FeasibleSet& set) {
  if (queue.q.size() != fb.constraint_subgradients.rows())
    throw std::invalid_argument("dpp_step: queue/constraint dimension mismatch");
  const double inv_two_alpha = 0.5 / params.alpha;
  Vec target = x - (params.V * inv_two_alpha) * fb.loss_subgradient;
  for (int k = 0; k < queue.q.size(); ++k)
    target -= (queue.q[k] * inv_two_alpha) * fb.constraint_subgradients.row(k).transpose();
  return set.project(target);
}

/// Queue update Q_k+ = max{Q_k + g_k + gg_k' * displacement, 0}. The max
/// already guarantees nonnegativity; no epsilon floor is applied.
inline QueueState queue_update(const QueueState& queue, const Vec& constraint_values,
                               const Mat& constraint_subgradients, const Vec& displacement) {
  const int m = static_cast<int>(queue.q.size());
  if (constraint_values.size() != m || constraint_subgradients.rows() != m)
    throw std::invalid_argument("queue_update: dimension mismatch");
  QueueState next;
  next.q.resize(m);
  for (int k = 0; k < m; ++k) {
    const double drift = constraint_values[k] + constraint_subgradients.row(k).dot(displacement);
    next.q[k] = std::max(queue.q[k] + drift, 0.0);
  }
  return next;
}

/// The horizon-aware schedule V = sqrt(T), alpha = T.
inline AlgorithmParams default_params(int T) {
  if (T < 1) throw std::invalid_argument("default_params: T must be >= 1");
  return AlgorithmParams{std::sqrt(static_cast<double>(T)), static_cast<double>(T), T};
}

namespace detail {

inline void validate_feedback(const StepFeedback& fb, const ProblemBounds& bounds, const Vec& x, int t,
                              std::uint64_t seed) {
  const double rel = 1.0 + 1e-9;
  const double nf = fb.loss_subgradient.norm();
  if (nf > bounds.D1 * rel + 1e-12)
    throw BoundViolation("||loss subgradient||", nf, bounds.D1, x, t, -1, seed);
  const int m = static_cast<int>(fb.constraint_values.size());
  if (m > 0) {
    for (int k = 0; k < m; ++k) {
      const double ng = fb.constraint_subgradients.row(k).norm();
      if (ng > bounds.D2 * rel + 1e-12)
        throw BoundViolation("||constraint subgradient||", ng, bounds.D2, x, t, k, seed);
    }
    const double gn = fb.constraint_values.norm();
    if (gn > bounds.G * rel + 1e-12) throw BoundViolation("||constraint vector||", gn, bounds.G, x, t, -1, seed);
  }
}

/// Shared round loop. The information order is fixed here: x(t) is committed,
/// then omega(t) is drawn, then the round's functions are evaluated at x(t).
/// Oracles never see realizations for rounds that have not happened.
template <class StepFn>
Trajectory run_rounds(const ProblemInstance& p, const AlgorithmParams& params, std::uint64_t seed, StepFn&& step) {
  params.validate();
  Trajectory traj;
  traj.m = p.m;
  traj.bounds = p.bounds;
  traj.params = params;
  traj.seed = seed;
  traj.rounds.reserve(static_cast<size_t>(params.horizon));

  Vec x = p.set.center();
  QueueState queue = QueueState::zeros(p.m);

  for (int t = 1; t <= params.horizon; ++t) {
    try {
      CounterRng rng(seed, static_cast<std::uint64_t>(t));
      const Vec omega = p.constraints.sample ? p.constraints.sample(rng) : Vec();
      if (p.loss.observe) p.loss.observe(t, omega, x);

      StepFeedback fb;
      fb.loss_subgradient = p.loss.subgradient(t, x);
      fb.constraint_values.resize(p.m);
      fb.constraint_subgradients.resize(p.m, p.n);
      for (int k = 0; k < p.m; ++k) {
        fb.constraint_values[k] = p.constraints.value(k, x, omega);
        fb.constraint_subgradients.row(k) = p.constraints.subgradient(k, x, omega);
      }
      validate_feedback(fb, p.bounds, x, t, seed);

      TrajectoryRecord rec;
      rec.x = x;
      rec.queue = queue.q;
      rec.loss = p.loss.value(t, x);
      rec.g = fb.constraint_values;
      rec.omega = omega;
      rec.loss_grad = fb.loss_subgradient;
      rec.g_grad = fb.constraint_subgradients;
      traj.rounds.push_back(std::move(rec));

      Vec x_next = step(x, fb, queue);
      queue = queue_update(queue, fb.constraint_values, fb.constraint_subgradients, x_next - x);
      x = std::move(x_next);
    } catch (const BoundViolation&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("oracle failure at round " + std::to_string(t) + ", seed " + std::to_string(seed) +
                               ": " + e.what());
    }
  }
  traj.final_x = x;
  traj.final_queue = queue.q;
  return traj;
}

}  // namespace detail

/// Run the queue-based algorithm for params.horizon rounds. x(1) is the
/// set's canonical center; the queue starts at zero. Aborts with the
/// witness if an oracle ever exceeds its declared bounds.
inline Trajectory run(const ProblemInstance& p, const AlgorithmParams& params, std::uint64_t seed) {
  return detail::run_rounds(p, params, seed,
                            [&](const Vec& x, const StepFeedback& fb, const QueueState& q) {
                              return dpp_step(x, fb, q, params, p.set);
                            });
}

/// Run plain projected gradient descent with step gamma over the same round
/// loop (constraints are observed and recorded but ignored by the update).
inline Trajectory run_ogd(const ProblemInstance& p, double gamma, int horizon, std::uint64_t seed) {
  AlgorithmParams params;
  params.V = 2.0 * gamma;  // bookkeeping only; the step uses gamma directly
  params.alpha = 1.0;
  params.horizon = horizon;
  return detail::run_rounds(p, params, seed,
                            [&](const Vec& x, const StepFeedback& fb, const QueueState&) {
                              return ogd_step(x, fb.loss_subgradient, gamma, p.set);
                            });
}

}  // namespace oco
