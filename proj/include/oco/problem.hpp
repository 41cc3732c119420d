#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "oco/geometry.hpp"
#include "oco/rng.hpp"

namespace oco {

/// Norm and diameter bounds a problem satisfies. Estimated bounds are
/// sampled maxima inflated by 10%: valid working upper bounds for the
/// queue-size constants, not certificates.
struct ProblemBounds {
  double D1 = 0.0;                ///< loss subgradient norm bound
  double D2 = 0.0;                ///< per-constraint subgradient norm bound
  double G = 0.0;                 ///< constraint vector norm bound
  double R = 0.0;                 ///< feasible-set diameter
  std::optional<double> epsilon;  ///< Slater margin, when known
  bool estimated = false;
};

/// Per-round loss surface. value/subgradient receive the round index t and
/// a point in the feasible set. `observe`, when set, is invoked once per
/// round after the round's decision is committed and its realization drawn;
/// losses may depend on that history but can never see a realization early.
struct LossOracle {
  std::function<double(int, const Vec&)> value;
  std::function<Vec(int, const Vec&)> subgradient;
  std::function<void(int, const Vec&, const Vec&)> observe;  // (t, omega, x_t)
};

/// Stochastic constraint functions g_k(x; omega), k = 0..m-1, with a seeded
/// sampler for the i.i.d. realization stream. `mean_value` exposes the exact
/// expectations on test problems where they have closed form.
struct ConstraintOracle {
  int m = 0;
  std::function<Vec(CounterRng&)> sample;
  std::function<double(int, const Vec&, const Vec&)> value;        // g_k(x; omega)
  std::function<Vec(int, const Vec&, const Vec&)> subgradient;     // grad g_k(x; omega)
  std::function<double(int, const Vec&)> mean_value;               // optional

  static ConstraintOracle none() {
    ConstraintOracle c;
    c.m = 0;
    c.sample = [](CounterRng&) { return Vec(); };
    return c;
  }
};

struct AlgorithmParams {
  double V = 1.0;
  double alpha = 1.0;
  int horizon = 1;

  void validate() const {
    if (!(V > 0.0)) throw std::invalid_argument("params: V must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("params: alpha must be positive");
    if (horizon < 1) throw std::invalid_argument("params: horizon must be >= 1");
  }
};

/// Nonnegative virtual queue backlogs, one per constraint. Starts at zero.
struct QueueState {
  Vec q;
  static QueueState zeros(int m) { return QueueState{Vec::Zero(m)}; }
};

struct ProblemInstance {
  int n = 0;
  int m = 0;
  FeasibleSet set;
  LossOracle loss;
  ConstraintOracle constraints;
  ProblemBounds bounds;
};

/// A declared bound contradicted by an evaluated point; carries the witness.
class BoundViolation : public std::runtime_error {
 public:
  BoundViolation(std::string quantity, double observed, double declared, Vec witness, int round, int k,
                 std::uint64_t seed)
      : std::runtime_error(format(quantity, observed, declared, witness, round, k, seed)),
        quantity(std::move(quantity)),
        observed(observed),
        declared(declared),
        witness(std::move(witness)),
        round(round),
        k(k),
        seed(seed) {}

  std::string quantity;
  double observed;
  double declared;
  Vec witness;
  int round;  // -1 when found during construction-time sampling
  int k;      // constraint index, -1 when not applicable
  std::uint64_t seed;

 private:
  static std::string format(const std::string& quantity, double observed, double declared, const Vec& witness,
                            int round, int k, std::uint64_t seed) {
    std::ostringstream os;
    os << "bound violation: " << quantity << " = " << observed << " exceeds declared " << declared;
    if (round >= 0) os << " at round " << round;
    if (k >= 0) os << " (constraint " << k << ")";
    os << ", seed " << seed << ", witness x = [" << witness.transpose() << "]";
    return os.str();
  }
};

namespace detail {

struct SampledMaxima {
  double d1 = 0.0, d2 = 0.0, g = 0.0;
  Vec d1_witness, d2_witness, g_witness;
  int d2_k = -1;
};

inline SampledMaxima sample_bound_maxima(const FeasibleSet& set, const LossOracle& loss,
                                         const ConstraintOracle& constraints, int samples, std::uint64_t seed) {
  SampledMaxima mx;
  CounterRng rng(seed, 0);
  for (int i = 0; i < samples; ++i) {
    const Vec x = set.sample(rng);
    const int t = 1 + (i % samples);
    const double nf = loss.subgradient(t, x).norm();
    if (nf > mx.d1) {
      mx.d1 = nf;
      mx.d1_witness = x;
    }
    if (constraints.m > 0) {
      const Vec omega = constraints.sample(rng);
      double g_sq = 0.0;
      for (int k = 0; k < constraints.m; ++k) {
        const double gv = constraints.value(k, x, omega);
        g_sq += gv * gv;
        const double ng = constraints.subgradient(k, x, omega).norm();
        if (ng > mx.d2) {
          mx.d2 = ng;
          mx.d2_witness = x;
          mx.d2_k = k;
        }
      }
      const double gn = std::sqrt(g_sq);
      if (gn > mx.g) {
        mx.g = gn;
        mx.g_witness = x;
      }
    }
  }
  return mx;
}

}  // namespace detail

/// Assemble and validate a problem. Declared bounds are cross-checked by
/// sampling (any violated bound is reported with its witness point); absent
/// bounds are estimated from the same sampling pass and inflated by 10%.
/// R is always computed exactly from the set.
inline ProblemInstance build_problem(FeasibleSet set, LossOracle loss, ConstraintOracle constraints,
                                     std::optional<ProblemBounds> declared = std::nullopt, int samples = 1000,
                                     std::uint64_t validation_seed = 0xb0b5) {
  if (!loss.value || !loss.subgradient) throw std::invalid_argument("build_problem: loss oracle is incomplete");
  if (constraints.m < 0) throw std::invalid_argument("build_problem: negative constraint count");
  if (constraints.m > 0 && (!constraints.sample || !constraints.value || !constraints.subgradient))
    throw std::invalid_argument("build_problem: constraint oracle is incomplete");
  if (samples < 1000) samples = 1000;

  const int n = set.dimension();
  const Vec c = set.center();
  if (static_cast<int>(loss.subgradient(1, c).size()) != n)
    throw std::invalid_argument("build_problem: loss subgradient dimension mismatch");
  if (constraints.m > 0) {
    CounterRng probe(validation_seed, 1);
    const Vec omega0 = constraints.sample(probe);
    for (int k = 0; k < constraints.m; ++k)
      if (static_cast<int>(constraints.subgradient(k, c, omega0).size()) != n)
        throw std::invalid_argument("build_problem: constraint subgradient dimension mismatch");
  }

  const auto mx = detail::sample_bound_maxima(set, loss, constraints, samples, validation_seed);
  const double diam = set.diameter();

  ProblemBounds bounds;
  if (declared) {
    bounds = *declared;
    bounds.estimated = false;
    if (std::abs(bounds.R - diam) > 1e-9)
      throw std::invalid_argument("build_problem: declared R does not match the set diameter");
    const double tol = 1e-9;
    if (mx.d1 > bounds.D1 * (1.0 + tol) + 1e-12)
      throw BoundViolation("||loss subgradient||", mx.d1, bounds.D1, mx.d1_witness, -1, -1, validation_seed);
    if (constraints.m > 0) {
      if (mx.d2 > bounds.D2 * (1.0 + tol) + 1e-12)
        throw BoundViolation("||constraint subgradient||", mx.d2, bounds.D2, mx.d2_witness, -1, mx.d2_k,
                             validation_seed);
      if (mx.g > bounds.G * (1.0 + tol) + 1e-12)
        throw BoundViolation("||constraint vector||", mx.g, bounds.G, mx.g_witness, -1, -1, validation_seed);
    }
    if (bounds.epsilon) {
      if (!(*bounds.epsilon > 0.0)) throw std::invalid_argument("build_problem: epsilon must be positive");
      if (*bounds.epsilon > bounds.G) throw std::invalid_argument("build_problem: epsilon must not exceed G");
    }
  } else {
    bounds.D1 = mx.d1 * 1.1;
    bounds.D2 = mx.d2 * 1.1;
    bounds.G = mx.g * 1.1;
    bounds.R = diam;
    bounds.estimated = true;
  }

  ProblemInstance p;
  p.n = n;
  p.m = constraints.m;
  p.set = std::move(set);
  p.loss = std::move(loss);
  p.constraints = std::move(constraints);
  p.bounds = bounds;
  return p;
}

}  // namespace oco
