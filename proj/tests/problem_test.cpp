#include <catch2/catch.hpp>

#include "oco/instances.hpp"
#include "oco/problem.hpp"

using oco::BoundViolation;
using oco::ConstraintOracle;
using oco::CounterRng;
using oco::FeasibleSet;
using oco::LossOracle;
using oco::ProblemBounds;
using oco::Vec;

namespace {

LossOracle linear_loss_2d() {
  LossOracle loss;
  loss.value = [](int, const Vec& x) { return x[0] + x[1]; };
  loss.subgradient = [](int, const Vec&) { return Vec::Ones(2); };
  return loss;
}

}  // namespace

TEST_CASE("build validates declared bounds on an unconstrained box", "[core]") {
  ProblemBounds declared;
  declared.D1 = std::sqrt(2.0);
  declared.R = std::sqrt(2.0);
  const auto p = oco::build_problem(FeasibleSet::box(Vec::Zero(2), Vec::Ones(2)), linear_loss_2d(),
                                    ConstraintOracle::none(), declared);
  CHECK(p.n == 2);
  CHECK(p.m == 0);
  CHECK(p.bounds.R == Approx(std::sqrt(2.0)));
  CHECK(p.bounds.D1 == Approx(std::sqrt(2.0)));
  CHECK_FALSE(p.bounds.estimated);
}

TEST_CASE("a declared zero gradient bound is rejected with a witness", "[core]") {
  ProblemBounds declared;
  declared.D1 = 0.0;
  declared.R = std::sqrt(2.0);
  try {
    oco::build_problem(FeasibleSet::box(Vec::Zero(2), Vec::Ones(2)), linear_loss_2d(), ConstraintOracle::none(),
                       declared);
    FAIL("expected BoundViolation");
  } catch (const BoundViolation& e) {
    CHECK(e.quantity == "||loss subgradient||");
    CHECK(e.observed == Approx(std::sqrt(2.0)));
    CHECK(e.declared == 0.0);
    CHECK(e.witness.size() == 2);  // the sampled point is reported
  }
}

TEST_CASE("estimation inflates sampled maxima by ten percent", "[core]") {
  LossOracle loss;
  loss.value = [](int, const Vec& x) { return x[0]; };
  loss.subgradient = [](int, const Vec&) { return Vec::Ones(1); };
  ConstraintOracle con;
  con.m = 1;
  con.sample = [](CounterRng& rng) { return Vec::Constant(1, rng.uniform(-0.1, 0.1)); };
  con.value = [](int, const Vec& x, const Vec& w) { return 0.5 - x[0] + w[0]; };
  con.subgradient = [](int, const Vec&, const Vec&) { return Vec::Constant(1, -1.0); };

  const auto p = oco::build_problem(FeasibleSet::box(Vec::Zero(1), Vec::Ones(1)), loss, con, std::nullopt, 4000);
  CHECK(p.bounds.estimated);
  CHECK(p.bounds.D1 == Approx(1.1));              // constant unit gradient
  CHECK(p.bounds.D2 == Approx(1.1));
  CHECK(p.bounds.G <= 0.6 * 1.1 + 1e-12);         // |g| never exceeds 0.6
  CHECK(p.bounds.G >= 0.6);                       // 4000 samples get close to the sup
  CHECK(p.bounds.R == Approx(1.0));
}

TEST_CASE("declared R must equal the set diameter", "[core]") {
  ProblemBounds declared;
  declared.D1 = std::sqrt(2.0);
  declared.R = 1.0;
  CHECK_THROWS_AS(oco::build_problem(FeasibleSet::box(Vec::Zero(2), Vec::Ones(2)), linear_loss_2d(),
                                     ConstraintOracle::none(), declared),
                  std::invalid_argument);
}

TEST_CASE("epsilon must be positive and at most G", "[core]") {
  auto inst = oco::one_d_linear();  // sanity: stock instance builds
  CHECK(inst.problem.bounds.epsilon.value() == 0.5);

  ProblemBounds bad = inst.problem.bounds;
  bad.epsilon = 0.7;  // above G = 0.6
  LossOracle loss;
  loss.value = [](int, const Vec& x) { return x[0]; };
  loss.subgradient = [](int, const Vec&) { return Vec::Ones(1); };
  CHECK_THROWS_AS(
      oco::build_problem(FeasibleSet::box(Vec::Zero(1), Vec::Ones(1)), loss, inst.problem.constraints, bad),
      std::invalid_argument);
}

TEST_CASE("dimension mismatches are rejected", "[core]") {
  LossOracle loss;
  loss.value = [](int, const Vec& x) { return x[0]; };
  loss.subgradient = [](int, const Vec&) { return Vec::Ones(3); };  // wrong size
  CHECK_THROWS_AS(
      oco::build_problem(FeasibleSet::box(Vec::Zero(2), Vec::Ones(2)), loss, ConstraintOracle::none(), std::nullopt),
      std::invalid_argument);
}

TEST_CASE("subgradient inequality holds for stock oracles", "[core][property]") {
  const auto check_instance = [](const oco::StockInstance& inst, std::uint64_t seed) {
    CounterRng rng(seed);
    for (int trial = 0; trial < 2500; ++trial) {
      const int t = 1 + static_cast<int>(rng.uniform() * 50.0);
      const Vec x = inst.problem.set.sample(rng);
      const Vec y = inst.problem.set.sample(rng);
      const double fx = inst.problem.loss.value(t, x);
      const double fy = inst.problem.loss.value(t, y);
      const Vec gx = inst.problem.loss.subgradient(t, x);
      REQUIRE(fy >= fx + gx.dot(y - x) - 1e-9);
      if (inst.problem.m > 0) {
        CounterRng wrng(seed + 17, static_cast<std::uint64_t>(trial));
        const Vec w = inst.problem.constraints.sample(wrng);
        for (int k = 0; k < inst.problem.m; ++k) {
          const double gkx = inst.problem.constraints.value(k, x, w);
          const double gky = inst.problem.constraints.value(k, y, w);
          const Vec sub = inst.problem.constraints.subgradient(k, x, w);
          REQUIRE(gky >= gkx + sub.dot(y - x) - 1e-9);
        }
      }
    }
  };
  check_instance(oco::one_d_linear(), 11);
  check_instance(oco::quadratic_simplex(), 12);
  check_instance(oco::box_quadratic_2d(), 13);
  check_instance(oco::deterministic_lp(), 14);
}

TEST_CASE("equal seeds give identical realization streams", "[core][property]") {
  const auto inst = oco::one_d_linear();
  for (std::uint64_t seed : {7ull, 1234567ull}) {
    for (int t = 1; t <= 10000; ++t) {
      CounterRng a(seed, static_cast<std::uint64_t>(t));
      CounterRng b(seed, static_cast<std::uint64_t>(t));
      const Vec wa = inst.problem.constraints.sample(a);
      const Vec wb = inst.problem.constraints.sample(b);
      REQUIRE(wa[0] == wb[0]);
    }
  }
}

TEST_CASE("distinct seeds decorrelate the stream", "[core]") {
  const auto inst = oco::one_d_linear();
  int equal = 0;
  for (int t = 1; t <= 1000; ++t) {
    CounterRng a(1, static_cast<std::uint64_t>(t));
    CounterRng b(2, static_cast<std::uint64_t>(t));
    if (inst.problem.constraints.sample(a)[0] == inst.problem.constraints.sample(b)[0]) ++equal;
  }
  CHECK(equal < 5);
}
