#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "oco/baselines.hpp"
#include "oco/instances.hpp"
#include "oracles.hpp"

using oco::FeasibleSet;
using oco::HistoryOracles;
using oco::ServerModel;
using oco::Vec;

namespace {

/// History of the 1-D linear problem with realized noise terms.
HistoryOracles one_d_history(const std::vector<double>& omegas) {
  HistoryOracles h;
  h.T = static_cast<int>(omegas.size());
  h.m = 1;
  h.loss_value = [](int, const Vec& x) { return x[0]; };
  h.loss_subgradient = [](int, const Vec&) { return Vec::Ones(1); };
  h.constraint_value = [omegas](int t, int, const Vec& x) { return 0.5 - x[0] + omegas[static_cast<size_t>(t - 1)]; };
  h.constraint_subgradient = [](int, int, const Vec&) { return Vec::Constant(1, -1.0); };
  return h;
}

}  // namespace

TEST_CASE("hindsight solve on the 1-D linear problem", "[baselines][oracle]") {
  oco::CounterRng rng(55);
  std::vector<double> omegas(400);
  for (auto& w : omegas) w = rng.uniform(-0.1, 0.1);
  const auto h = one_d_history(omegas);
  const auto set = FeasibleSet::box(Vec::Zero(1), Vec::Ones(1));

  const auto sol = oco::hindsight_solve(h, set, 1e-9);
  REQUIRE(sol.feasible);

  double grid_x = 0.0;
  const double grid_obj = oracles::grid_hindsight_1d(h, 0.0, 1.0, 1e-4, 1e-9, &grid_x);
  CHECK(sol.objective <= grid_obj + 1e-3 * h.T);
  CHECK(sol.x_star[0] == Approx(grid_x).margin(1e-3));
  CHECK(sol.x_star[0] == Approx(0.5).margin(0.05));  // mean noise is small
  CHECK(sol.empirical_constraint_means[0] <= 1e-9);
}

TEST_CASE("hindsight solve without constraints finds the minimizer", "[baselines]") {
  HistoryOracles h;
  h.T = 10;
  h.m = 0;
  h.loss_value = [](int, const Vec& x) { return (x[0] - 0.3) * (x[0] - 0.3); };
  h.loss_subgradient = [](int, const Vec& x) { return Vec::Constant(1, 2.0 * (x[0] - 0.3)); };
  const auto sol = oco::hindsight_solve(h, FeasibleSet::box(Vec::Zero(1), Vec::Ones(1)), 1e-10);
  CHECK(sol.x_star[0] == Approx(0.3).margin(1e-4));
  CHECK(sol.feasible);
}

TEST_CASE("hindsight solve matches the 2-D grid", "[baselines][oracle]") {
  const auto inst = oco::box_quadratic_2d();
  oco::CounterRng rng(77);
  std::vector<double> omegas(60);
  for (auto& w : omegas) w = rng.uniform(-0.1, 0.1);

  HistoryOracles h;
  h.T = static_cast<int>(omegas.size());
  h.m = 1;
  h.loss_value = inst.problem.loss.value;
  h.loss_subgradient = inst.problem.loss.subgradient;
  h.constraint_value = [&](int t, int k, const Vec& x) {
    return inst.problem.constraints.value(k, x, Vec::Constant(1, omegas[static_cast<size_t>(t - 1)]));
  };
  h.constraint_subgradient = [&](int t, int k, const Vec& x) {
    return inst.problem.constraints.subgradient(k, x, Vec::Constant(1, omegas[static_cast<size_t>(t - 1)]));
  };

  const auto sol = oco::hindsight_solve(h, inst.problem.set, 1e-9);
  REQUIRE(sol.feasible);
  const double grid_obj = oracles::grid_hindsight_2d(h, Vec::Zero(2), Vec::Ones(2), 1e-3, 1e-9);
  CHECK(std::abs(sol.objective - grid_obj) <= 3e-3 * h.T);
}

TEST_CASE("hindsight solve reports infeasibility after penalty escalation", "[baselines]") {
  HistoryOracles h;
  h.T = 5;
  h.m = 1;
  h.loss_value = [](int, const Vec& x) { return x[0]; };
  h.loss_subgradient = [](int, const Vec&) { return Vec::Ones(1); };
  // Constant positive constraint: no point in the box is mean-feasible.
  h.constraint_value = [](int, int, const Vec&) { return 1.0; };
  h.constraint_subgradient = [](int, int, const Vec&) { return Vec::Zero(1); };
  const auto sol = oco::hindsight_solve(h, FeasibleSet::box(Vec::Zero(1), Vec::Ones(1)), 1e-9);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.penalty_escalations == 10);
  CHECK(sol.empirical_constraint_means[0] == Approx(1.0));
}

TEST_CASE("react splits the load evenly", "[baselines][oracle]") {
  const auto fleet = oco::make_fleet(100, 10);

  SECTION("bisection matches the closed-form inverse") {
    const auto d = oco::react_policy(1000.0, fleet);
    const double want = (std::exp(2.5) - 1.0) / 4.0;  // h^{-1}(10) for h = 4 log(1 + 4x)
    for (int i = 0; i < 100; ++i) CHECK(d.power[i] == Approx(want).margin(1e-9));
    CHECK_FALSE(d.saturated);
  }

  SECTION("zero arrivals idle at minimum power") {
    const auto d = oco::react_policy(0.0, fleet);
    for (int i = 0; i < 100; ++i) CHECK(d.power[i] == 0.0);
  }

  SECTION("demand above capacity saturates every server") {
    const auto small = oco::make_fleet(3, 3);
    const auto d = oco::react_policy(1e6, small);
    CHECK(d.saturated);
    for (int i = 0; i < 3; ++i) CHECK(d.power[i] == 30.0);
  }

  SECTION("offered rates sum to the demand or the capacity") {
    for (double demand : {0.0, 150.0, 800.0, 1500.0, 5000.0}) {
      const auto d = oco::react_policy(demand, fleet);
      double total = 0.0;
      for (size_t i = 0; i < fleet.size(); ++i) total += fleet[i].rate(d.power[static_cast<Eigen::Index>(i)]);
      CHECK(total == Approx(std::min(demand, oco::fleet_capacity(fleet))).margin(1e-6));
    }
  }
}

TEST_CASE("low-power fills cheapest servers first", "[baselines]") {
  const auto fleet = oco::make_fleet(3, 3);
  const double unit = fleet[0].max_rate();

  SECTION("one server's worth of demand powers only the cheapest") {
    const Vec prices = (Vec(3) << 3.0, 1.0, 2.0).finished();
    const auto d = oco::lowpower_policy(prices, unit, fleet);
    CHECK(d.power[0] == 0.0);
    CHECK(d.power[1] == 30.0);
    CHECK(d.power[2] == 0.0);
    CHECK(d.shortfall == 0.0);
  }

  SECTION("zero demand idles everything") {
    const auto d = oco::lowpower_policy(Vec::Ones(3), 0.0, fleet);
    for (int i = 0; i < 3; ++i) CHECK(d.power[i] == 0.0);
  }

  SECTION("demand above capacity reports the shortfall") {
    const auto d = oco::lowpower_policy(Vec::Ones(3), 100.0, fleet);
    for (int i = 0; i < 3; ++i) CHECK(d.power[i] == 30.0);
    CHECK(d.shortfall == Approx(100.0 - 3 * unit));
  }

  SECTION("ties break by server index") {
    const Vec prices = Vec::Ones(3);
    const auto d = oco::lowpower_policy(prices, 1.5 * unit, fleet);
    CHECK(d.power[0] == 30.0);
    CHECK(d.power[1] == 30.0);
    CHECK(d.power[2] == 0.0);
  }

  SECTION("permuting equal-price servers only permutes the decision") {
    const Vec prices = (Vec(3) << 2.0, 2.0, 1.0).finished();
    const auto d = oco::lowpower_policy(prices, 1.5 * unit, fleet);
    // Cheapest first, then the lower-indexed of the tied pair.
    CHECK(d.power[2] == 30.0);
    CHECK(d.power[0] == 30.0);
    CHECK(d.power[1] == 0.0);
  }
}

TEST_CASE("trailing means lag by one slot and seed from the first", "[baselines]") {
  const std::vector<double> series = {10, 20, 30, 40, 50, 60, 70};
  CHECK(oco::trailing_mean(series, 1) == 10.0);  // seeded with the true first value
  CHECK(oco::trailing_mean(series, 2) == 10.0);
  CHECK(oco::trailing_mean(series, 4) == Approx(20.0));
  CHECK(oco::trailing_mean(series, 7) == Approx((20 + 30 + 40 + 50 + 60) / 5.0));
}
