#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "oco/datacenter.hpp"
#include "oco/problem.hpp"

namespace oco {

/// A ready-made test problem with its Slater point and margin, used by the
/// verification suite and the convergence studies.
struct StockInstance {
  std::string name;
  ProblemInstance problem;
  Vec slater_point;
  double epsilon = 0.0;
  std::function<double(const Vec&)> mean_constraint0;  ///< closed-form expectation of g_0
};

/// x in [0,1], f^t(x) = x, g(x; w) = 0.5 - x + w with w uniform on
/// [-0.1, 0.1]. The expectation-feasible optimum is x* = 0.5.
inline StockInstance one_d_linear(std::optional<double> override_d2 = std::nullopt) {
  LossOracle loss;
  loss.value = [](int, const Vec& x) { return x[0]; };
  loss.subgradient = [](int, const Vec&) { return Vec::Ones(1); };

  ConstraintOracle con;
  con.m = 1;
  con.sample = [](CounterRng& rng) {
    Vec w(1);
    w[0] = rng.uniform(-0.1, 0.1);
    return w;
  };
  con.value = [](int, const Vec& x, const Vec& w) { return 0.5 - x[0] + w[0]; };
  con.subgradient = [](int, const Vec&, const Vec&) { return Vec::Constant(1, -1.0); };
  con.mean_value = [](int, const Vec& x) { return 0.5 - x[0]; };

  ProblemBounds bounds;
  bounds.D1 = 1.0;
  bounds.D2 = override_d2.value_or(1.0);
  bounds.G = 0.6;
  bounds.R = 1.0;
  bounds.epsilon = 0.5;

  StockInstance inst;
  inst.name = "one_d_linear";
  inst.problem = build_problem(FeasibleSet::box(Vec::Zero(1), Vec::Ones(1)), loss, con, bounds);
  inst.slater_point = Vec::Ones(1);
  inst.epsilon = 0.5;
  inst.mean_constraint0 = [](const Vec& x) { return 0.5 - x[0]; };
  return inst;
}

/// Simplex {x >= 0, x_0 + x_1 = 1} with an alternating quadratic loss
/// ||x - a(t)||^2, a(t) in {(0.8, 0.1), (0.1, 0.8)}, and stochastic
/// constraint g(x; w) = x_0 - 0.6 + w, w uniform on [-0.1, 0.1].
inline StockInstance quadratic_simplex() {
  const Vec a_odd = (Vec(2) << 0.8, 0.1).finished();
  const Vec a_even = (Vec(2) << 0.1, 0.8).finished();

  LossOracle loss;
  loss.value = [a_odd, a_even](int t, const Vec& x) {
    return (x - (t % 2 ? a_odd : a_even)).squaredNorm();
  };
  loss.subgradient = [a_odd, a_even](int t, const Vec& x) {
    return Vec(2.0 * (x - (t % 2 ? a_odd : a_even)));
  };

  ConstraintOracle con;
  con.m = 1;
  con.sample = [](CounterRng& rng) {
    Vec w(1);
    w[0] = rng.uniform(-0.1, 0.1);
    return w;
  };
  con.value = [](int, const Vec& x, const Vec& w) { return x[0] - 0.6 + w[0]; };
  con.subgradient = [](int, const Vec&, const Vec&) {
    Vec g(2);
    g << 1.0, 0.0;
    return g;
  };
  con.mean_value = [](int, const Vec& x) { return x[0] - 0.6; };

  ProblemBounds bounds;
  bounds.D1 = 2.0 * std::sqrt(1.45) + 1e-9;  // farthest vertex-to-target distance
  bounds.D2 = 1.0;
  bounds.G = 0.7;
  bounds.R = std::sqrt(2.0);
  bounds.epsilon = 0.5;

  StockInstance inst;
  inst.name = "quadratic_simplex";
  inst.problem = build_problem(FeasibleSet::simplex(2, 1.0), loss, con, bounds);
  inst.slater_point = (Vec(2) << 0.0, 1.0).finished();
  inst.epsilon = 0.5;
  inst.mean_constraint0 = [](const Vec& x) { return x[0] - 0.6; };
  return inst;
}

/// Box [0,1]^2 with fixed quadratic loss (x0-0.7)^2 + 0.5 (x1-0.2)^2 and
/// stochastic constraint g(x; w) = 1.2 - x0 - x1 + w. The
/// expectation-feasible optimum is x* = (0.8, 0.4) with value 0.03.
inline StockInstance box_quadratic_2d() {
  LossOracle loss;
  loss.value = [](int, const Vec& x) {
    const double a = x[0] - 0.7, b = x[1] - 0.2;
    return a * a + 0.5 * b * b;
  };
  loss.subgradient = [](int, const Vec& x) {
    Vec g(2);
    g << 2.0 * (x[0] - 0.7), x[1] - 0.2;
    return g;
  };

  ConstraintOracle con;
  con.m = 1;
  con.sample = [](CounterRng& rng) {
    Vec w(1);
    w[0] = rng.uniform(-0.1, 0.1);
    return w;
  };
  con.value = [](int, const Vec& x, const Vec& w) { return 1.2 - x[0] - x[1] + w[0]; };
  con.subgradient = [](int, const Vec&, const Vec&) { return Vec::Constant(2, -1.0); };
  con.mean_value = [](int, const Vec& x) { return 1.2 - x[0] - x[1]; };

  ProblemBounds bounds;
  bounds.D1 = std::sqrt(1.96 + 0.64) + 1e-9;  // attained at the corner (0, 1)
  bounds.D2 = std::sqrt(2.0);
  bounds.G = 1.3;
  bounds.R = std::sqrt(2.0);
  bounds.epsilon = 0.5;

  StockInstance inst;
  inst.name = "box_quadratic_2d";
  inst.problem = build_problem(FeasibleSet::box(Vec::Zero(2), Vec::Ones(2)), loss, con, bounds);
  inst.slater_point = Vec::Ones(2);
  inst.epsilon = 0.5;
  inst.mean_constraint0 = [](const Vec& x) { return 1.2 - x[0] - x[1]; };
  return inst;
}

/// Unconstrained (m = 0) linear problem on [0,1]^2; exercises the plain
/// gradient-descent reduction.
inline StockInstance box_linear_unconstrained() {
  LossOracle loss;
  loss.value = [](int, const Vec& x) { return x[0] + x[1]; };
  loss.subgradient = [](int, const Vec&) { return Vec::Ones(2); };

  ProblemBounds bounds;
  bounds.D1 = std::sqrt(2.0);
  bounds.D2 = 0.0;
  bounds.G = 0.0;
  bounds.R = std::sqrt(2.0);

  StockInstance inst;
  inst.name = "box_linear_unconstrained";
  inst.problem = build_problem(FeasibleSet::box(Vec::Zero(2), Vec::Ones(2)), loss, ConstraintOracle::none(), bounds);
  inst.slater_point = Vec::Zero(2);
  inst.epsilon = 0.0;
  return inst;
}

/// Deterministic linear program: min x0 + x1 over [0,5]^2 subject to
/// 1 - x0 - x1 <= 0; optimum value 1 on the constraint boundary. Used for
/// the averaged-iterate convergence study.
inline StockInstance deterministic_lp() {
  LossOracle loss;
  loss.value = [](int, const Vec& x) { return x[0] + x[1]; };
  loss.subgradient = [](int, const Vec&) { return Vec::Ones(2); };

  ConstraintOracle con;
  con.m = 1;
  con.sample = [](CounterRng&) { return Vec::Zero(1); };
  con.value = [](int, const Vec& x, const Vec&) { return 1.0 - x[0] - x[1]; };
  con.subgradient = [](int, const Vec&, const Vec&) { return Vec::Constant(2, -1.0); };
  con.mean_value = [](int, const Vec& x) { return 1.0 - x[0] - x[1]; };

  ProblemBounds bounds;
  bounds.D1 = std::sqrt(2.0);
  bounds.D2 = std::sqrt(2.0);
  bounds.G = 9.0;  // |1 - x0 - x1| peaks at (5,5)
  bounds.R = 5.0 * std::sqrt(2.0);
  bounds.epsilon = 1.0;

  StockInstance inst;
  inst.name = "deterministic_lp";
  inst.problem = build_problem(FeasibleSet::box(Vec::Zero(2), Vec::Constant(2, 5.0)), loss, con, bounds);
  inst.slater_point = Vec::Constant(2, 5.0);
  inst.epsilon = 1.0;
  inst.mean_constraint0 = [](const Vec& x) { return 1.0 - x[0] - x[1]; };
  return inst;
}

/// The desk-scale scheduling instance built from the default synthetic trace.
inline StockInstance datacenter_desk() {
  const ExperimentConfig cfg = desk_config();
  const PriceTrace trace = synth_price_trace(cfg.n_zones, cfg.horizon, cfg.trace_seed, cfg.synth);
  StockInstance inst;
  inst.name = "datacenter_desk";
  inst.problem = build_datacenter_problem(cfg, trace);
  inst.slater_point = Vec::Constant(cfg.n_servers, cfg.server.x_max);
  inst.epsilon = inst.problem.bounds.epsilon.value_or(0.0);
  const double lambda = cfg.arrival_mean;
  auto fleet = make_fleet(cfg.n_servers, cfg.n_zones, cfg.server);
  inst.mean_constraint0 = [fleet, lambda](const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += fleet[static_cast<size_t>(i)].rate(x[i]);
    return lambda - s;
  };
  return inst;
}

}  // namespace oco
