#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "oco/baselines.hpp"
#include "oco/solver.hpp"

namespace oco {

// ============================================================================
// Price traces
// ============================================================================

/// Electricity prices per zone and slot ($/power-unit/slot, 5-minute slots).
struct PriceTrace {
  Mat prices;  // zones x slots
  double slot_minutes = 5.0;

  int zones() const { return static_cast<int>(prices.rows()); }
  int slots() const { return static_cast<int>(prices.cols()); }
};

/// Shape of the synthetic price generator: a daily sinusoid (288 five-minute
/// slots per day) with a per-zone phase, plus rare exponential spikes.
struct SynthPriceSpec {
  double base = 1.0;
  double daily_amplitude = 0.5;
  double spike_prob = 0.01;
  double spike_scale = 3.0;
};

/// Deterministic synthetic stand-in for a real price feed:
///   price(z,t) = base * (1 + amplitude * sin(2 pi t / 288 + phase_z)) + spike,
/// clipped at zero. Same seed, same trace. Zone phases are spread uniformly
/// around the day so every slot sees the full cross-zone price dispersion;
/// the seed drives the spikes.
inline PriceTrace synth_price_trace(int zones, int slots, std::uint64_t seed, const SynthPriceSpec& spec) {
  if (zones < 1 || slots < 1) throw std::invalid_argument("synth_price_trace: need zones >= 1 and slots >= 1");
  if (!(spec.spike_prob >= 0.0 && spec.spike_prob <= 1.0))
    throw std::invalid_argument("synth_price_trace: spike_prob must lie in [0,1]");
  if (spec.base < 0.0 || spec.daily_amplitude < 0.0 || spec.spike_scale < 0.0)
    throw std::invalid_argument("synth_price_trace: base, amplitude and spike_scale must be nonnegative");

  constexpr double two_pi = 6.283185307179586477;
  CounterRng rng(seed, 0);
  std::vector<double> phase(static_cast<size_t>(zones));
  for (int z = 0; z < zones; ++z) phase[static_cast<size_t>(z)] = two_pi * z / static_cast<double>(zones);

  PriceTrace trace;
  trace.prices.resize(zones, slots);
  for (int z = 0; z < zones; ++z) {
    for (int t = 0; t < slots; ++t) {
      double p = spec.base * (1.0 + spec.daily_amplitude * std::sin(two_pi * t / 288.0 + phase[static_cast<size_t>(z)]));
      if (spec.spike_prob > 0.0 && rng.uniform() < spec.spike_prob)
        p += spec.spike_scale * spec.base * (-std::log1p(-rng.uniform()));
      trace.prices(z, t) = std::max(p, 0.0);
    }
  }
  return trace;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_price(const std::string& cell, int line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::runtime_error("price trace: malformed value '" + cell + "' at line " + std::to_string(line_no));
  if (v < 0.0) throw std::runtime_error("price trace: negative price at line " + std::to_string(line_no));
  return v;
}

}  // namespace detail

/// CSV schema: header `slot,zone_0,...,zone_{Z-1}`, one row per slot.
/// Values are written shortest-round-trip, so a save/load cycle is
/// bit-identical.
inline void save_price_trace(const std::string& path, const PriceTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("price trace: cannot open '" + path + "' for writing");
  out << "slot";
  for (int z = 0; z < trace.zones(); ++z) out << ",zone_" << z;
  out << "\n";
  for (int t = 0; t < trace.slots(); ++t) {
    out << t;
    for (int z = 0; z < trace.zones(); ++z) out << "," << detail::format_double(trace.prices(z, t));
    out << "\n";
  }
  if (!out) throw std::runtime_error("price trace: write failed for '" + path + "'");
}

inline PriceTrace load_price_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("price trace: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("price trace: empty file '" + path + "'");
  int zones = 0;
  {
    std::stringstream header(line);
    std::string col;
    if (!std::getline(header, col, ',') || col != "slot")
      throw std::runtime_error("price trace: header must start with 'slot'");
    while (std::getline(header, col, ',')) {
      if (col != "zone_" + std::to_string(zones))
        throw std::runtime_error("price trace: expected column 'zone_" + std::to_string(zones) + "', got '" + col + "'");
      ++zones;
    }
    if (zones == 0) throw std::runtime_error("price trace: no zone columns");
  }

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        first = false;  // slot index column; ordering is positional
        continue;
      }
      row.push_back(detail::parse_price(cell, line_no));
    }
    if (static_cast<int>(row.size()) != zones)
      throw std::runtime_error("price trace: ragged row at line " + std::to_string(line_no) + " (" +
                               std::to_string(row.size()) + " of " + std::to_string(zones) + " prices)");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("price trace: no data rows in '" + path + "'");

  PriceTrace trace;
  trace.prices.resize(zones, static_cast<int>(rows.size()));
  for (int t = 0; t < static_cast<int>(rows.size()); ++t)
    for (int z = 0; z < zones; ++z) trace.prices(z, t) = rows[static_cast<size_t>(t)][static_cast<size_t>(z)];
  return trace;
}

// ============================================================================
// Experiment configuration
// ============================================================================

enum class Policy { Proposed, Hindsight, React, LowPower };

inline std::string policy_name(Policy p) {
  switch (p) {
    case Policy::Proposed: return "proposed";
    case Policy::Hindsight: return "hindsight";
    case Policy::React: return "react";
    case Policy::LowPower: return "lowpower";
  }
  return "?";
}

inline Policy parse_policy(const std::string& name) {
  if (name == "proposed") return Policy::Proposed;
  if (name == "hindsight") return Policy::Hindsight;
  if (name == "react") return Policy::React;
  if (name == "lowpower" || name == "low-power") return Policy::LowPower;
  throw std::invalid_argument("unknown policy '" + name + "'");
}

struct ExperimentConfig {
  int n_servers = 100;
  int n_zones = 10;
  int horizon = 2160;
  double arrival_mean = 1000.0;

  std::string trace_path;        ///< CSV path; empty selects the synthetic generator
  SynthPriceSpec synth;
  std::uint64_t trace_seed = 9001;

  std::vector<Policy> policies = {Policy::Proposed, Policy::Hindsight, Policy::React, Policy::LowPower};
  std::optional<AlgorithmParams> params;  ///< default: V = sqrt(T), alpha = T
  std::uint64_t seed = 1;
  ServerModel server;  ///< prototype applied to every server

  void validate() const {
    if (n_servers < 1 || n_zones < 1 || n_servers % n_zones != 0)
      throw std::invalid_argument("experiment: server count must be a positive multiple of the zone count");
    if (horizon < 1) throw std::invalid_argument("experiment: horizon must be >= 1");
    if (arrival_mean < 0.0) throw std::invalid_argument("experiment: arrival mean must be nonnegative");
    server.validate();
  }

  AlgorithmParams resolved_params() const {
    if (params) {
      AlgorithmParams p = *params;
      p.horizon = horizon;
      return p;
    }
    return default_params(horizon);
  }
};

/// CI-sized default: one server per zone with a synthetic trace at ~70% of
/// fleet capacity. The solver parameters are tuned for this short horizon;
/// the sqrt(T)/T schedule is geared to asymptotics and adapts too slowly to
/// be interesting over 2160 slots at this scale.
inline ExperimentConfig desk_config() {
  ExperimentConfig cfg;
  cfg.n_servers = 10;
  cfg.n_zones = 10;
  cfg.horizon = 2160;
  cfg.arrival_mean = 135.0;
  cfg.synth = SynthPriceSpec{1.0, 0.95, 0.01, 3.0};
  cfg.trace_seed = 9001;
  cfg.params = AlgorithmParams{2.6, 5.2, cfg.horizon};
  return cfg;
}

// ============================================================================
// Problem construction
// ============================================================================

/// Arrivals are Poisson draws truncated at a ~12-sigma quantile so the
/// constraint magnitude bound G is finite and honest.
inline double arrival_cap(double mean) { return std::ceil(mean + 12.0 * std::sqrt(mean) + 12.0); }

/// The scheduling problem as an online instance over the power box:
///   loss  f^t(x) = c(t) . x          (c from the trace, per server zone)
///   g^t(x)       = omega(t) - sum_i h_i(x_i),   m = 1.
/// Bounds are derived from the trace and the service curves.
inline ProblemInstance build_datacenter_problem(const ExperimentConfig& config, const PriceTrace& trace) {
  config.validate();
  if (trace.slots() < config.horizon)
    throw std::invalid_argument("datacenter: trace covers " + std::to_string(trace.slots()) + " slots, need " +
                                std::to_string(config.horizon));
  if (trace.zones() != config.n_zones)
    throw std::invalid_argument("datacenter: trace has " + std::to_string(trace.zones()) + " zones, config says " +
                                std::to_string(config.n_zones));

  const auto fleet = make_fleet(config.n_servers, config.n_zones, config.server);
  const int n = config.n_servers;

  Vec lower(n), upper(n);
  for (int i = 0; i < n; ++i) {
    lower[i] = fleet[static_cast<size_t>(i)].x_min;
    upper[i] = fleet[static_cast<size_t>(i)].x_max;
  }
  FeasibleSet set = FeasibleSet::box(lower, upper);

  // Per-slot price vectors, expanded from zones to servers once.
  auto prices = std::make_shared<std::vector<Vec>>();
  prices->reserve(static_cast<size_t>(config.horizon));
  for (int t = 0; t < config.horizon; ++t) {
    Vec c(n);
    for (int i = 0; i < n; ++i) c[i] = trace.prices(fleet[static_cast<size_t>(i)].zone, t);
    prices->push_back(std::move(c));
  }

  LossOracle loss;
  loss.value = [prices](int t, const Vec& x) { return (*prices)[static_cast<size_t>(t - 1)].dot(x); };
  loss.subgradient = [prices](int t, const Vec&) { return (*prices)[static_cast<size_t>(t - 1)]; };

  auto servers = std::make_shared<std::vector<ServerModel>>(fleet);
  const double lambda = config.arrival_mean;
  const double cap = arrival_cap(lambda);

  ConstraintOracle constraints;
  constraints.m = 1;
  constraints.sample = [lambda, cap](CounterRng& rng) {
    Vec w(1);
    w[0] = std::min(static_cast<double>(rng.poisson(lambda)), cap);
    return w;
  };
  constraints.value = [servers](int, const Vec& x, const Vec& omega) {
    double service = 0.0;
    for (int i = 0; i < x.size(); ++i) service += (*servers)[static_cast<size_t>(i)].rate(x[i]);
    return omega[0] - service;
  };
  constraints.subgradient = [servers](int, const Vec& x, const Vec&) {
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i) g[i] = -(*servers)[static_cast<size_t>(i)].rate_slope(x[i]);
    return g;
  };
  constraints.mean_value = [servers, lambda](int, const Vec& x) {
    double service = 0.0;
    for (int i = 0; i < x.size(); ++i) service += (*servers)[static_cast<size_t>(i)].rate(x[i]);
    return lambda - service;
  };

  ProblemBounds bounds;
  double d1 = 0.0;
  for (const Vec& c : *prices) d1 = std::max(d1, c.norm());
  bounds.D1 = d1;
  double d2_sq = 0.0;
  for (const auto& s : fleet) d2_sq += s.rate_slope(s.x_min) * s.rate_slope(s.x_min);
  bounds.D2 = std::sqrt(d2_sq);  // slope is maximal at minimum power
  const double capacity = fleet_capacity(fleet);
  bounds.G = std::max(cap - 0.0, capacity);  // |omega - service| within [ -capacity, cap ]
  bounds.R = set.diameter();
  if (capacity > lambda) bounds.epsilon = capacity - lambda;  // Slater point: every server at x_max

  ProblemInstance p;
  p.n = n;
  p.m = 1;
  p.set = std::move(set);
  p.loss = std::move(loss);
  p.constraints = std::move(constraints);
  p.bounds = bounds;
  return p;
}

// ============================================================================
// Experiment driver
// ============================================================================

struct PolicySeries {
  std::string policy;
  std::vector<double> cost;         ///< per-slot electricity cost
  std::vector<double> backlog;      ///< unserved-jobs backlog after each slot
  std::vector<double> cost_avg;     ///< running average of cost
  std::vector<double> backlog_avg;  ///< running average of backlog
  double total_cost = 0.0;
  double final_backlog = 0.0;
  double final_backlog_avg = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::vector<double> arrivals;  ///< realized omega(t)
  std::vector<PolicySeries> policies;

  const PolicySeries& series(Policy p) const {
    for (const auto& s : policies)
      if (s.policy == policy_name(p)) return s;
    throw std::invalid_argument("experiment result has no '" + policy_name(p) + "' series");
  }
};

namespace detail {

/// Backlog recurrence and running averages from per-slot cost and net load
/// (arrivals minus offered service).
inline PolicySeries finalize_series(std::string name, std::vector<double> cost, const std::vector<double>& net_load) {
  PolicySeries s;
  s.policy = std::move(name);
  s.cost = std::move(cost);
  const size_t T = s.cost.size();
  s.backlog.resize(T);
  s.cost_avg.resize(T);
  s.backlog_avg.resize(T);
  double backlog = 0.0, cost_sum = 0.0, backlog_sum = 0.0;
  for (size_t t = 0; t < T; ++t) {
    backlog = std::max(backlog + net_load[t], 0.0);
    s.backlog[t] = backlog;
    cost_sum += s.cost[t];
    backlog_sum += backlog;
    s.cost_avg[t] = cost_sum / static_cast<double>(t + 1);
    s.backlog_avg[t] = backlog_sum / static_cast<double>(t + 1);
  }
  s.total_cost = cost_sum;
  s.final_backlog = T ? s.backlog.back() : 0.0;
  s.final_backlog_avg = T ? s.backlog_avg.back() : 0.0;
  return s;
}

}  // namespace detail

/// Run the configured policies over one realized arrival sequence. All
/// policies see the same prices and the same arrivals for the given seed;
/// arrivals are revealed only at the end of each slot, so the estimator
/// baselines work from trailing means (seeded with the true first slot).
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const PriceTrace trace = config.trace_path.empty()
                               ? synth_price_trace(config.n_zones, config.horizon, config.trace_seed, config.synth)
                               : load_price_trace(config.trace_path);
  const ProblemInstance problem = build_datacenter_problem(config, trace);
  const AlgorithmParams params = config.resolved_params();
  const auto fleet = make_fleet(config.n_servers, config.n_zones, config.server);
  const int T = config.horizon;
  const int n = config.n_servers;

  // One arrival sequence per seed, shared by every policy; drawn exactly as
  // the solver's round loop draws it.
  std::vector<double> arrivals(static_cast<size_t>(T));
  for (int t = 1; t <= T; ++t) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(t));
    arrivals[static_cast<size_t>(t - 1)] = problem.constraints.sample(rng)[0];
  }

  const auto price_at = [&](int t, int i) {
    return trace.prices(fleet[static_cast<size_t>(i)].zone, t - 1);
  };
  const auto slot_cost = [&](int t, const Vec& x) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += price_at(t, i) * x[i];
    return c;
  };
  const auto offered_service = [&](const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += fleet[static_cast<size_t>(i)].rate(x[i]);
    return s;
  };

  ExperimentResult result;
  result.config = config;
  result.seed = config.seed;
  result.arrivals = arrivals;

  for (Policy policy : config.policies) {
    std::vector<double> cost(static_cast<size_t>(T));
    std::vector<double> net(static_cast<size_t>(T));
    switch (policy) {
      case Policy::Proposed: {
        const Trajectory traj = run(problem, params, config.seed);
        for (int t = 1; t <= T; ++t) {
          cost[static_cast<size_t>(t - 1)] = traj.rounds[static_cast<size_t>(t - 1)].loss;
          net[static_cast<size_t>(t - 1)] = traj.rounds[static_cast<size_t>(t - 1)].g[0];
        }
        break;
      }
      case Policy::Hindsight: {
        HistoryOracles h;
        h.T = T;
        h.m = 1;
        h.loss_value = problem.loss.value;
        h.loss_subgradient = problem.loss.subgradient;
        h.constraint_value = [&](int t, int k, const Vec& x) {
          Vec w(1);
          w[0] = arrivals[static_cast<size_t>(t - 1)];
          return problem.constraints.value(k, x, w);
        };
        h.constraint_subgradient = [&](int t, int k, const Vec& x) {
          Vec w(1);
          w[0] = arrivals[static_cast<size_t>(t - 1)];
          return problem.constraints.subgradient(k, x, w);
        };
        const HindsightSolution sol = hindsight_solve(h, problem.set, 1e-7);
        const double service = offered_service(sol.x_star);
        for (int t = 1; t <= T; ++t) {
          cost[static_cast<size_t>(t - 1)] = slot_cost(t, sol.x_star);
          net[static_cast<size_t>(t - 1)] = arrivals[static_cast<size_t>(t - 1)] - service;
        }
        break;
      }
      case Policy::React: {
        for (int t = 1; t <= T; ++t) {
          const double est = trailing_mean(arrivals, t);
          const ReactDecision d = react_policy(est, fleet);
          cost[static_cast<size_t>(t - 1)] = slot_cost(t, d.power);
          net[static_cast<size_t>(t - 1)] = arrivals[static_cast<size_t>(t - 1)] - offered_service(d.power);
        }
        break;
      }
      case Policy::LowPower: {
        // Demand-blind: everything is routed to one cluster's worth of the
        // currently-cheapest servers, so the required rate is the full-power
        // capacity of a single zone cluster regardless of arrivals. With
        // fewer servers than the load needs, unserved jobs pile up.
        const double cluster_rate = fleet_capacity(fleet) / static_cast<double>(config.n_zones);
        for (int t = 1; t <= T; ++t) {
          Vec price_est(n);
          for (int i = 0; i < n; ++i) {
            if (t <= 1) {
              price_est[i] = price_at(1, i);
            } else {
              double s = 0.0;
              const int lo = std::max(1, t - 5);
              for (int u = lo; u <= t - 1; ++u) s += price_at(u, i);
              price_est[i] = s / static_cast<double>(t - lo);
            }
          }
          const LowPowerDecision d = lowpower_policy(price_est, cluster_rate, fleet);
          cost[static_cast<size_t>(t - 1)] = slot_cost(t, d.power);
          net[static_cast<size_t>(t - 1)] = arrivals[static_cast<size_t>(t - 1)] - offered_service(d.power);
        }
        break;
      }
    }
    result.policies.push_back(detail::finalize_series(policy_name(policy), std::move(cost), net));
  }
  return result;
}

}  // namespace oco
