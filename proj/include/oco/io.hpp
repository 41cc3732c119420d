#pragma once

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oco/analysis.hpp"
#include "oco/datacenter.hpp"

namespace oco {

using Json = nlohmann::json;

inline Json to_json(const AlgorithmParams& p) {
  return Json{{"V", p.V}, {"alpha", p.alpha}, {"horizon", p.horizon}};
}

inline Json to_json(const SynthPriceSpec& s) {
  return Json{{"base", s.base},
              {"daily_amplitude", s.daily_amplitude},
              {"spike_prob", s.spike_prob},
              {"spike_scale", s.spike_scale}};
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["n_servers"] = c.n_servers;
  j["n_zones"] = c.n_zones;
  j["horizon"] = c.horizon;
  j["arrival_mean"] = c.arrival_mean;
  if (c.trace_path.empty()) {
    j["trace"] = Json{{"synthetic", to_json(c.synth)}, {"seed", c.trace_seed}};
  } else {
    j["trace"] = Json{{"file", c.trace_path}};
  }
  std::vector<std::string> names;
  for (Policy p : c.policies) names.push_back(policy_name(p));
  j["policies"] = names;
  j["params"] = to_json(c.resolved_params());
  j["seed"] = c.seed;
  j["server"] = Json{{"x_min", c.server.x_min}, {"x_max", c.server.x_max}, {"h_a", c.server.h_a}, {"h_b", c.server.h_b}};
  return j;
}

inline Json to_json(const CheckReport& r) {
  Json j;
  j["check"] = r.check;
  j["passed"] = r.passed;
  j["worst_slack"] = r.worst_slack;
  if (r.witness_round >= 0) j["witness_round"] = r.witness_round;
  if (r.witness_k >= 0) j["witness_k"] = r.witness_k;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json to_json(const StatReport& r) {
  Json j;
  j["check"] = r.check;
  j["passed"] = r.passed;
  j["seeds"] = r.seeds;
  j["rounds"] = r.rounds;
  j["estimates"] = r.estimates;
  j["thresholds_3se"] = r.thresholds;
  j["std_errors"] = r.std_errors;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json summary_json(const PolicySeries& s) {
  return Json{{"total_cost", s.total_cost},
              {"final_backlog", s.final_backlog},
              {"final_backlog_running_avg", s.final_backlog_avg}};
}

/// Per-policy CSV series, schema `slot,cost_running_avg,backlog_running_avg`.
inline void write_policy_csv(const std::string& path, const PolicySeries& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "slot,cost_running_avg,backlog_running_avg\n";
  for (size_t t = 0; t < s.cost_avg.size(); ++t)
    out << (t + 1) << "," << detail::format_double(s.cost_avg[t]) << "," << detail::format_double(s.backlog_avg[t])
        << "\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// Summary for one experiment run. The timestamp lives in a single top-level
/// field so byte comparisons can exclude exactly that key.
inline Json experiment_summary_json(const ExperimentResult& res, const std::string& timestamp) {
  Json j;
  j["config"] = to_json(res.config);
  j["seed"] = res.seed;
  j["timestamp"] = timestamp;
  double total = 0.0;
  for (double a : res.arrivals) total += a;
  j["arrivals_total"] = total;
  Json policies;
  for (const auto& s : res.policies) policies[s.policy] = summary_json(s);
  j["policies"] = policies;
  return j;
}

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Json j;
  in >> j;
  return j;
}

}  // namespace oco
