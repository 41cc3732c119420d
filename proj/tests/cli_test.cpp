#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "oco/io.hpp"

namespace fs = std::filesystem;
using oco::Json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("oco_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(OCO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_config(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  out << j.dump(2);
}

Json small_experiment_config() {
  Json cfg;
  cfg["experiment"] = Json{{"n_servers", 4},
                           {"n_zones", 4},
                           {"horizon", 120},
                           {"arrival_mean", 0.0},
                           {"policies", Json::array({"proposed", "react", "lowpower"})},
                           {"params", Json{{"V", 2.0}, {"alpha", 5.0}}},
                           {"seed", 3}};
  return cfg;
}

}  // namespace

TEST_CASE("run command writes per-policy series and a summary", "[cli]") {
  TempDir dir("run");
  const auto cfg_path = dir.path / "cfg.json";
  write_config(cfg_path, small_experiment_config());
  REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " + (dir.path / "out").string()) == 0);

  const Json summary = oco::read_json((dir.path / "out" / "summary.json").string());
  REQUIRE(summary.contains("config"));
  REQUIRE(summary.contains("timestamp"));
  const auto& run3 = summary["runs"]["seed_3"];
  for (const char* p : {"proposed", "react", "lowpower"}) REQUIRE(run3.contains(p));

  // No arrivals: backlog column is identically zero.
  CHECK(run3["proposed"]["final_backlog_running_avg"].get<double>() == 0.0);
  std::ifstream csv(dir.path / "out" / "proposed_seed3.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "slot,cost_running_avg,backlog_running_avg");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 120);
}

TEST_CASE("repeated runs are byte-identical apart from the timestamp", "[cli]") {
  TempDir dir("repeat");
  const auto cfg_path = dir.path / "cfg.json";
  write_config(cfg_path, small_experiment_config());
  REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " + (dir.path / "a").string()) == 0);
  REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " + (dir.path / "b").string()) == 0);

  Json a = oco::read_json((dir.path / "a" / "summary.json").string());
  Json b = oco::read_json((dir.path / "b" / "summary.json").string());
  a.erase("timestamp");
  b.erase("timestamp");
  // CSV paths embed the out directory; normalize before comparing.
  std::string sa = a.dump(), sb = b.dump();
  const auto strip = [](std::string s, const std::string& from) {
    for (size_t pos; (pos = s.find(from)) != std::string::npos;) s.erase(pos, from.size());
    return s;
  };
  CHECK(strip(sa, (dir.path / "a").string()) == strip(sb, (dir.path / "b").string()));
}

TEST_CASE("four-policy comparison emits four series", "[cli][slow]") {
  TempDir dir("fourpol");
  Json cfg = small_experiment_config();
  cfg["experiment"]["arrival_mean"] = 30.0;
  cfg["experiment"]["policies"] = Json::array({"proposed", "hindsight", "react", "lowpower"});
  const auto cfg_path = dir.path / "cfg.json";
  write_config(cfg_path, cfg);
  REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " + (dir.path / "out").string()) == 0);
  for (const char* p : {"proposed", "hindsight", "react", "lowpower"})
    CHECK(fs::exists(dir.path / "out" / (std::string(p) + "_seed3.csv")));
  CHECK(fs::exists(dir.path / "out" / "summary.json"));
}

TEST_CASE("verify exits clean on stock instances", "[cli][slow]") {
  TempDir dir("verify");
  Json cfg;
  cfg["verify"] = Json{{"instances", Json::array({"one_d_linear", "quadratic_simplex"})},
                       {"seeds", 5},
                       {"horizon", 300},
                       {"mc_seeds", 40}};
  const auto cfg_path = dir.path / "cfg.json";
  write_config(cfg_path, cfg);
  REQUIRE(run_cli("verify --config " + cfg_path.string() + " --out " + (dir.path / "out").string()) == 0);

  const Json report = oco::read_json((dir.path / "out" / "verify_report.json").string());
  CHECK(report["deterministic_ok"].get<bool>());
  CHECK(report["statistical_ok"].get<bool>());
  const auto& one_d = report["instances"]["one_d_linear"];
  CHECK(one_d["drift_bound"]["passed"].get<bool>());
  CHECK(one_d["slater_negativity"].contains("std_errors"));  // per-check standard errors
}

TEST_CASE("verify rejects a misdeclared subgradient bound", "[cli]") {
  TempDir dir("verify_bad");
  Json cfg;
  cfg["verify"] = Json{{"instances", Json::array({Json{{"name", "one_d_linear"}, {"d2", 0.5}}})},
                       {"seeds", 3},
                       {"horizon", 100},
                       {"mc_seeds", 0}};
  const auto cfg_path = dir.path / "cfg.json";
  write_config(cfg_path, cfg);
  CHECK(run_cli("verify --config " + cfg_path.string() + " --out " + (dir.path / "out").string()) == 1);
}

TEST_CASE("convergence slope machinery", "[cli]") {
  TempDir dir("conv");

  SECTION("injected square-root metric fits slope one half") {
    Json cfg;
    cfg["convergence"] = Json{{"horizons", Json::array({100, 1000, 10000})}, {"metric_override", "sqrt"}};
    const auto cfg_path = dir.path / "cfg.json";
    write_config(cfg_path, cfg);
    REQUIRE(run_cli("convergence --config " + cfg_path.string() + " --out " + (dir.path / "out").string()) == 0);
    const Json j = oco::read_json((dir.path / "out" / "convergence.json").string());
    CHECK(std::abs(j["violation_slope"].get<double>() - 0.5) <= 1e-12);
    CHECK(std::abs(j["regret_slope"].get<double>() - 0.5) <= 1e-12);
  }

  SECTION("injected sqrt metric against a tight threshold exits 3") {
    Json cfg;
    cfg["convergence"] =
        Json{{"horizons", Json::array({100, 1000, 10000})}, {"metric_override", "sqrt"}, {"slope_threshold", 0.4}};
    const auto cfg_path = dir.path / "cfg.json";
    write_config(cfg_path, cfg);
    CHECK(run_cli("convergence --config " + cfg_path.string() + " --out " + (dir.path / "out").string()) == 3);
  }

  SECTION("a single-horizon grid is a config error") {
    Json cfg;
    cfg["convergence"] = Json{{"horizons", Json::array({1000})}, {"metric_override", "sqrt"}};
    const auto cfg_path = dir.path / "cfg.json";
    write_config(cfg_path, cfg);
    CHECK(run_cli("convergence --config " + cfg_path.string() + " --out " + (dir.path / "out").string()) == 1);
  }
}

TEST_CASE("gen-trace writes a loadable CSV", "[cli]") {
  TempDir dir("gentrace");
  Json cfg;
  cfg["trace"] = Json{{"zones", 3}, {"slots", 50}, {"seed", 11},
                      {"spec", Json{{"base", 2.0}, {"daily_amplitude", 0.3}, {"spike_prob", 0.0}, {"spike_scale", 0.0}}}};
  const auto cfg_path = dir.path / "cfg.json";
  write_config(cfg_path, cfg);
  REQUIRE(run_cli("gen-trace --config " + cfg_path.string() + " --out " + (dir.path / "out").string()) == 0);
  const auto trace = oco::load_price_trace((dir.path / "out" / "trace.csv").string());
  CHECK(trace.zones() == 3);
  CHECK(trace.slots() == 50);
  const auto direct = oco::synth_price_trace(3, 50, 11, oco::SynthPriceSpec{2.0, 0.3, 0.0, 0.0});
  CHECK(trace.prices == direct.prices);  // CSV round trip is bit-exact
}

TEST_CASE("missing config file is a runtime error", "[cli]") {
  CHECK(run_cli("run --config /nonexistent/cfg.json") == 1);
}

TEST_CASE("the environment variable supplies the default output directory", "[cli]") {
  TempDir dir("envout");
  const std::string cmd = "OCO_QUEUE_OUT=" + (dir.path / "envdir").string() + " " + OCO_CLI_PATH +
                          " gen-trace --seed 5 --horizon 30 > /dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(fs::exists(dir.path / "envdir" / "trace.csv"));
}
