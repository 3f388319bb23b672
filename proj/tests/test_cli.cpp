#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "rwdre/cli/experiments.hpp"
#include "rwdre/cli/models.hpp"
#include "rwdre/core/errors.hpp"

using namespace rwdre;
using nlohmann::json;

namespace {

ExperimentConfig speed_config() {
  ExperimentConfig c;
  c.experiment = "speed";
  c.model = "blind";
  c.rule = {{"preset", "fair"}};
  c.params = {{"T", 20.0}};
  c.replicas = 50;
  c.seed = 9;
  return normalize_config(c);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config round trip") {
  ExperimentConfig c = speed_config();
  c.model_params = normalize_model_params("spinflip", {{"nu", 2.0}});
  c.model = "spinflip";
  c.out = "somewhere";
  CHECK(ExperimentConfig::from_json(c.to_json()) == c);
  CHECK(ExperimentConfig::from_json(json::parse(c.to_json().dump())) == c);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"experiment", "speed"}, {"bogus", 1}}),
                  ParameterError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"seed", 1}}), ParameterError);
  const auto bare = ExperimentConfig::from_json({{"experiment", "speed"}, {"model", "east"}});
  CHECK(bare.model == "east");
}

TEST_CASE("config hash ignores seed and output only") {
  const ExperimentConfig a = speed_config();
  ExperimentConfig b = a;
  b.seed = 12345;
  b.out = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  ExperimentConfig c = a;
  c.params["T"] = 21.0;
  CHECK(config_hash(a) != config_hash(c));
  ExperimentConfig d = a;
  d.replicas = 51;
  CHECK(config_hash(a) != config_hash(d));
}

TEST_CASE("integer and float parameter values normalize alike") {
  ExperimentConfig a = speed_config();
  ExperimentConfig b = a;
  b.params = {{"T", 20}};
  b = normalize_config(b);
  CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("dotted overrides") {
  json j = {{"experiment", "speed"}, {"model", "east"}};
  apply_override(j, "model.params.rho", "0.3");
  CHECK(j["model"]["name"] == "east");
  CHECK(j["model"]["params"]["rho"] == 0.3);
  apply_override(j, "model", "contact");
  CHECK(j["model"]["name"] == "contact");
  apply_override(j, "params.tracker", "east_front");
  CHECK(j["params"]["tracker"] == "east_front");
  apply_override(j, "params.H", "[100, 400]");
  CHECK(j["params"]["H"] == json::array({100, 400}));
  apply_override(j, "seed", "7");
  CHECK(ExperimentConfig::from_json(j).seed == 7);
  CHECK_THROWS_AS(apply_override(j, "", "1"), ParameterError);
  CHECK_THROWS_AS(apply_override(j, "params..H", "1"), ParameterError);
  CHECK_THROWS_AS(apply_override(j, "seed.x", "1"), ParameterError);
}

TEST_CASE("experiment registry") {
  const auto& reg = list_experiments();
  std::vector<std::string> names;
  for (const auto& e : reg) {
    names.push_back(e.name);
    CHECK_FALSE(e.anchor.empty());
    CHECK_FALSE(e.description.empty());
    CHECK(e.param_defaults.is_object());
  }
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK(names == std::vector<std::string>{"bracket", "concentration", "counterexample_fluct",
                                          "mixing_profile", "speed", "threatened_census",
                                          "trapped_census"});
  CHECK(find_experiment("bracket").name == "bracket");
  CHECK_THROWS_AS(find_experiment("nope"), ParameterError);
}

TEST_CASE("normalization rejects schema violations") {
  ExperimentConfig c;
  c.experiment = "speed";
  c.params = {{"bogus", 1.0}};
  CHECK_THROWS_AS(normalize_config(c), ParameterError);
  c.params = {{"T", "long"}};
  CHECK_THROWS_AS(normalize_config(c), ParameterError);
  c.params = {{"discard_cap", 1.0}};
  CHECK_THROWS_AS(normalize_config(c), ParameterError);
  c.params = json::object();
  c.replicas = 0;
  CHECK_THROWS_AS(normalize_config(c), ParameterError);
  c.replicas = 10;
  c.model = "nope";
  CHECK_THROWS_AS(normalize_config(c), ParameterError);
  c.model = "spinflip";
  c.model_params = {{"lambda", 1.0}};
  CHECK_THROWS_AS(normalize_config(c), ParameterError);
  c.model_params = json::object();
  c.rule = {{"preset", "zigzag"}};
  CHECK_THROWS_AS(normalize_config(c), ParameterError);
  c.rule = "fair";
  const auto n = normalize_config(c);
  CHECK(n.rule == json{{"preset", "fair"}});
  CHECK(n.params["T"] == 1000.0);
  CHECK(n.model_params.contains("nu"));
}

TEST_CASE("model names and rule construction") {
  const auto& names = model_names();
  CHECK(std::is_sorted(names.begin(), names.end()));
  const std::set<std::string> got(names.begin(), names.end());
  for (const char* m : {"blind", "contact", "counterexample", "east", "renewal", "spinflip"}) {
    CHECK(got.count(m) == 1);
  }
  const JumpRule table =
      make_rule({{"radius", 0}, {"table", {{0.0, 1.0, 0.0}, {0.25, 0.5, 0.25}}}},
                StateSpace::Binary);
  const int zero[1] = {0}, one[1] = {1};
  CHECK(table.probabilities(zero).stay == 1.0);
  CHECK(table.probabilities(one).right == 0.25);
  CHECK(make_rule("right", StateSpace::Binary).probabilities(one).right == 1.0);
  const JumpRule drift = make_rule({{"preset", "occupation_drift"}, {"p", 0.6}}, StateSpace::Binary);
  CHECK(drift.probabilities(one).right == doctest::Approx(0.6));
  CHECK(drift.probabilities(zero).left == doctest::Approx(0.6));
  CHECK_THROWS_AS(make_rule({{"radius", 1}, {"table", {{0.0, 1.0, 0.0}}}}, StateSpace::Binary),
                  ParameterError);
  CHECK_THROWS_AS(make_rule({{"radius", 0}, {"table", {{0.5, 0.6, 0.0}, {0.0, 1.0, 0.0}}}},
                            StateSpace::Binary),
                  ParameterError);
  CHECK_THROWS_AS(make_rule(json(3), StateSpace::Binary), ParameterError);
}

TEST_CASE("blind stay walker has speed exactly zero") {
  ExperimentConfig c = speed_config();
  c.rule = {{"preset", "stay"}};
  const auto rows = run_experiment(normalize_config(c));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].estimate == 0.0);
  CHECK(rows[0].half_width == 0.0);
  CHECK(rows[0].replicas == 50);
  CHECK(rows[0].discards == 0);
  CHECK(rows[0].experiment == "speed");
  CHECK(rows[0].param_hash == config_hash(c));
}

TEST_CASE("runs are deterministic given the seed") {
  const ExperimentConfig c = speed_config();
  auto a = run_experiment(c);
  auto b = run_experiment(c);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].wall_ms = b[i].wall_ms = 0;
    CHECK(to_csv(a[i]) == to_csv(b[i]));
  }
  ExperimentConfig other = c;
  other.seed = 10;
  CHECK(run_experiment(other)[0].estimate != a[0].estimate);
}

TEST_CASE("csv header and results files") {
  CHECK(csv_header() ==
        "experiment,model,param_hash,key1,key2,estimate,half_width,replicas,discards,seed,wall_ms");
  ResultRow r;
  r.experiment = "speed";
  r.model = "a,b";
  CHECK(to_csv(r).rfind("speed,\"a,b\",", 0) == 0);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rwdre_cli_test";
  fs::remove_all(dir);
  ExperimentConfig c = speed_config();
  c.out = dir.string();
  const auto rows = run_experiment(c);
  write_results(c, rows, "ok");
  write_results(c, rows, "ok");
  std::ifstream csv(dir / "speed.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(csv, l);) lines.push_back(l);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == csv_header());
  std::ifstream man(dir / "manifest.jsonl");
  int records = 0;
  for (std::string l; std::getline(man, l); ++records) {
    const json rec = json::parse(l);
    CHECK(rec["status"] == "ok");
    CHECK(rec["param_hash"] == config_hash(c));
    CHECK(ExperimentConfig::from_json(rec["config"]) == c);
  }
  CHECK(records == 2);
  fs::remove_all(dir);
}

TEST_CASE("exit codes by error class") {
  CHECK(exit_code_for(ParameterError("x")) == 2);
  CHECK(exit_code_for(StatisticalValidityError("x")) == 3);
  CHECK(exit_code_for(InvariantError("x")) == 4);
  CHECK(exit_code_for(TruncationError("x", 1.0)) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
  try {
    [[maybe_unused]] const json bad = json::parse("{");
  } catch (const json::exception& e) {
    CHECK(exit_code_for(e) == 2);
  }
}

}  // TEST_SUITE cli
