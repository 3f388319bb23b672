#pragma once

#include <cstdint>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

namespace rwdre {

// Serialized as
//   {"experiment": ..., "model": {"name": ..., "params": {...}},
//    "rule": {...}, "params": {...}, "replicas": n, "seed": s, "out": dir}
struct ExperimentConfig {
  std::string experiment;
  std::string model = "spinflip";
  nlohmann::json model_params = nlohmann::json::object();
  nlohmann::json rule = {{"preset", "fair"}};
  nlohmann::json params = nlohmann::json::object();
  std::int64_t replicas = 1000;
  std::uint64_t seed = 1;
  std::string out = "results";

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// FNV-1a over the canonical serialization without seed and output path, as
// 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

// Sets a dotted key ("model.params.lambda", "params.H", "seed") in a
// serialized config. The value is parsed as JSON when it is valid JSON and
// taken as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& dotted_key,
                    const std::string& value);

struct ResultRow {
  std::string experiment;
  std::string model;
  std::string param_hash;
  std::string key1;
  std::string key2;
  double estimate = 0.0;
  double half_width = 0.0;
  std::int64_t replicas = 0;
  std::int64_t discards = 0;
  std::uint64_t seed = 0;
  std::int64_t wall_ms = 0;
};

std::string csv_header();
std::string to_csv(const ResultRow& row);

struct ExperimentInfo {
  std::string name;
  std::string anchor;  // the result of the paper the experiment reproduces
  std::string description;
  nlohmann::json param_defaults;
  std::function<std::vector<ResultRow>(const ExperimentConfig&)> run;
};

// Registry sorted by name.
const std::vector<ExperimentInfo>& list_experiments();
const ExperimentInfo& find_experiment(const std::string& name);

// Fills experiment and model defaults and validates every key; ParameterError
// on schema violations.
ExperimentConfig normalize_config(ExperimentConfig c);

// Runs a normalized config. Rows carry the config hash, seed and wall time.
std::vector<ResultRow> run_experiment(const ExperimentConfig& c);

// Appends rows to <out>/<experiment>.csv (header on creation) and one record
// to <out>/manifest.jsonl.
void write_results(const ExperimentConfig& c, const std::vector<ResultRow>& rows,
                   const std::string& status);

// 2 for ParameterError (and JSON errors), 3 for StatisticalValidityError, 4
// for InvariantError and TruncationError, 1 otherwise.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace rwdre
