#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "rwdre/cli/experiments.hpp"
#include "rwdre/core/errors.hpp"

using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw rwdre::ParameterError("cannot open config " + path);
  return json::parse(f);
}

// Pairs of "--key value" left over after the named options.
void apply_extras(json& cfg, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& flag = extras[i];
    if (flag.rfind("--", 0) != 0 || flag.size() < 3) {
      throw rwdre::ParameterError("unexpected argument '" + flag + "'");
    }
    if (i + 1 >= extras.size()) throw rwdre::ParameterError("missing value for " + flag);
    rwdre::apply_override(cfg, flag.substr(2), extras[++i]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks on dynamical random environments: experiment runner"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List registered experiments");
  bool as_json = false;
  list->add_flag("--json", as_json, "Print the registry as JSON");

  auto* run = app.add_subcommand("run", "Run an experiment");
  run->allow_extras();
  std::string config_path, experiment;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> replicas;
  std::optional<std::string> out;
  bool dry = false;
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--experiment", experiment, "Experiment name (overrides the config)");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--replicas", replicas, "Replica count");
  run->add_option("--out", out, "Output directory");
  run->add_flag("--dry-run", dry, "Print the normalized config and exit");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    json arr = json::array();
    for (const auto& e : rwdre::list_experiments()) {
      if (as_json) {
        arr.push_back({{"name", e.name},
                       {"anchor", e.anchor},
                       {"description", e.description},
                       {"params", e.param_defaults}});
      } else {
        std::cout << e.name << "\t" << e.anchor << "\n    " << e.description
                  << "\n    params: " << e.param_defaults.dump() << "\n";
      }
    }
    if (as_json) std::cout << arr.dump(2) << "\n";
    return 0;
  }

  rwdre::ExperimentConfig cfg;
  try {
    json j = config_path.empty() ? json::object() : load_config(config_path);
    if (!experiment.empty()) j["experiment"] = experiment;
    if (seed) j["seed"] = *seed;
    if (replicas) j["replicas"] = *replicas;
    if (out) j["out"] = *out;
    apply_extras(j, run->remaining());
    cfg = rwdre::normalize_config(rwdre::ExperimentConfig::from_json(j));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (dry) {
    std::cout << cfg.to_json().dump(2) << "\n";
    return 0;
  }
  try {
    std::cerr << "running " << cfg.experiment << " on " << cfg.model << " ("
              << cfg.replicas << " replicas, seed " << cfg.seed << ")\n";
    const auto rows = rwdre::run_experiment(cfg);
    rwdre::write_results(cfg, rows, "ok");
    std::cout << rwdre::csv_header() << "\n";
    for (const auto& r : rows) std::cout << rwdre::to_csv(r) << "\n";
    return 0;
  } catch (const std::exception& e) {
    const int code = rwdre::exit_code_for(e);
    std::cerr << "error: " << e.what() << "\n";
    try {
      rwdre::write_results(cfg, {}, "exit " + std::to_string(code));
    } catch (...) {
    }
    return code;
  }
}
