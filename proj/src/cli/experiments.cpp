#include "rwdre/cli/experiments.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "rwdre/cli/models.hpp"
#include "rwdre/core/errors.hpp"
#include "rwdre/core/rng.hpp"
#include "rwdre/counterexample/soup.hpp"
#include "rwdre/environments/east.hpp"
#include "rwdre/mixing/covariance.hpp"
#include "rwdre/renormalization/speeds.hpp"
#include "rwdre/renormalization/traps.hpp"

namespace rwdre {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

double num(const ExperimentConfig& c, const char* key) { return c.params.at(key).get<double>(); }

std::vector<double> num_list(const ExperimentConfig& c, const char* key) {
  return c.params.at(key).get<std::vector<double>>();
}

ResultRow base_row(const ExperimentConfig& c) {
  ResultRow r;
  r.experiment = c.experiment;
  r.model = c.model;
  r.param_hash = config_hash(c);
  r.replicas = c.replicas;
  r.seed = c.seed;
  return r;
}

ResultRow row_from(const ExperimentConfig& c, std::string key1, std::string key2,
                   const EstimateWithCI& e) {
  ResultRow r = base_row(c);
  r.key1 = std::move(key1);
  r.key2 = std::move(key2);
  r.estimate = e.point;
  r.half_width = e.half_width;
  r.replicas = e.replicas;
  r.discards = e.discards;
  return r;
}

void check_discards(std::int64_t discards, std::int64_t replicas, double cap) {
  if (static_cast<double>(discards) > cap * static_cast<double>(replicas)) {
    throw StatisticalValidityError(std::to_string(discards) + " of " + std::to_string(replicas) +
                                   " replicas truncated, above the discard cap");
  }
}

EstimateWithCI mean_of_kept(const std::vector<std::optional<double>>& values, double cap,
                            std::uint64_t seed) {
  std::vector<double> kept;
  for (const auto& v : values) {
    if (v) kept.push_back(*v);
  }
  const auto discards = static_cast<std::int64_t>(values.size() - kept.size());
  check_discards(discards, static_cast<std::int64_t>(values.size()), cap);
  EstimateWithCI e = mean_estimate(kept, 0.99, seed);
  e.discards = discards;
  return e;
}

//--------------------------------------------------------------------------//

std::vector<ResultRow> run_speed(const ExperimentConfig& c) {
  const double T = num(c, "T");
  const std::string tracker = c.params.at("tracker");
  const Model model = make_model(c.model, c.model_params);
  const JumpRule rule = make_rule(c.rule, model_state_space(c.model));
  if (tracker != "walker") {
    const std::string needed = tracker == "east_zero" ? "zero_at" : "front";
    if (c.model != "east" || c.model_params.at("initial") != needed) {
      throw ParameterError("tracker " + tracker + " needs the east model with initial " + needed);
    }
  }
  const SiteRange window = walker_window(0, 0, T, rule.radius() + 1);
  const auto values = map_replicas<std::optional<double>>(c.replicas, [&](std::int64_t i) {
    Replica rep = model.make(replica_seed(c.seed, static_cast<std::uint64_t>(i)), window, T);
    WalkerPath p;
    if (tracker == "walker") {
      try {
        p = run_walker(*rep.env, *rep.clocks, rule, {0, 0.0}, T);
      } catch (const TruncationError&) {
        return std::optional<double>();
      }
    } else {
      auto& east = dynamic_cast<EastProcess&>(*rep.env);
      p = tracker == "east_zero" ? east_distinguished_zero(east, 0, T) : east_front(east, 0, T);
      if (p.truncated()) return std::optional<double>();
    }
    return std::optional<double>(static_cast<double>(p.displacement()) / T);
  });
  return {row_from(c, fmt(T), tracker, mean_of_kept(values, num(c, "discard_cap"), c.seed))};
}

std::vector<ResultRow> run_bracket(const ExperimentConfig& c) {
  const Model model = make_model(c.model, c.model_params);
  const JumpRule rule = make_rule(c.rule, model_state_space(c.model));
  const auto H = num_list(c, "H");
  const auto grid = uniform_grid(num(c, "v_lo"), num(c, "v_hi"), c.params.at("v_n").get<int>());
  EstimatorOptions opt;
  opt.discard_cap = num(c, "discard_cap");
  const SpeedBracket b = bracket_speeds(model, rule, H, grid, num(c, "theta"), c.replicas,
                                        c.seed, opt);
  const double step = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ResultRow> out;
  for (const auto& row : b.rows) {
    auto add = [&](const char* what, std::optional<double> v) {
      ResultRow r = base_row(c);
      r.key1 = fmt(row.H);
      r.key2 = what;
      r.estimate = v.value_or(nan);
      r.half_width = step;
      r.discards = row.discards;
      out.push_back(r);
    };
    add("v_plus", row.v_plus);
    add("v_minus", row.v_minus);
    add("width", row.width());
  }
  return out;
}

std::vector<ResultRow> run_trapped(const ExperimentConfig& c) {
  const Model model = make_model(c.model, c.model_params);
  const JumpRule rule = make_rule(c.rule, model_state_space(c.model));
  const double H = num(c, "H"), delta = num(c, "delta"), v_minus = num(c, "v_minus");
  rounding_step(H, delta);
  const auto starts = trap_window_starts({0.0, 0.0}, H, delta);
  if (starts.empty()) throw ParameterError("trap window contains no lattice site");
  const SiteRange window = walker_window(starts.front(), starts.back(), H, rule.radius());
  const auto hits = map_replicas<int>(c.replicas, [&](std::int64_t i) {
    Replica rep = model.make(replica_seed(c.seed, static_cast<std::uint64_t>(i)), window, H);
    const auto oracle = make_trap_oracle(*rep.env, *rep.clocks, rule, H, delta, v_minus);
    try {
      return oracle({0.0, 0.0}) ? 1 : 0;
    } catch (const TruncationError&) {
      return -1;
    }
  });
  std::int64_t trapped = 0, discards = 0;
  for (int h : hits) {
    trapped += h == 1;
    discards += h < 0;
  }
  check_discards(discards, c.replicas, num(c, "discard_cap"));
  EstimateWithCI e = proportion_estimate(trapped, c.replicas - discards, 0.99, c.seed);
  e.discards = discards;
  return {row_from(c, fmt(H), fmt(delta), e)};
}

std::vector<ResultRow> run_threatened(const ExperimentConfig& c) {
  const Model model = make_model(c.model, c.model_params);
  const JumpRule rule = make_rule(c.rule, model_state_space(c.model));
  const int kbar = c.params.at("kbar").get<int>();
  const int k = c.params.at("k").get<int>();
  if (kbar < 0 || k <= kbar) throw ParameterError("threatened census needs 0 <= kbar < k");
  const ScaleLadder ladder =
      build_ladder(LadderVariant::Main, c.params.at("L0").get<std::int64_t>(), k);
  const double h = num(c, "h"), delta = num(c, "delta");
  const double v_plus = num(c, "v_plus"), v_minus = num(c, "v_minus");
  const double H = h * static_cast<double>(ladder.L(static_cast<std::size_t>(kbar)));
  const double r = static_cast<double>(ladder.l(static_cast<std::size_t>(kbar)));
  const double length = h * static_cast<double>(ladder.L(static_cast<std::size_t>(k)));
  const double horizon = length + (r + 1.0) * H;
  const auto reach = static_cast<Site>(std::ceil(r * H * std::abs(v_plus) + 2.0 * delta * H));
  const SiteRange window = walker_window(-reach, reach, horizon, rule.radius());
  const auto values = map_replicas<std::optional<double>>(c.replicas, [&](std::int64_t i) {
    Replica rep =
        model.make(replica_seed(c.seed, static_cast<std::uint64_t>(i)), window, horizon);
    try {
      const WalkerPath p = run_walker(*rep.env, *rep.clocks, rule, {0, 0.0}, length);
      const auto oracle = make_trap_oracle(*rep.env, *rep.clocks, rule, H, delta, v_minus);
      return std::optional<double>(threatened_density(p, h, ladder,
                                                      static_cast<std::size_t>(kbar), oracle,
                                                      delta, v_plus));
    } catch (const TruncationError&) {
      return std::optional<double>();
    }
  });
  return {row_from(c, fmt(length), std::to_string(kbar),
                   mean_of_kept(values, num(c, "discard_cap"), c.seed))};
}

std::vector<ResultRow> run_mixing(const ExperimentConfig& c) {
  const Model model = make_model(c.model, c.model_params);
  const auto r_list = num_list(c, "r");
  const std::string obs = c.params.at("observable");
  ObservablePairTemplate tpl;
  if (obs == "lag") {
    tpl = lag_template();
  } else if (obs == "box_average" || obs == "threshold") {
    tpl = box_template(
        obs == "threshold" ? BoxObservable::Kind::Threshold : BoxObservable::Kind::BoxAverage,
        num(c, "side_factor"), num(c, "threshold"));
  } else {
    throw ParameterError("unknown observable '" + obs + "'");
  }
  const DecayFit fit = covariance_decay_profile(model, tpl, r_list, c.replicas, c.seed);
  std::vector<ResultRow> out;
  for (const auto& p : fit.pairs) {
    ResultRow r = base_row(c);
    r.key1 = fmt(p.r);
    r.key2 = obs;
    r.estimate = p.estimate;
    r.half_width = p.half_width;
    out.push_back(r);
  }
  auto fit_row = [&](const char* what, double v) {
    ResultRow r = base_row(c);
    r.key1 = "fit";
    r.key2 = what;
    r.estimate = v;
    out.push_back(r);
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  fit_row("alpha", fit.alpha_hat().value_or(nan));
  fit_row("beta", fit.beta_hat().value_or(nan));
  fit_row("exponential_preferred",
          fit.power ? (fit.preferred == DecayModel::Exponential ? 1.0 : 0.0) : nan);
  fit_row("below_noise", fit.below_noise ? 1.0 : 0.0);
  return out;
}

std::vector<ResultRow> run_fluct(const ExperimentConfig& c) {
  if (c.model != "counterexample") {
    throw ParameterError("counterexample_fluct needs the counterexample model");
  }
  const auto L0 = c.model_params.at("L0").get<std::int64_t>();
  const int k_max = c.model_params.at("k_max").get<int>();
  const int n_scales = c.params.at("scales").get<int>();
  if (n_scales < 1 || n_scales > k_max + 1) {
    throw ParameterError("scales must lie in [1, k_max + 1]");
  }
  const ScaleLadder ladder = build_ladder(LadderVariant::Counterexample, L0, k_max);
  std::vector<std::int64_t> scales;
  for (int k = 0; k < n_scales; ++k) scales.push_back(ladder.L(static_cast<std::size_t>(k)));
  FluctuationOptions opt;
  opt.k_max = k_max;
  opt.threshold = num(c, "threshold");
  const std::string forcing = c.model_params.at("forcing");
  opt.forcing = forcing == "gray"    ? SoupForcing::AllGray
                : forcing == "black" ? SoupForcing::AllBlack
                : forcing == "white" ? SoupForcing::AllWhite
                                     : SoupForcing::None;
  std::vector<ResultRow> out;
  for (const auto& row : fluctuation_experiment(L0, scales, c.replicas, c.seed, opt)) {
    out.push_back(row_from(c, std::to_string(row.L), "right", row.right));
    out.push_back(row_from(c, std::to_string(row.L), "left", row.left));
  }
  if (c.params.at("baseline").get<bool>()) {
    for (const auto& row : fluctuation_baseline(scales, c.replicas, c.seed, opt.threshold)) {
      out.push_back(row_from(c, std::to_string(row.L), "baseline_right", row.right));
      out.push_back(row_from(c, std::to_string(row.L), "baseline_left", row.left));
    }
  }
  return out;
}

std::vector<ResultRow> run_concentration(const ExperimentConfig& c) {
  const Model model = make_model(c.model, c.model_params);
  const JumpRule rule = make_rule(c.rule, model_state_space(c.model));
  const auto t = num_list(c, "t");
  std::optional<double> v;
  if (!c.params.at("v").is_null()) v = num(c, "v");
  EstimatorOptions opt;
  opt.discard_cap = num(c, "discard_cap");
  const ConcentrationTable tab =
      concentration_diagnostic(model, rule, t, num(c, "eps"), c.replicas, c.seed, v, opt);
  std::vector<ResultRow> out;
  for (const auto& row : tab.rows) out.push_back(row_from(c, fmt(row.t), fmt(tab.eps), row.frequency));
  return out;
}

std::vector<ExperimentInfo> build_registry() {
  std::vector<ExperimentInfo> r = {
      {"speed", "law of large numbers for the walker, speed v",
       "Mean X_T / T of a walker or East tracker (walker|east_zero|east_front) started at 0.",
       {{"T", 1000.0}, {"tracker", "walker"}, {"discard_cap", 0.01}},
       run_speed},
      {"bracket", "upper and lower speeds v+ and v-, events A and A-tilde",
       "Per-H speed bracket from the shared-seed curves p_H(v) and p~_H(v).",
       {{"H", json::array({100.0, 400.0})},
        {"theta", 0.05},
        {"v_lo", -1.0},
        {"v_hi", 1.0},
        {"v_n", 21},
        {"discard_cap", 0.01}},
       run_bracket},
      {"trapped_census", "H-trapped points",
       "Frequency with which the origin is H-trapped.",
       {{"H", 50.0}, {"delta", 0.1}, {"v_minus", -0.5}, {"discard_cap", 0.01}},
       run_trapped},
      {"threatened_census", "(H, r)-threatened points along a walker path",
       "Mean fraction of threatened checkpoints along a path of length h L_k.",
       {{"L0", 16},
        {"kbar", 0},
        {"k", 3},
        {"h", 1.0},
        {"delta", 0.25},
        {"v_plus", 0.5},
        {"v_minus", -0.5},
        {"discard_cap", 0.01}},
       run_threatened},
      {"mixing_profile", "decoupling inequality Cov(f1, f2) <= c1 r^-alpha",
       "Covariance of box observables at time distance r, with power and exponential fits.",
       {{"r", json::array({0.5, 1.0, 2.0, 4.0})},
        {"observable", "lag"},
        {"side_factor", 1.0},
        {"threshold", 0.5}},
       run_mixing},
      {"counterexample_fluct", "counterexample: linear fluctuations of the drift walker",
       "Tail frequencies P(X_L / L > c) and P(X_L / L < -c) on the rectangle soup.",
       {{"scales", 2}, {"threshold", 0.1}, {"baseline", true}},
       run_fluct},
      {"concentration", "large deviation bound, decay in t",
       "Frequency of |X_t / t - v| >= eps per t.",
       {{"t", json::array({10.0, 100.0, 1000.0})},
        {"eps", 0.2},
        {"v", nullptr},
        {"discard_cap", 0.01}},
       run_concentration},
  };
  std::stable_sort(r.begin(), r.end(),
                   [](const ExperimentInfo& a, const ExperimentInfo& b) { return a.name < b.name; });
  return r;
}

bool same_kind(const json& def, const json& v) {
  if (def.is_null()) return v.is_null() || v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_array()) {
    return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
  }
  return false;
}

}  // namespace

//--------------------------------------------------------------------------//

json ExperimentConfig::to_json() const {
  return {{"experiment", experiment},
          {"model", {{"name", model}, {"params", model_params}}},
          {"rule", rule},
          {"params", params},
          {"replicas", replicas},
          {"seed", seed},
          {"out", out}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ParameterError("config must be an object");
  static const std::array<const char*, 7> keys = {"experiment", "model", "rule", "params",
                                                  "replicas",   "seed",  "out"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ParameterError("unknown config key '" + k + "'");
    }
  }
  ExperimentConfig c;
  if (!j.contains("experiment")) throw ParameterError("config needs an experiment");
  c.experiment = j.at("experiment").get<std::string>();
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.is_string()) {
      c.model = m.get<std::string>();
    } else {
      for (const auto& [k, v] : m.items()) {
        if (k != "name" && k != "params") throw ParameterError("unknown model key '" + k + "'");
      }
      c.model = m.value("name", c.model);
      if (m.contains("params")) c.model_params = m.at("params");
    }
  }
  if (j.contains("rule")) c.rule = j.at("rule");
  if (j.contains("params")) c.params = j.at("params");
  if (j.contains("replicas")) c.replicas = j.at("replicas").get<std::int64_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  return c;
}

std::string config_hash(const ExperimentConfig& c) {
  json j = c.to_json();
  j.erase("seed");
  j.erase("out");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
  return out;
}

void apply_override(json& config, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ParameterError("empty override key");
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  // "model" may be given as a bare name; keep it an object so that its name
  // and parameters can be overridden independently.
  if (config.is_object() && config.contains("model") && config["model"].is_string()) {
    config["model"] = json{{"name", config["model"]}};
  }
  if (dotted_key == "model" && parsed.is_string()) {
    config["model"]["name"] = parsed;
    return;
  }
  json* node = &config;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', pos);
    const std::string part = dotted_key.substr(pos, dot - pos);
    if (part.empty()) throw ParameterError("malformed override key '" + dotted_key + "'");
    if (!node->is_object()) {
      if (!node->is_null()) {
        throw ParameterError("override '" + dotted_key + "' descends into a non-object");
      }
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

std::string csv_header() {
  return "experiment,model,param_hash,key1,key2,estimate,half_width,replicas,discards,seed,wall_ms";
}

std::string to_csv(const ResultRow& r) {
  return csv_field(r.experiment) + ',' + csv_field(r.model) + ',' + r.param_hash + ',' +
         csv_field(r.key1) + ',' + csv_field(r.key2) + ',' + fmt(r.estimate) + ',' +
         fmt(r.half_width) + ',' + std::to_string(r.replicas) + ',' +
         std::to_string(r.discards) + ',' + std::to_string(r.seed) + ',' +
         std::to_string(r.wall_ms);
}

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> registry = build_registry();
  return registry;
}

const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : list_experiments()) {
    if (e.name == name) return e;
  }
  throw ParameterError("unknown experiment '" + name + "'");
}

ExperimentConfig normalize_config(ExperimentConfig c) {
  const ExperimentInfo& info = find_experiment(c.experiment);
  c.model_params = normalize_model_params(c.model, c.model_params);
  if (c.rule.is_string()) c.rule = json{{"preset", c.rule}};
  make_rule(c.rule, model_state_space(c.model));
  if (!c.params.is_null() && !c.params.is_object()) {
    throw ParameterError("experiment parameters must be an object");
  }
  json params = info.param_defaults;
  if (c.params.is_object()) {
    for (const auto& [k, v] : c.params.items()) {
      if (!params.contains(k)) {
        throw ParameterError("unknown parameter '" + k + "' for experiment " + c.experiment);
      }
      if (!same_kind(params[k], v)) {
        throw ParameterError("parameter '" + k + "' has the wrong type");
      }
      // 5000 and 5000.0 must hash alike.
      params[k] = params[k].is_number_float() && v.is_number_integer() ? json(v.get<double>()) : v;
    }
  }
  c.params = params;
  if (c.params.contains("discard_cap")) {
    const double cap = c.params["discard_cap"].get<double>();
    if (!(cap >= 0.0 && cap < 1.0)) throw ParameterError("discard_cap must lie in [0, 1)");
  }
  if (c.replicas < 1) throw ParameterError("replicas must be >= 1");
  if (c.out.empty()) throw ParameterError("output path must be nonempty");
  return c;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  auto rows = find_experiment(c.experiment).run(c);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  for (auto& r : rows) r.wall_ms = ms;
  return rows;
}

void write_results(const ExperimentConfig& c, const std::vector<ResultRow>& rows,
                   const std::string& status) {
  namespace fs = std::filesystem;
  const fs::path dir(c.out);
  fs::create_directories(dir);
  if (!rows.empty()) {
    const fs::path csv = dir / (c.experiment + ".csv");
    const bool fresh = !fs::exists(csv) || fs::file_size(csv) == 0;
    std::ofstream f(csv, std::ios::app);
    if (fresh) f << csv_header() << '\n';
    for (const auto& r : rows) f << to_csv(r) << '\n';
    if (!f) throw std::runtime_error("cannot write " + csv.string());
  }
  json rec = {{"experiment", c.experiment},
              {"param_hash", config_hash(c)},
              {"seed", c.seed},
              {"replicas", c.replicas},
              {"rows", rows.size()},
              {"status", status},
              {"wall_ms", rows.empty() ? 0 : rows.front().wall_ms},
              {"config", c.to_json()}};
  std::ofstream m(dir / "manifest.jsonl", std::ios::app);
  m << rec.dump() << '\n';
  if (!m) throw std::runtime_error("cannot write the run manifest");
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const ParameterError*>(&e)) return 2;
  if (dynamic_cast<const json::exception*>(&e)) return 2;
  if (dynamic_cast<const StatisticalValidityError*>(&e)) return 3;
  if (dynamic_cast<const InvariantError*>(&e)) return 4;
  if (dynamic_cast<const TruncationError*>(&e)) return 4;
  return 1;
}

}  // namespace rwdre
