#include "rwdre/cli/models.hpp"

#include <algorithm>
#include <memory>

#include "rwdre/core/errors.hpp"
#include "rwdre/counterexample/soup.hpp"
#include "rwdre/environments/contact.hpp"
#include "rwdre/environments/east.hpp"
#include "rwdre/environments/independent_sites.hpp"

namespace rwdre {

using nlohmann::json;

namespace {

json defaults(const std::string& name) {
  if (name == "contact") return {{"lambda", 2.0}, {"depth", 0.0}, {"boundary", "frozen1"}};
  if (name == "east") return {{"rho", 0.5}, {"initial", "product"}, {"shared_clocks", true}};
  if (name == "renewal") return {{"weights", json::array({1.0, 1.0})}};
  if (name == "spinflip") return {{"nu", 1.0}, {"rho", 0.5}};
  if (name == "counterexample") return {{"L0", 1000}, {"k_max", 2}, {"forcing", "none"}};
  if (name == "blind") return {{"state", 0}};
  throw ParameterError("unknown model '" + name + "'");
}

void check_type(const std::string& key, const json& def, const json& v) {
  const bool ok = def.is_number() ? v.is_number()
                  : def.is_string() ? v.is_string()
                  : def.is_boolean() ? v.is_boolean()
                  : def.is_array() ? v.is_array()
                                   : true;
  if (!ok) throw ParameterError("model parameter '" + key + "' has the wrong type");
}

double number(const json& p, const char* key) { return p.at(key).get<double>(); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ParameterError(msg);
}

// Walker clocks on their own stream, keyed by the replica seed.
std::shared_ptr<ClockSource> walker_clocks(SiteRange window, double horizon, std::uint64_t seed) {
  return std::make_shared<LazyClocks>(window, horizon, 1.0, seed, Stream::WalkerClock);
}

SoupForcing parse_forcing(const std::string& s) {
  if (s == "none") return SoupForcing::None;
  if (s == "gray") return SoupForcing::AllGray;
  if (s == "black") return SoupForcing::AllBlack;
  if (s == "white") return SoupForcing::AllWhite;
  throw ParameterError("unknown soup forcing '" + s + "'");
}

ContactBoundary parse_boundary(const std::string& s) {
  if (s == "frozen0") return ContactBoundary::Frozen0;
  if (s == "frozen1") return ContactBoundary::Frozen1;
  if (s == "periodic") return ContactBoundary::Periodic;
  throw ParameterError("unknown contact boundary '" + s + "'");
}

EastInitial parse_east_initial(const std::string& s) {
  if (s == "product") return EastInitial::product();
  if (s == "zero_at") return EastInitial::zero_at(0);
  if (s == "front") return EastInitial::front(0);
  throw ParameterError("unknown East initial condition '" + s + "'");
}

}  // namespace

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"blind",   "contact",  "counterexample",
                                                 "east",    "renewal",  "spinflip"};
  return names;
}

StateSpace model_state_space(const std::string& name) {
  if (name == "renewal") return StateSpace::Count;
  if (name == "counterexample") return StateSpace::Color;
  defaults(name);
  return StateSpace::Binary;
}

json normalize_model_params(const std::string& name, const json& params) {
  json out = defaults(name);
  if (!params.is_null() && !params.is_object()) {
    throw ParameterError("model parameters must be an object");
  }
  if (params.is_object()) {
    for (const auto& [key, value] : params.items()) {
      if (!out.contains(key)) {
        throw ParameterError("unknown parameter '" + key + "' for model " + name);
      }
      check_type(key, out[key], value);
      out[key] = value;
    }
  }
  if (name == "contact") {
    require(number(out, "lambda") >= 0.0, "contact lambda must be >= 0");
    require(number(out, "depth") >= 0.0, "contact depth must be >= 0");
    parse_boundary(out["boundary"]);
  } else if (name == "east") {
    const double rho = number(out, "rho");
    require(rho > 0.0 && rho < 1.0, "East rho must lie in (0, 1)");
    parse_east_initial(out["initial"]);
  } else if (name == "renewal") {
    require(!out["weights"].empty(), "renewal weights must be nonempty");
    for (const auto& w : out["weights"]) {
      require(w.is_number() && w.get<double>() >= 0.0, "renewal weights must be >= 0");
    }
  } else if (name == "spinflip") {
    require(number(out, "nu") > 0.0, "spin-flip nu must be > 0");
    const double rho = number(out, "rho");
    require(rho >= 0.0 && rho <= 1.0, "spin-flip rho must lie in [0, 1]");
  } else if (name == "counterexample") {
    require(out["L0"].is_number_integer() && out["L0"].get<std::int64_t>() >= 2,
            "counterexample L0 must be an integer >= 2");
    require(out["k_max"].is_number_integer() && out["k_max"].get<int>() >= 0,
            "counterexample k_max must be an integer >= 0");
    parse_forcing(out["forcing"]);
  } else if (name == "blind") {
    require(out["state"].is_number_integer(), "blind state must be an integer");
  }
  return out;
}

Model make_model(const std::string& name, const json& raw) {
  const json p = normalize_model_params(name, raw);
  Model m;
  m.name = name;
  if (name == "contact") {
    ContactParams cp;
    cp.lambda = number(p, "lambda");
    cp.boundary = parse_boundary(p["boundary"]);
    const double depth =
        number(p, "depth") > 0.0 ? number(p, "depth") : contact_default_depth(cp.lambda);
    m.make = [cp, depth](std::uint64_t seed, SiteRange window, double horizon) {
      auto env = std::make_shared<EnvTrajectory>(contact_simulate(
          cp, ContactInitial::upper_invariant(depth), window, horizon, seed));
      return Replica{env, walker_clocks(window, horizon, seed)};
    };
  } else if (name == "east") {
    const double rho = number(p, "rho");
    const EastInitial init = parse_east_initial(p["initial"]);
    const bool shared = p["shared_clocks"].get<bool>();
    m.make = [rho, init, shared](std::uint64_t seed, SiteRange window, double horizon) {
      auto env = std::make_shared<EastProcess>(rho, window, horizon, seed, init);
      std::shared_ptr<ClockSource> clocks;
      if (shared) {
        // The clocks refer to the process; keep it alive with them.
        clocks = std::shared_ptr<ClockSource>(new EastClocks(*env),
                                              [env](ClockSource* c) { delete c; });
      } else {
        clocks = walker_clocks(window, horizon, seed);
      }
      return Replica{env, clocks};
    };
  } else if (name == "renewal") {
    RenewalParams rp;
    rp.weights = p["weights"].get<std::vector<double>>();
    const RenewalDynamics dyn(rp);
    m.make = [dyn](std::uint64_t seed, SiteRange window, double horizon) {
      auto env = std::make_shared<RenewalEnvironment>(dyn, window, horizon, seed);
      return Replica{env, walker_clocks(window, horizon, seed)};
    };
  } else if (name == "spinflip") {
    const SpinFlipDynamics dyn({number(p, "nu"), number(p, "rho")});
    m.make = [dyn](std::uint64_t seed, SiteRange window, double horizon) {
      auto env = std::make_shared<SpinFlipEnvironment>(dyn, window, horizon, seed);
      return Replica{env, walker_clocks(window, horizon, seed)};
    };
  } else if (name == "counterexample") {
    const auto L0 = p["L0"].get<std::int64_t>();
    const int k_max = p["k_max"].get<int>();
    const SoupForcing forcing = parse_forcing(p["forcing"]);
    const ScaleLadder ladder = build_ladder(LadderVariant::Counterexample, L0, k_max);
    m.make = [ladder, k_max, forcing](std::uint64_t seed, SiteRange window, double horizon) {
      std::shared_ptr<const RectangleSoup> soup;
      if (forcing == SoupForcing::None) {
        const Box box(static_cast<double>(window.lo) - 1.0, static_cast<double>(window.hi) + 1.0,
                      0.0, horizon);
        soup = std::make_shared<RectangleSoup>(ladder, k_max, box, seed);
      }
      auto env = std::make_shared<ColorEnvironment>(soup, window, horizon, forcing);
      return Replica{env, walker_clocks(window, horizon, seed)};
    };
  } else {
    const int state = p["state"].get<int>();
    m.make = [state](std::uint64_t seed, SiteRange window, double horizon) {
      std::vector<EnvTrajectory::SiteLog> logs(static_cast<std::size_t>(window.size()),
                                               EnvTrajectory::SiteLog{state, {}});
      auto env = std::make_shared<EnvTrajectory>(StateSpace::Binary, window, horizon,
                                                 std::move(logs));
      return Replica{env, walker_clocks(window, horizon, seed)};
    };
  }
  return m;
}

JumpRule make_rule(const json& spec, StateSpace space) {
  if (spec.is_string()) return make_rule(json{{"preset", spec}}, space);
  if (!spec.is_object()) throw ParameterError("rule must be a preset name or an object");
  if (spec.contains("table")) {
    const int radius = spec.value("radius", 0);
    require(radius >= 0 && radius <= 8, "rule radius must lie in [0, 8]");
    const auto& table = spec["table"];
    require(table.is_array() && table.size() == (std::size_t{1} << (2 * radius + 1)),
            "rule table needs 2^(2 radius + 1) entries");
    std::vector<JumpProbabilities> entries;
    for (const auto& e : table) {
      require(e.is_array() && e.size() == 3, "rule table entries are [right, stay, left]");
      entries.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
    }
    return JumpRule::table(radius, std::move(entries), spec.value("name", "table"));
  }
  const std::string preset = spec.value("preset", "");
  if (preset == "stay") return rule_stay();
  if (preset == "right") return rule_always_right();
  if (preset == "fair") return rule_fair();
  if (preset == "east_zero") return rule_east_zero();
  if (preset == "color_drift") return rule_color_drift();
  if (preset == "occupation_drift") {
    const json& p = spec.contains("p") ? spec["p"] : json(0.75);
    require(p.is_number(), "occupation_drift needs a numeric p");
    return rule_occupation_drift(space, p.get<double>());
  }
  throw ParameterError("unknown rule preset '" + preset + "'");
}

}  // namespace rwdre
