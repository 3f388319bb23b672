#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "rwdre/walker/model.hpp"
#include "rwdre/walker/walker.hpp"

namespace rwdre {

// Names accepted by make_model, sorted.
const std::vector<std::string>& model_names();

// Model parameters with defaults filled in; ParameterError on unknown keys,
// wrong types or out-of-range values.
//   contact:        lambda, depth (0 = default), boundary (frozen0|frozen1|periodic)
//   east:           rho, initial (product|zero_at|front), shared_clocks
//   renewal:        weights
//   spinflip:       nu, rho
//   counterexample: L0, k_max, forcing (none|gray|black|white)
//   blind:          state
nlohmann::json normalize_model_params(const std::string& name, const nlohmann::json& params);

// Replica factory for a named model. Walker clocks are rate-1 and drawn from
// their own stream, except on East with shared_clocks, where they are the
// East ring clocks themselves.
Model make_model(const std::string& name, const nlohmann::json& params);

// Rule from {"preset": stay|right|fair|east_zero|occupation_drift|color_drift,
// "p": ...} or {"radius": r, "table": [[right, stay, left], ...]}.
JumpRule make_rule(const nlohmann::json& spec, StateSpace space);

// State space of a named model.
StateSpace model_state_space(const std::string& name);

}  // namespace rwdre
