#pragma once

#include <json.hpp>

#include "ioda/nav_env.hpp"
#include "ioda/policy.hpp"

namespace ioda {

/// Field order in every emitted record is part of the file contract.
using Json = nlohmann::ordered_json;

Json state_to_json(const State& s);
Json vec_to_json(Vec2 v);
Json action_to_json(const Action& a);
Json policy_to_json(const PolicySpec& spec);

/// These throw Error(kFormat) on shape or type mismatch.
State state_from_json(const Json& j);
Vec2 vec_from_json(const Json& j);
Action action_from_json(const Json& j);
PolicySpec policy_from_json(const Json& j);
double number_from_json(const Json& j, const char* what);

}  // namespace ioda
