#include "ioda/json_codec.hpp"

#include <string>

#include "ioda/error.hpp"

namespace ioda {

namespace {

std::array<double, 4> numbers4(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCategory::kFormat, std::string(what) + ": expected array of 4 numbers");
  }
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = number_from_json(j[i], what);
  return out;
}

std::array<double, 2> numbers2(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCategory::kFormat, std::string(what) + ": expected array of 2 numbers");
  }
  return {number_from_json(j[0], what), number_from_json(j[1], what)};
}

}  // namespace

Json state_to_json(const State& s) {
  return Json::array({s.agent.x, s.agent.y, s.goal.x, s.goal.y});
}

Json vec_to_json(Vec2 v) { return Json::array({v.x, v.y}); }

Json action_to_json(const Action& a) { return Json::array({a.dx, a.dy}); }

Json policy_to_json(const PolicySpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["gain"] = spec.gain;
  j["noise_seed"] = spec.noise_seed;
  return j;
}

double number_from_json(const Json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCategory::kFormat, std::string(what) + ": expected number");
  return j.get<double>();
}

State state_from_json(const Json& j) { return State::from_coords(numbers4(j, "state")); }

Vec2 vec_from_json(const Json& j) {
  const auto v = numbers2(j, "vec2");
  return {v[0], v[1]};
}

Action action_from_json(const Json& j) {
  const auto v = numbers2(j, "action");
  return {v[0], v[1]};
}

PolicySpec policy_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCategory::kFormat, "policy: expected object with string 'kind'");
  }
  PolicySpec spec;
  spec.kind = parse_policy_kind(j["kind"].get<std::string>());
  if (j.contains("gain")) spec.gain = number_from_json(j["gain"], "policy.gain");
  if (j.contains("noise_seed")) {
    if (!j["noise_seed"].is_number_unsigned() && !j["noise_seed"].is_number_integer()) {
      throw Error(ErrorCategory::kFormat, "policy.noise_seed: expected integer");
    }
    spec.noise_seed = j["noise_seed"].get<std::uint64_t>();
  }
  return spec;
}

}  // namespace ioda
