#include "ioda/rollout_store.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "ioda/error.hpp"
#include "ioda/json_codec.hpp"
#include "ioda/rng.hpp"

namespace ioda {

void record_rollout(const Policy& policy, const NavEnv& env, const State& s0, int rollout_id,
                    std::vector<StepRecord>& out) {
  if (!env.in_workspace(s0.agent) || !env.in_workspace(s0.goal)) {
    throw Error(ErrorCategory::kInvariant, "rollout start or goal outside the workspace");
  }
  State s = s0;
  for (int t = 0; t <= env.config().episode_cap; ++t) {
    if (!env.in_workspace(s.agent)) {
      throw Error(ErrorCategory::kInvariant,
                  "rollout " + std::to_string(rollout_id) + " left the workspace at t=" +
                      std::to_string(t));
    }
    const Action a = policy.act(s);
    out.push_back({rollout_id, t, s, a, env.reward(s, a)});
    if (env.at_goal(s)) return;
    s = env.step(s, a);
  }
  throw Error(ErrorCategory::kInvariant,
              "rollout " + std::to_string(rollout_id) + " did not reach its goal within the episode cap");
}

RolloutSet collect(const Policy& policy, const PolicySpec& spec, const NavEnv& env,
                   const CollectOptions& options) {
  if (options.n_rollouts < 1) throw Error(ErrorCategory::kUsage, "n_rollouts must be >= 1");
  RolloutSet set;
  set.meta = {spec, env.config().variant, options.seed, 1};
  Rng rng(options.seed);
  const auto& w = env.workspace();
  auto sample = [&] { return Vec2{rng.uniform(w.min.x, w.max.x), rng.uniform(w.min.y, w.max.y)}; };
  for (int id = 0; id < options.n_rollouts; ++id) {
    State s0;
    do {
      s0.agent = sample();
      s0.goal = sample();
    } while (norm2(s0.goal - s0.agent) < options.min_separation);
    record_rollout(policy, env, s0, id, set.records);
  }
  return set;
}

void validate(const RolloutSet& set, const NavEnv& env) {
  const auto fail = [](std::size_t i, const std::string& why) {
    throw Error(ErrorCategory::kInvariant, "record " + std::to_string(i) + ": " + why);
  };
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    const auto& r = set.records[i];
    if (!is_finite(r.state) || !is_finite(r.action) || !std::isfinite(r.reward)) {
      fail(i, "non-finite field");
    }
    if (!env.in_workspace(r.state.agent) || !env.in_workspace(r.state.goal)) {
      fail(i, "state outside the workspace");
    }
    if (i == 0) {
      if (r.rollout_id != 0 || r.t != 0) fail(i, "first record must be rollout 0, t 0");
      continue;
    }
    const auto& prev = set.records[i - 1];
    if (r.rollout_id == prev.rollout_id) {
      if (r.t != prev.t + 1) fail(i, "non-contiguous t within rollout");
    } else if (r.rollout_id == prev.rollout_id + 1) {
      if (r.t != 0) fail(i, "rollout must start at t 0");
      if (!env.at_goal(prev.state)) fail(i - 1, "rollout ends away from its goal");
    } else {
      fail(i, "rollout ids must be dense and ordered");
    }
  }
  if (!set.records.empty() && !env.at_goal(set.records.back().state)) {
    fail(set.records.size() - 1, "rollout ends away from its goal");
  }
}

std::vector<State> all_states(const RolloutSet& set) {
  std::vector<State> out;
  out.reserve(set.records.size());
  for (const auto& r : set.records) out.push_back(r.state);
  return out;
}

void write_rollouts(const RolloutSet& set, std::ostream& out) {
  Json header;
  header["meta"]["policy"] = policy_to_json(set.meta.policy);
  header["meta"]["variant"] = std::string(to_string(set.meta.variant));
  header["meta"]["seed"] = set.meta.seed;
  header["meta"]["version"] = set.meta.version;
  out << header.dump() << '\n';
  for (const auto& r : set.records) {
    Json j;
    j["rollout_id"] = r.rollout_id;
    j["t"] = r.t;
    j["state"] = state_to_json(r.state);
    j["action"] = action_to_json(r.action);
    j["reward"] = r.reward;
    out << j.dump() << '\n';
  }
}

namespace {

int int_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw Error(ErrorCategory::kFormat, std::string("missing or non-integer '") + key + "'");
  }
  return j[key].get<int>();
}

RolloutMeta parse_header(const Json& j) {
  if (!j.is_object() || !j.contains("meta") || !j["meta"].is_object()) {
    throw Error(ErrorCategory::kFormat, "expected meta header");
  }
  const Json& m = j["meta"];
  RolloutMeta meta;
  meta.version = int_field(m, "version");
  if (meta.version != 1) throw Error(ErrorCategory::kFormat, "unsupported rollout file version");
  if (!m.contains("policy")) throw Error(ErrorCategory::kFormat, "meta: missing policy");
  meta.policy = policy_from_json(m["policy"]);
  if (!m.contains("variant") || !m["variant"].is_string()) {
    throw Error(ErrorCategory::kFormat, "meta: missing variant");
  }
  meta.variant = parse_env_variant(m["variant"].get<std::string>());
  if (!m.contains("seed") || !m["seed"].is_number_integer()) {
    throw Error(ErrorCategory::kFormat, "meta: missing seed");
  }
  meta.seed = m["seed"].get<std::uint64_t>();
  return meta;
}

StepRecord parse_record(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCategory::kFormat, "expected record object");
  StepRecord r;
  r.rollout_id = int_field(j, "rollout_id");
  r.t = int_field(j, "t");
  if (!j.contains("state") || !j.contains("action") || !j.contains("reward")) {
    throw Error(ErrorCategory::kFormat, "record missing state/action/reward");
  }
  r.state = state_from_json(j["state"]);
  r.action = action_from_json(j["action"]);
  r.reward = number_from_json(j["reward"], "reward");
  return r;
}

}  // namespace

RolloutSet read_rollouts(std::istream& in, const NavEnv& env) {
  RolloutSet set;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      const Json j = Json::parse(line);
      if (!have_header) {
        set.meta = parse_header(j);
        have_header = true;
      } else {
        set.records.push_back(parse_record(j));
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorCategory::kFormat, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCategory::kFormat, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorCategory::kFormat, "line 1: missing meta header");
  try {
    validate(set, env);
  } catch (const Error& e) {
    throw Error(ErrorCategory::kInvariant, std::string("rollout file rejected: ") + e.what());
  }
  return set;
}

void save(const RolloutSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::kIo, "cannot open '" + path.string() + "' for writing");
  write_rollouts(set, out);
  out.flush();
  if (!out) throw Error(ErrorCategory::kIo, "write failed for '" + path.string() + "'");
}

RolloutSet load(const std::filesystem::path& path, const NavEnv& env) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open rollout file '" + path.string() + "'");
  return read_rollouts(in, env);
}

}  // namespace ioda
