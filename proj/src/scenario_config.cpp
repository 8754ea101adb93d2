#include "ioda/scenario_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "ioda/error.hpp"

namespace ioda {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw Error(ErrorCategory::kConfig, "config key '" + std::string(key) + "': expected " + expected +
                                          ", got '" + std::string(value) + "'");
}

double parse_double(std::string_view key, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  v = trim(v);
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  bad_value(key, v, "on|off");
}

Vec2 parse_vec(std::string_view key, std::string_view v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) bad_value(key, v, "'x,y'");
  return {parse_double(key, parts[0]), parse_double(key, parts[1])};
}

std::string print_vec(Vec2 v) { return format_double(v.x) + "," + format_double(v.y); }

struct Field {
  const char* key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, std::string_view)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"scenario.name", [](const auto& c) { return c.name; },
                 [](auto& c, std::string_view v) { c.name = std::string(v); }});
    f.push_back({"env.variant", [](const auto& c) { return std::string(to_string(c.env.variant)); },
                 [](auto& c, std::string_view v) { c.env.variant = parse_env_variant(v); }});
    f.push_back({"env.workspace.min", [](const auto& c) { return print_vec(c.env.workspace.min); },
                 [](auto& c, std::string_view v) { c.env.workspace.min = parse_vec("env.workspace.min", v); }});
    f.push_back({"env.workspace.max", [](const auto& c) { return print_vec(c.env.workspace.max); },
                 [](auto& c, std::string_view v) { c.env.workspace.max = parse_vec("env.workspace.max", v); }});
    f.push_back({"env.world.min", [](const auto& c) { return print_vec(c.env.workspace.world_min); },
                 [](auto& c, std::string_view v) { c.env.workspace.world_min = parse_vec("env.world.min", v); }});
    f.push_back({"env.world.max", [](const auto& c) { return print_vec(c.env.workspace.world_max); },
                 [](auto& c, std::string_view v) { c.env.workspace.world_max = parse_vec("env.world.max", v); }});
    f.push_back({"env.a_max", [](const auto& c) { return format_double(c.env.a_max); },
                 [](auto& c, std::string_view v) { c.env.a_max = parse_double("env.a_max", v); }});
    f.push_back({"env.episode_cap", [](const auto& c) { return std::to_string(c.env.episode_cap); },
                 [](auto& c, std::string_view v) { c.env.episode_cap = parse_int<int>("env.episode_cap", v); }});
    f.push_back({"env.goal_tolerance", [](const auto& c) { return format_double(c.env.goal_tolerance); },
                 [](auto& c, std::string_view v) { c.env.goal_tolerance = parse_double("env.goal_tolerance", v); }});
    f.push_back({"env.c_leave", [](const auto& c) { return format_double(c.env.c_leave); },
                 [](auto& c, std::string_view v) { c.env.c_leave = parse_double("env.c_leave", v); }});
    f.push_back({"env.c_ymove", [](const auto& c) { return format_double(c.env.c_ymove); },
                 [](auto& c, std::string_view v) { c.env.c_ymove = parse_double("env.c_ymove", v); }});
    f.push_back({"policy.kind", [](const auto& c) { return std::string(to_string(c.policy.kind)); },
                 [](auto& c, std::string_view v) { c.policy.kind = parse_policy_kind(v); }});
    f.push_back({"policy.gain", [](const auto& c) { return format_double(c.policy.gain); },
                 [](auto& c, std::string_view v) { c.policy.gain = parse_double("policy.gain", v); }});
    f.push_back({"policy.noise_seed", [](const auto& c) { return std::to_string(c.policy.noise_seed); },
                 [](auto& c, std::string_view v) {
                   c.policy.noise_seed = parse_int<std::uint64_t>("policy.noise_seed", v);
                 }});
    f.push_back({"rollouts.n", [](const auto& c) { return std::to_string(c.n_rollouts); },
                 [](auto& c, std::string_view v) { c.n_rollouts = parse_int<int>("rollouts.n", v); }});
    f.push_back({"rollouts.min_separation", [](const auto& c) { return format_double(c.min_separation); },
                 [](auto& c, std::string_view v) { c.min_separation = parse_double("rollouts.min_separation", v); }});
    f.push_back({"rollouts.path", [](const auto& c) { return c.rollouts_path.string(); },
                 [](auto& c, std::string_view v) { c.rollouts_path = std::string(v); }});
    f.push_back({"detector.metric", [](const auto& c) { return std::string(to_string(c.detector.metric.kind)); },
                 [](auto& c, std::string_view v) { c.detector.metric.kind = parse_metric_kind(v); }});
    f.push_back({"detector.weights",
                 [](const auto& c) {
                   std::string out;
                   for (double w : c.detector.metric.weights) out += (out.empty() ? "" : ",") + format_double(w);
                   return out;
                 },
                 [](auto& c, std::string_view v) {
                   const auto parts = split(v, ',');
                   if (parts.size() != 4) bad_value("detector.weights", v, "four comma-separated numbers");
                   for (std::size_t i = 0; i < 4; ++i) {
                     c.detector.metric.weights[i] = parse_double("detector.weights", parts[i]);
                   }
                 }});
    f.push_back({"detector.quantile", [](const auto& c) { return format_double(c.detector.quantile); },
                 [](auto& c, std::string_view v) { c.detector.quantile = parse_double("detector.quantile", v); }});
    f.push_back({"detector.epsilon",
                 [](const auto& c) { return c.detector.epsilon ? format_double(*c.detector.epsilon) : "auto"; },
                 [](auto& c, std::string_view v) {
                   if (v == "auto") {
                     c.detector.epsilon.reset();
                   } else {
                     c.detector.epsilon = parse_double("detector.epsilon", v);
                   }
                 }});
    f.push_back({"control.user_axes", [](const auto& c) { return to_string(c.partition); },
                 [](auto& c, std::string_view v) { c.partition = parse_axis_partition(v); }});
    f.push_back({"control.ioda", [](const auto& c) { return std::string(c.ioda_enabled ? "on" : "off"); },
                 [](auto& c, std::string_view v) { c.ioda_enabled = parse_bool("control.ioda", v); }});
    f.push_back({"scenario.start", [](const auto& c) { return print_vec(c.start); },
                 [](auto& c, std::string_view v) { c.start = parse_vec("scenario.start", v); }});
    f.push_back({"scenario.start_jitter", [](const auto& c) { return format_double(c.start_jitter); },
                 [](auto& c, std::string_view v) { c.start_jitter = parse_double("scenario.start_jitter", v); }});
    f.push_back({"scenario.subgoals",
                 [](const auto& c) {
                   std::string out;
                   for (const auto& g : c.plan.subgoals) out += (out.empty() ? "" : ";") + print_vec(g);
                   return out;
                 },
                 [](auto& c, std::string_view v) {
                   c.plan.subgoals.clear();
                   if (trim(v).empty()) return;
                   for (auto part : split(v, ';')) c.plan.subgoals.push_back(parse_vec("scenario.subgoals", part));
                 }});
    f.push_back({"scenario.primary_goal", [](const auto& c) { return print_vec(c.plan.primary_goal); },
                 [](auto& c, std::string_view v) { c.plan.primary_goal = parse_vec("scenario.primary_goal", v); }});
    f.push_back({"scenario.reach_radius", [](const auto& c) { return format_double(c.plan.reach_radius); },
                 [](auto& c, std::string_view v) { c.plan.reach_radius = parse_double("scenario.reach_radius", v); }});
    f.push_back({"user.gain", [](const auto& c) { return format_double(c.user_gain); },
                 [](auto& c, std::string_view v) { c.user_gain = parse_double("user.gain", v); }});
    f.push_back({"seed", [](const auto& c) { return std::to_string(c.seed); },
                 [](auto& c, std::string_view v) { c.seed = parse_int<std::uint64_t>("seed", v); }});
    f.push_back({"output.dir", [](const auto& c) { return c.output_dir.string(); },
                 [](auto& c, std::string_view v) { c.output_dir = std::string(v); }});
    f.push_back({"session.hold_ticks", [](const auto& c) { return std::to_string(c.session.hold_ticks); },
                 [](auto& c, std::string_view v) { c.session.hold_ticks = parse_int<int>("session.hold_ticks", v); }});
    f.push_back({"session.tick_hz", [](const auto& c) { return format_double(c.session.tick_hz); },
                 [](auto& c, std::string_view v) { c.session.tick_hz = parse_double("session.tick_hz", v); }});
    return f;
  }();
  return table;
}

}  // namespace

void set_config_value(ScenarioConfig& config, std::string_view key, std::string_view value) {
  for (const auto& field : fields()) {
    if (key == field.key) {
      field.set(config, trim(value));
      return;
    }
  }
  throw Error(ErrorCategory::kConfig, "unknown config key '" + std::string(key) + "'");
}

void validate(const ScenarioConfig& c) {
  const auto fail = [](const std::string& why) { throw Error(ErrorCategory::kConfig, why); };
  const NavEnv env(c.env);  // validates geometry and constants
  if (!(c.policy.gain > 0.0)) fail("policy.gain must be positive");
  if (c.n_rollouts < 1) fail("rollouts.n must be >= 1");
  if (c.min_separation < 0.0) fail("rollouts.min_separation must be non-negative");
  if (!(c.detector.quantile > 0.0 && c.detector.quantile <= 1.0)) fail("detector.quantile must lie in (0, 1]");
  if (c.detector.epsilon && !(*c.detector.epsilon > 0.0)) fail("detector.epsilon must be positive");
  for (double w : c.detector.metric.weights) {
    if (!(w >= 0.0)) fail("detector.weights must be non-negative");
  }
  if (!env.in_workspace(c.start)) fail("scenario.start must lie in the workspace");
  if (!env.in_workspace(c.plan.primary_goal)) fail("scenario.primary_goal must lie in the workspace");
  if (!(c.plan.reach_radius > 0.0)) fail("scenario.reach_radius must be positive");
  if (c.start_jitter < 0.0) fail("scenario.start_jitter must be non-negative");
  if (!(c.user_gain > 0.0)) fail("user.gain must be positive");
  if (c.session.hold_ticks < 0) fail("session.hold_ticks must be non-negative");
  if (!(c.session.tick_hz > 0.0)) fail("session.tick_hz must be positive");
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig config;
  apply_config_text(config, text);
  return config;
}

void apply_config_text(ScenarioConfig& config, std::string_view text) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCategory::kConfig, "config line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      try {
        set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
      } catch (const Error& e) {
        throw Error(ErrorCategory::kConfig, "config line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

std::string print_config(const ScenarioConfig& config) {
  std::string out;
  for (const auto& field : fields()) {
    out += field.key;
    out += " = ";
    out += field.get(config);
    out += '\n';
  }
  return out;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> builtin_scenario_names() { return {"freeze_ioda", "sporadic_baseline", "freeze_baseline"}; }

ScenarioConfig builtin_scenario(std::string_view name) {
  ScenarioConfig c;
  c.name = std::string(name);
  if (name == "freeze_ioda") {
    c.env.variant = EnvVariant::kFreezeYOutside;
    c.policy.kind = PolicyKind::kVariantCFreeze;
    c.ioda_enabled = true;
  } else if (name == "sporadic_baseline") {
    c.env.variant = EnvVariant::kLeavePenalty;
    c.policy.kind = PolicyKind::kVariantBSporadic;
    c.ioda_enabled = false;
  } else if (name == "freeze_baseline") {
    c.env.variant = EnvVariant::kFreezeYOutside;
    c.policy.kind = PolicyKind::kVariantCFreeze;
    c.ioda_enabled = false;
  } else {
    throw Error(ErrorCategory::kConfig, "unknown scenario '" + std::string(name) + "'");
  }
  c.rollouts_path = "rollouts_" + std::string(to_string(c.env.variant)) + ".jsonl";
  return c;
}

}  // namespace ioda
