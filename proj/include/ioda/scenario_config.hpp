#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ioda/control.hpp"
#include "ioda/nav_env.hpp"
#include "ioda/policy.hpp"
#include "ioda/sim_user.hpp"
#include "ioda/state_metric.hpp"

namespace ioda {

struct DetectorConfig {
  StateMetric metric;
  double quantile = 0.99;
  std::optional<double> epsilon;  // overrides calibration when set

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

struct SessionConfig {
  int hold_ticks = 10;
  double tick_hz = 20.0;

  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

/// Everything that determines a run. Serialized as flat `key = value` lines with
/// dotted section keys; see docs/config.md for the key list.
struct ScenarioConfig {
  std::string name = "freeze_ioda";
  EnvConfig env = [] {
    EnvConfig e;
    e.variant = EnvVariant::kFreezeYOutside;
    return e;
  }();
  PolicySpec policy{PolicyKind::kVariantCFreeze, 1.0, 0};
  int n_rollouts = 1000;
  double min_separation = 0.1;
  std::filesystem::path rollouts_path = "rollouts.jsonl";
  DetectorConfig detector;
  AxisPartition partition = AxisPartition::user_x_only();
  bool ioda_enabled = true;
  Vec2 start{0.05, 0.05};
  double start_jitter = 0.02;
  SubgoalPlan plan{{{-0.25, 0.35}, {-0.25, 0.75}}, {0.2, 0.9}, 0.05};
  double user_gain = 1.0;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  SessionConfig session;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws Error(kConfig) on an inconsistent configuration.
void validate(const ScenarioConfig& config);

ScenarioConfig parse_config(std::string_view text);
/// Applies the `key = value` lines of `text` on top of `config`.
void apply_config_text(ScenarioConfig& config, std::string_view text);
std::string print_config(const ScenarioConfig& config);

ScenarioConfig load_config(const std::filesystem::path& path);

/// Applies `key = value` on top of an existing config (used for CLI overrides).
void set_config_value(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Built-in scenarios for the three navigation conditions:
/// freeze_ioda (freeze-y agent, IODA), sporadic_baseline (sporadic agent, no IODA),
/// freeze_baseline (freeze-y agent, no IODA).
std::vector<std::string> builtin_scenario_names();
ScenarioConfig builtin_scenario(std::string_view name);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace ioda
