#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ioda/control.hpp"
#include "ioda/json_codec.hpp"
#include "ioda/rollout_store.hpp"
#include "ioda/scenario_config.hpp"
#include "ioda/sim_user.hpp"

namespace ioda {

/// Read-only data derived from one rollout file: D, its index, the calibrated
/// detector and the expectation model. Shared by every run and session over that D.
struct ReferenceAssets {
  std::shared_ptr<const NavEnv> env;
  std::shared_ptr<const RolloutSet> rollouts;
  std::shared_ptr<const StateIndex> index;
  std::shared_ptr<const DistanceThresholdDetector> detector;
  std::shared_ptr<const ProjectionExpectation> expectation;
};

ReferenceAssets build_reference(const ScenarioConfig& config, RolloutSet rollouts);

/// Loads config.rollouts_path and rejects files collected for another variant,
/// policy kind, or (when a calibration summary sits next to it) metric.
ReferenceAssets load_reference(const ScenarioConfig& config);

std::filesystem::path calibration_path(const std::filesystem::path& rollouts_path);

/// The per-run policy; the sporadic surrogate's noise seed is mixed with the run seed.
std::shared_ptr<const Policy> make_policy(const ScenarioConfig& config, const NavEnv& env,
                                          std::uint64_t run_seed);

/// Scenario start (jittered per run seed, clamped to the workspace) with the primary goal.
State start_state(const ScenarioConfig& config, const NavEnv& env, std::uint64_t run_seed);

std::shared_ptr<const ControlPipeline> make_pipeline(const ScenarioConfig& config,
                                                     const ReferenceAssets& assets,
                                                     std::uint64_t run_seed);

struct TickRecord {
  StepDecision decision;
  LoopMode mode = LoopMode::kIoda;
  double gap = 0.0;
  bool detector_ood = false;  // detector verdict on the input state, in either mode
  std::size_t subgoals_reached = 0;
};

/// One scenario episode, advanced a tick at a time by whoever supplies the
/// user command (the simulated user in batch runs, a human in live sessions).
class Episode {
 public:
  Episode(std::shared_ptr<const ControlPipeline> pipeline,
          std::shared_ptr<const UserExpectation> expectation, SubgoalPlan plan, State start,
          LoopMode mode);

  const TickRecord& advance(const UserCommand& u);

  bool finished() const;
  const State& state() const { return state_; }
  int t() const { return t_; }
  LoopMode mode() const { return mode_; }
  void set_mode(LoopMode mode) { mode_ = mode; }
  const SubgoalPlan& plan() const { return plan_; }
  const PlanProgress& progress() const { return progress_; }
  const std::vector<TickRecord>& ticks() const { return ticks_; }
  const ControlPipeline& pipeline() const { return *pipeline_; }

  MetricsSummary summary() const;

 private:
  std::shared_ptr<const ControlPipeline> pipeline_;
  std::shared_ptr<const UserExpectation> expectation_;
  SubgoalPlan plan_;
  PlanProgress progress_;
  State state_;
  LoopMode mode_;
  int t_ = 0;
  std::vector<TickRecord> ticks_;
};

struct RunResult {
  std::uint64_t seed = 0;
  LoopMode mode = LoopMode::kIoda;
  std::vector<TickRecord> ticks;
  MetricsSummary summary;
};

/// Runs the scenario with the simulated user until the primary goal or the episode cap.
RunResult run_scenario(const ScenarioConfig& config, const ReferenceAssets& assets,
                       std::uint64_t seed, LoopMode mode);

/// Replays a recorded command/mode sequence through the batch loop.
std::vector<TickRecord> replay(const ScenarioConfig& config, const ReferenceAssets& assets,
                               std::uint64_t seed, const std::vector<UserCommand>& commands,
                               const std::vector<LoopMode>& modes);

Json decision_to_json(const StepDecision& d);
Json user_command_to_json(const UserCommand& u);
Json metrics_to_json(const MetricsSummary& m);

void write_trajectory(const ScenarioConfig& config, const RunResult& run, std::ostream& out);

struct CalibrationSummary {
  StateMetric metric;
  double quantile = 0.99;
  double epsilon = 0.0;
  std::size_t states = 0;
  std::vector<std::pair<double, double>> loo_quantiles;  // (q, value)
};

CalibrationSummary summarize_calibration(const ReferenceAssets& assets, double quantile);
Json calibration_to_json(const CalibrationSummary& c);

struct CollectOutput {
  std::filesystem::path rollouts;
  std::filesystem::path calibration;
  std::size_t rollouts_collected = 0;
  std::size_t states = 0;
  double epsilon = 0.0;
};

/// Collects D for the config's policy/variant and writes it with a calibration summary.
CollectOutput cmd_collect(const ScenarioConfig& config);

struct RunOutput {
  std::filesystem::path trajectory;
  std::filesystem::path metrics;
  MetricsSummary summary;
};

RunOutput cmd_run(const ScenarioConfig& config);

struct EvalRow {
  std::string condition;  // "ioda" | "baseline"
  std::size_t seeds = 0;
  double success_rate = 0.0;
  double subgoal_rate = 0.0;
  double mean_gap = 0.0;
  double mean_ood_steps = 0.0;
  double mean_steps = 0.0;
};

struct SeedResult {
  LoopMode mode = LoopMode::kIoda;
  std::uint64_t seed = 0;
  MetricsSummary summary;
};

/// Runs both loop modes over seeds [config.seed, config.seed + n_seeds), in parallel.
/// Result order is (mode, seed) regardless of scheduling.
std::vector<SeedResult> run_seeds(const ScenarioConfig& config, const ReferenceAssets& assets,
                                  int n_seeds, std::size_t threads = 0);
std::vector<EvalRow> aggregate(const std::vector<SeedResult>& results);
std::string format_eval_table(const ScenarioConfig& config, const std::vector<EvalRow>& rows);

/// Writes <name>.eval.csv plus per-seed metrics under output_dir/eval/.
std::vector<EvalRow> cmd_eval(const ScenarioConfig& config, int n_seeds);

}  // namespace ioda
