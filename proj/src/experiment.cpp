#include "ioda/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ioda/error.hpp"
#include "ioda/rng.hpp"

namespace ioda {

namespace {

std::filesystem::path resolve_rollouts(const ScenarioConfig& config) {
  if (config.rollouts_path.is_absolute()) return config.rollouts_path;
  return config.output_dir / config.rollouts_path;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::kIo, "cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) throw Error(ErrorCategory::kIo, "write failed for '" + path.string() + "'");
}

Json metric_to_json(const StateMetric& m) {
  Json j;
  j["kind"] = std::string(to_string(m.kind));
  j["weights"] = Json::array({m.weights[0], m.weights[1], m.weights[2], m.weights[3]});
  return j;
}

}  // namespace

std::filesystem::path calibration_path(const std::filesystem::path& rollouts_path) {
  auto p = rollouts_path;
  p += ".calibration.json";
  return p;
}

ReferenceAssets build_reference(const ScenarioConfig& config, RolloutSet rollouts) {
  ReferenceAssets a;
  a.env = std::make_shared<const NavEnv>(config.env);
  a.rollouts = std::make_shared<const RolloutSet>(std::move(rollouts));
  a.index = std::make_shared<const StateIndex>(all_states(*a.rollouts), config.detector.metric);
  if (config.detector.epsilon) {
    a.detector = std::make_shared<const DistanceThresholdDetector>(
        a.index, *config.detector.epsilon, Calibration{config.detector.quantile, false});
  } else {
    a.detector = std::make_shared<const DistanceThresholdDetector>(
        DistanceThresholdDetector::calibrate(a.index, config.detector.quantile));
  }
  a.expectation = std::make_shared<const ProjectionExpectation>(a.index, a.detector);
  return a;
}

ReferenceAssets load_reference(const ScenarioConfig& config) {
  const NavEnv env(config.env);
  const auto path = resolve_rollouts(config);
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCategory::kIo, "rollout file '" + path.string() + "' not found (run collect first)");
  }
  RolloutSet set = load(path, env);
  if (set.meta.variant != config.env.variant) {
    throw Error(ErrorCategory::kConfig, "rollout file was collected for variant '" +
                                            std::string(to_string(set.meta.variant)) + "', config uses '" +
                                            std::string(to_string(config.env.variant)) + "'");
  }
  if (set.meta.policy.kind != config.policy.kind) {
    throw Error(ErrorCategory::kConfig, "rollout file was collected with policy '" +
                                            std::string(to_string(set.meta.policy.kind)) + "', config uses '" +
                                            std::string(to_string(config.policy.kind)) + "'");
  }
  if (const auto cal = calibration_path(path); std::filesystem::exists(cal)) {
    std::ifstream in(cal);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw Error(ErrorCategory::kFormat, "calibration summary '" + cal.string() + "': " + e.what());
    }
    if (j.contains("metric") && j["metric"] != metric_to_json(config.detector.metric)) {
      throw Error(ErrorCategory::kConfig, "rollout calibration metric " + j["metric"].dump() +
                                              " does not match config metric " +
                                              metric_to_json(config.detector.metric).dump());
    }
  }
  return build_reference(config, std::move(set));
}

std::shared_ptr<const Policy> make_policy(const ScenarioConfig& config, const NavEnv& env,
                                          std::uint64_t run_seed) {
  PolicySpec spec = config.policy;
  spec.noise_seed = hash_combine(config.policy.noise_seed, run_seed);
  return std::make_shared<const SurrogatePolicy>(spec, env);
}

State start_state(const ScenarioConfig& config, const NavEnv& env, std::uint64_t run_seed) {
  Rng rng(hash_combine(run_seed, 0x73746172ULL));
  const double j = config.start_jitter;
  Vec2 agent{config.start.x + rng.uniform(-j, j), config.start.y + rng.uniform(-j, j)};
  return {nearest_workspace_point(agent, env.workspace()), config.plan.primary_goal};
}

std::shared_ptr<const ControlPipeline> make_pipeline(const ScenarioConfig& config,
                                                     const ReferenceAssets& assets,
                                                     std::uint64_t run_seed) {
  return std::make_shared<const ControlPipeline>(assets.env, make_policy(config, *assets.env, run_seed),
                                                 assets.detector, assets.index, config.partition);
}

Episode::Episode(std::shared_ptr<const ControlPipeline> pipeline,
                 std::shared_ptr<const UserExpectation> expectation, SubgoalPlan plan, State start,
                 LoopMode mode)
    : pipeline_(std::move(pipeline)),
      expectation_(std::move(expectation)),
      plan_(std::move(plan)),
      state_(start),
      mode_(mode) {
  progress_.update(plan_, state_.agent);
}

bool Episode::finished() const {
  return progress_.primary_reached() || t_ >= pipeline_->env().config().episode_cap;
}

const TickRecord& Episode::advance(const UserCommand& u) {
  if (finished()) throw Error(ErrorCategory::kSession, "episode already finished");
  TickRecord rec;
  rec.mode = mode_;
  rec.decision = pipeline_->step(mode_, t_, state_, u);
  rec.detector_ood = mode_ == LoopMode::kIoda ? rec.decision.ood : pipeline_->detector().is_ood(state_);
  rec.gap = predictability_gap(*expectation_, rec.decision, pipeline_->policy(), pipeline_->env(),
                               pipeline_->partition());
  state_ = rec.decision.next_state;
  ++t_;
  progress_.update(plan_, state_.agent);
  rec.subgoals_reached = progress_.subgoals_reached();
  ticks_.push_back(rec);
  return ticks_.back();
}

MetricsSummary Episode::summary() const {
  MetricsSummary m;
  m.subgoals_reached = progress_.subgoals_reached();
  m.total_subgoals = plan_.subgoals.size();
  m.primary_goal_reached = progress_.primary_reached();
  m.steps = t_;
  double sum = 0.0;
  for (const auto& tick : ticks_) {
    sum += tick.gap;
    m.max_gap = std::max(m.max_gap, tick.gap);
    if (tick.detector_ood) ++m.ood_step_count;
  }
  m.mean_gap = ticks_.empty() ? 0.0 : sum / static_cast<double>(ticks_.size());
  return m;
}

RunResult run_scenario(const ScenarioConfig& config, const ReferenceAssets& assets,
                       std::uint64_t seed, LoopMode mode) {
  const NavEnv& env = *assets.env;
  Episode episode(make_pipeline(config, assets, seed), assets.expectation, config.plan,
                  start_state(config, env, seed), mode);
  while (!episode.finished()) {
    const UserCommand u =
        sim_user_command(episode.state(), config.plan, episode.progress(), config.user_gain, env.a_max());
    episode.advance(u);
  }
  return {seed, mode, episode.ticks(), episode.summary()};
}

std::vector<TickRecord> replay(const ScenarioConfig& config, const ReferenceAssets& assets,
                               std::uint64_t seed, const std::vector<UserCommand>& commands,
                               const std::vector<LoopMode>& modes) {
  if (commands.size() != modes.size()) {
    throw Error(ErrorCategory::kUsage, "replay: command and mode sequences differ in length");
  }
  Episode episode(make_pipeline(config, assets, seed), assets.expectation, config.plan,
                  start_state(config, *assets.env, seed), modes.empty() ? LoopMode::kIoda : modes.front());
  for (std::size_t i = 0; i < commands.size() && !episode.finished(); ++i) {
    episode.set_mode(modes[i]);
    episode.advance(commands[i]);
  }
  return episode.ticks();
}

Json user_command_to_json(const UserCommand& u) {
  Json j = Json::object();
  if (u.x) j["x"] = *u.x;
  if (u.y) j["y"] = *u.y;
  return j;
}

Json decision_to_json(const StepDecision& d) {
  Json j;
  j["t"] = d.t;
  j["input_state"] = state_to_json(d.input_state);
  j["ood"] = d.ood;
  j["imagined_state"] = d.imagined_state ? state_to_json(*d.imagined_state) : Json(nullptr);
  j["robot_action"] = action_to_json(d.robot_action);
  j["user_command"] = user_command_to_json(d.user_command);
  j["composed_action"] = action_to_json(d.composed_action);
  j["next_state"] = state_to_json(d.next_state);
  j["reward"] = d.reward;
  return j;
}

Json metrics_to_json(const MetricsSummary& m) {
  Json j;
  j["subgoals_reached"] = m.subgoals_reached;
  j["total_subgoals"] = m.total_subgoals;
  j["primary_goal_reached"] = m.primary_goal_reached;
  j["steps"] = m.steps;
  j["mean_gap"] = m.mean_gap;
  j["max_gap"] = m.max_gap;
  j["ood_step_count"] = m.ood_step_count;
  return j;
}

void write_trajectory(const ScenarioConfig& config, const RunResult& run, std::ostream& out) {
  Json header;
  header["meta"]["scenario"] = config.name;
  header["meta"]["variant"] = std::string(to_string(config.env.variant));
  header["meta"]["policy"] = policy_to_json(config.policy);
  header["meta"]["mode"] = std::string(to_string(run.mode));
  header["meta"]["seed"] = run.seed;
  header["meta"]["version"] = 1;
  out << header.dump() << '\n';
  for (const auto& tick : run.ticks) {
    Json j = decision_to_json(tick.decision);
    j["mode"] = std::string(to_string(tick.mode));
    j["gap"] = tick.gap;
    j["detector_ood"] = tick.detector_ood;
    j["subgoals_reached"] = tick.subgoals_reached;
    out << j.dump() << '\n';
  }
}

CalibrationSummary summarize_calibration(const ReferenceAssets& assets, double quantile) {
  CalibrationSummary c;
  c.metric = assets.index->metric();
  c.quantile = quantile;
  c.epsilon = assets.detector->epsilon();
  c.states = assets.index->size();
  if (assets.index->size() >= 2) {
    const auto loo = leave_one_out_distances(*assets.index);
    for (double q : {0.5, 0.9, 0.95, 0.99, 1.0}) c.loo_quantiles.emplace_back(q, order_statistic_quantile(loo, q));
  }
  return c;
}

Json calibration_to_json(const CalibrationSummary& c) {
  Json j;
  j["metric"] = metric_to_json(c.metric);
  j["quantile"] = c.quantile;
  j["epsilon"] = c.epsilon;
  j["states"] = c.states;
  Json qs = Json::array();
  for (const auto& [q, v] : c.loo_quantiles) qs.push_back(Json::array({q, v}));
  j["loo_nn_quantiles"] = qs;
  return j;
}

CollectOutput cmd_collect(const ScenarioConfig& config) {
  if (config.n_rollouts < 1) throw Error(ErrorCategory::kUsage, "rollouts.n must be >= 1");
  validate(config);
  const NavEnv env(config.env);
  const SurrogatePolicy policy(config.policy, env);
  RolloutSet set = collect(policy, config.policy, env,
                           {config.n_rollouts, config.seed, config.min_separation});

  CollectOutput out;
  out.rollouts = resolve_rollouts(config);
  out.calibration = calibration_path(out.rollouts);
  if (out.rollouts.has_parent_path()) ensure_dir(out.rollouts.parent_path());
  save(set, out.rollouts);
  const ReferenceAssets assets = build_reference(config, std::move(set));
  const CalibrationSummary cal = summarize_calibration(assets, config.detector.quantile);
  write_text(out.calibration, calibration_to_json(cal).dump(2) + "\n");
  out.rollouts_collected = assets.rollouts->rollout_count();
  out.states = assets.index->size();
  out.epsilon = assets.detector->epsilon();
  return out;
}

RunOutput cmd_run(const ScenarioConfig& config) {
  validate(config);
  const ReferenceAssets assets = load_reference(config);
  const LoopMode mode = config.ioda_enabled ? LoopMode::kIoda : LoopMode::kBaseline;
  const RunResult run = run_scenario(config, assets, config.seed, mode);

  ensure_dir(config.output_dir);
  const std::string stem = config.name + "_" + std::string(to_string(mode)) + "_s" + std::to_string(config.seed);
  RunOutput out;
  out.trajectory = config.output_dir / (stem + ".trajectory.jsonl");
  out.metrics = config.output_dir / (stem + ".metrics.json");
  std::ostringstream traj;
  write_trajectory(config, run, traj);
  write_text(out.trajectory, traj.str());
  write_text(out.metrics, metrics_to_json(run.summary).dump(2) + "\n");
  out.summary = run.summary;
  return out;
}

std::vector<SeedResult> run_seeds(const ScenarioConfig& config, const ReferenceAssets& assets,
                                  int n_seeds, std::size_t threads) {
  if (n_seeds < 1) throw Error(ErrorCategory::kUsage, "eval needs at least one seed");
  const std::vector<LoopMode> modes{LoopMode::kIoda, LoopMode::kBaseline};
  const auto per_mode = static_cast<std::size_t>(n_seeds);
  const std::size_t jobs = modes.size() * per_mode;
  std::vector<SeedResult> results(jobs);
  for (std::size_t job = 0; job < jobs; ++job) {
    results[job].mode = modes[job / per_mode];
    results[job].seed = config.seed + job % per_mode;
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
          try {
            auto& r = results[job];
            r.summary = run_scenario(config, assets, r.seed, r.mode).summary;
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<EvalRow> aggregate(const std::vector<SeedResult>& results) {
  std::vector<EvalRow> rows;
  for (LoopMode mode : {LoopMode::kIoda, LoopMode::kBaseline}) {
    EvalRow row;
    row.condition = std::string(to_string(mode));
    for (const auto& res : results) {
      if (res.mode != mode) continue;
      const auto& r = res.summary;
      ++row.seeds;
      row.success_rate += r.success() ? 1.0 : 0.0;
      row.subgoal_rate += r.total_subgoals == 0 ? 1.0
                                                : static_cast<double>(r.subgoals_reached) /
                                                      static_cast<double>(r.total_subgoals);
      row.mean_gap += r.mean_gap;
      row.mean_ood_steps += r.ood_step_count;
      row.mean_steps += r.steps;
    }
    if (row.seeds == 0) continue;
    const auto n = static_cast<double>(row.seeds);
    row.success_rate /= n;
    row.subgoal_rate /= n;
    row.mean_gap /= n;
    row.mean_ood_steps /= n;
    row.mean_steps /= n;
    rows.push_back(row);
  }
  return rows;
}

std::string format_eval_table(const ScenarioConfig& config, const std::vector<EvalRow>& rows) {
  std::string out = "scenario,variant,policy,condition,seeds,success_rate,subgoal_rate,mean_gap,mean_ood_steps,mean_steps\n";
  for (const auto& r : rows) {
    out += config.name + "," + std::string(to_string(config.env.variant)) + "," +
           std::string(to_string(config.policy.kind)) + "," + r.condition + "," + std::to_string(r.seeds) + "," +
           format_double(r.success_rate) + "," + format_double(r.subgoal_rate) + "," + format_double(r.mean_gap) +
           "," + format_double(r.mean_ood_steps) + "," + format_double(r.mean_steps) + "\n";
  }
  return out;
}

std::vector<EvalRow> cmd_eval(const ScenarioConfig& config, int n_seeds) {
  validate(config);
  if (n_seeds < 1) throw Error(ErrorCategory::kUsage, "eval needs at least one seed");
  const ReferenceAssets assets = load_reference(config);
  const auto results = run_seeds(config, assets, n_seeds);
  const auto rows = aggregate(results);

  const auto dir = config.output_dir / "eval";
  ensure_dir(dir);
  for (const auto& r : results) {
    write_text(dir / (config.name + "_" + std::string(to_string(r.mode)) + "_s" + std::to_string(r.seed) + ".json"),
               metrics_to_json(r.summary).dump(2) + "\n");
  }
  write_text(config.output_dir / (config.name + ".eval.csv"), format_eval_table(config, rows));
  return rows;
}

}  // namespace ioda
