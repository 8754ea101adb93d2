#include "ioda/session.hpp"

#include "ioda/error.hpp"

namespace ioda {

std::shared_ptr<const ReferenceAssets> AssetCache::get(const ScenarioConfig& config) {
  ScenarioConfig key_config;
  key_config.env = config.env;
  key_config.policy.kind = config.policy.kind;
  key_config.rollouts_path = config.rollouts_path;
  key_config.output_dir = config.output_dir;
  key_config.detector = config.detector;
  const std::string key = print_config(key_config);

  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto assets = std::make_shared<const ReferenceAssets>(load_reference(config));
  cache_.emplace(key, assets);
  return assets;
}

Json error_frame(const std::string& message) {
  Json j;
  j["type"] = "error";
  j["message"] = message;
  return j;
}

Session::Session(std::string id, ScenarioConfig config, std::shared_ptr<const ReferenceAssets> assets)
    : id_(std::move(id)),
      config_(std::move(config)),
      assets_(std::move(assets)),
      mode_(config_.ioda_enabled ? LoopMode::kIoda : LoopMode::kBaseline) {
  reset();
}

void Session::reset() {
  std::lock_guard lock(mutex_);
  episode_ = std::make_unique<Episode>(make_pipeline(config_, *assets_, config_.seed), assets_->expectation,
                                       config_.plan, start_state(config_, *assets_->env, config_.seed), mode_);
  held_ = {};
  ticks_since_command_ = 0;
  commands_.clear();
}

void Session::check_open_locked() const {
  if (closed_) throw Error(ErrorCategory::kSession, "session " + id_ + " is closed");
}

Json Session::frame_locked(const TickRecord* tick) const {
  const State& s = episode_->state();
  Json j;
  j["type"] = "frame";
  j["t"] = tick_counter_;
  j["agent"] = vec_to_json(s.agent);
  j["goal"] = vec_to_json(s.goal);
  if (tick) {
    const auto& d = tick->decision;
    j["ood"] = d.ood;
    j["imagined"] = d.imagined_state ? state_to_json(*d.imagined_state) : Json(nullptr);
    j["robot_action"] = action_to_json(d.robot_action);
    j["user_action"] = action_to_json(user_action(d.user_command, episode_->pipeline().partition()));
    j["composed"] = action_to_json(d.composed_action);
    j["reward"] = d.reward;
    j["mode"] = std::string(to_string(tick->mode));
  } else {
    j["ood"] = false;
    j["imagined"] = nullptr;
    j["robot_action"] = action_to_json({});
    j["user_action"] = action_to_json({});
    j["composed"] = action_to_json({});
    j["reward"] = 0.0;
    j["mode"] = std::string(to_string(mode_));
  }
  j["subgoals_reached"] = episode_->progress().subgoals_reached();
  return j;
}

Json Session::done_frame_locked() const {
  Json j;
  j["type"] = "done";
  j["metrics"] = metrics_to_json(episode_->summary());
  return j;
}

Json Session::current_frame() const {
  std::lock_guard lock(mutex_);
  return frame_locked(nullptr);
}

std::vector<Json> Session::tick() {
  std::lock_guard lock(mutex_);
  check_open_locked();
  if (episode_->finished()) return {done_frame_locked()};

  const UserCommand u = ticks_since_command_ < config_.session.hold_ticks ? held_ : UserCommand{};
  ++ticks_since_command_;
  episode_->set_mode(mode_);
  const TickRecord& rec = episode_->advance(u);
  commands_.push_back(u);
  ++tick_counter_;
  std::vector<Json> out{frame_locked(&rec)};
  if (episode_->finished()) out.push_back(done_frame_locked());
  return out;
}

void Session::set_command(const UserCommand& u) {
  std::lock_guard lock(mutex_);
  check_open_locked();
  validate(u, config_.partition, config_.env.a_max);
  held_ = u;
  ticks_since_command_ = 0;
}

void Session::set_mode(LoopMode mode) {
  std::lock_guard lock(mutex_);
  check_open_locked();
  mode_ = mode;
}

void Session::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
}

bool Session::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

bool Session::done() const {
  std::lock_guard lock(mutex_);
  return episode_->finished();
}

std::uint64_t Session::ticks() const {
  std::lock_guard lock(mutex_);
  return tick_counter_;
}

LoopMode Session::mode() const {
  std::lock_guard lock(mutex_);
  return mode_;
}

std::vector<UserCommand> Session::command_log() const {
  std::lock_guard lock(mutex_);
  return commands_;
}

std::vector<LoopMode> Session::mode_log() const {
  std::lock_guard lock(mutex_);
  std::vector<LoopMode> out;
  for (const auto& t : episode_->ticks()) out.push_back(t.mode);
  return out;
}

std::vector<State> Session::trajectory() const {
  std::lock_guard lock(mutex_);
  std::vector<State> out;
  for (const auto& t : episode_->ticks()) out.push_back(t.decision.input_state);
  out.push_back(episode_->state());
  return out;
}

std::optional<Json> Session::receive(const Json& message) {
  try {
    if (!message.is_object() || !message.contains("type") || !message["type"].is_string()) {
      return error_frame("message must be an object with a string 'type'");
    }
    const auto type = message["type"].get<std::string>();
    if (type == "cmd") {
      if (!message.contains("axes") || !message["axes"].is_object()) return error_frame("cmd: missing 'axes'");
      UserCommand u;
      for (const auto& [axis, value] : message["axes"].items()) {
        if (!value.is_number()) return error_frame("cmd: axis values must be numbers");
        if (axis == "x") {
          u.x = value.get<double>();
        } else if (axis == "y") {
          u.y = value.get<double>();
        } else {
          return error_frame("cmd: unknown axis '" + axis + "'");
        }
      }
      set_command(u);
    } else if (type == "toggle_ioda") {
      if (!message.contains("on") || !message["on"].is_boolean()) return error_frame("toggle_ioda: missing 'on'");
      set_mode(message["on"].get<bool>() ? LoopMode::kIoda : LoopMode::kBaseline);
    } else if (type == "reset") {
      {
        std::lock_guard lock(mutex_);
        check_open_locked();
      }
      reset();
    } else if (type == "close") {
      close();
    } else {
      return error_frame("unknown message type '" + type + "'");
    }
  } catch (const Error& e) {
    return error_frame(e.what());
  }
  return std::nullopt;
}

std::shared_ptr<Session> SessionRegistry::create(const ScenarioConfig& config) {
  validate(config);
  auto assets = assets_.get(config);
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_id_++);
  }
  auto session = std::make_shared<Session>(id, config, std::move(assets));
  std::lock_guard lock(mutex_);
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<Session> SessionRegistry::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

bool SessionRegistry::close(const std::string& id) {
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    session = it->second;
    sessions_.erase(it);
  }
  session->close();
  return true;
}

std::vector<std::string> SessionRegistry::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

}  // namespace ioda
