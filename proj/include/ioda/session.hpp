#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ioda/experiment.hpp"

namespace ioda {

/// Caches reference assets per (rollout file, environment, detector settings) so
/// sessions over the same D share one index and detector.
class AssetCache {
 public:
  std::shared_ptr<const ReferenceAssets> get(const ScenarioConfig& config);

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const ReferenceAssets>> cache_;
};

/// One live teleoperation episode. The latest user command is held for
/// `session.hold_ticks` ticks after it arrives and then zeroed, so every tick has
/// a defined command and the session can be replayed through the batch loop.
///
/// All members are serialized by an internal mutex.
class Session {
 public:
  Session(std::string id, ScenarioConfig config, std::shared_ptr<const ReferenceAssets> assets);

  const std::string& id() const { return id_; }
  const ScenarioConfig& config() const { return config_; }

  /// Frame describing the current state without advancing (the start state right after creation).
  Json current_frame() const;

  /// Advances one step. Returns the step's frame, followed by the done frame when
  /// this step ended the episode; only the done frame once it has already ended.
  /// Throws Error(kSession) after close().
  std::vector<Json> tick();

  /// Handles one client message. Returns an error frame for rejected messages.
  std::optional<Json> receive(const Json& message);

  void set_command(const UserCommand& u);
  void set_mode(LoopMode mode);
  void reset();
  void close();

  bool closed() const;
  bool done() const;
  std::uint64_t ticks() const;
  LoopMode mode() const;

  /// Commands and loop modes actually applied since the last reset, one per step.
  std::vector<UserCommand> command_log() const;
  std::vector<LoopMode> mode_log() const;
  std::vector<State> trajectory() const;

 private:
  Json frame_locked(const TickRecord* tick) const;
  Json done_frame_locked() const;
  void check_open_locked() const;

  mutable std::mutex mutex_;
  std::string id_;
  ScenarioConfig config_;
  std::shared_ptr<const ReferenceAssets> assets_;
  std::unique_ptr<Episode> episode_;
  LoopMode mode_;
  UserCommand held_;
  int ticks_since_command_ = 0;
  std::uint64_t tick_counter_ = 0;
  bool closed_ = false;
  std::vector<UserCommand> commands_;
};

Json error_frame(const std::string& message);

/// Thread-safe registry of live sessions.
class SessionRegistry {
 public:
  std::shared_ptr<Session> create(const ScenarioConfig& config);
  std::shared_ptr<Session> find(const std::string& id) const;
  bool close(const std::string& id);
  std::vector<std::string> ids() const;

  AssetCache& assets() { return assets_; }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
  AssetCache assets_;
};

}  // namespace ioda
