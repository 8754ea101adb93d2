#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "ioda/scenario_config.hpp"
#include "ioda/session.hpp"

namespace ioda {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks an ephemeral port
  std::filesystem::path static_dir;
  ScenarioConfig base;  // defaults for POSTed session configs
  int threads = 2;
};

/// HTTP + WebSocket front end for live sessions.
///
///   GET  /api/scenarios            built-in scenario list
///   GET  /api/sessions             live session ids
///   POST /api/sessions[?scenario=] create; body is `key = value` config overrides
///   GET  /ws/<session id>          WebSocket: frames at session.tick_hz, client messages in
///   GET  /<path>                   static UI assets from static_dir
class TeleopServer {
 public:
  explicit TeleopServer(ServerOptions options);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  /// Binds and starts the I/O threads; returns the bound port.
  unsigned short start();
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  SessionRegistry& registry();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ioda
