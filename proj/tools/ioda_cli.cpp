// Batch and live entry point: collect | run | eval | serve.

#include <CLI11.hpp>
#include <chrono>
#include <csignal>
#include <iostream>
#include <optional>
#include <thread>

#include "ioda/error.hpp"
#include "ioda/experiment.hpp"
#include "ioda/server.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string ioda;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Scenario config file (key = value lines)");
  cmd->add_option("--scenario", o.scenario, "Start from a built-in scenario (freeze_ioda|sporadic_baseline|freeze_baseline)");
  cmd->add_option("--seed", o.seed, "Seed override");
  cmd->add_option("--out", o.out, "Output directory override");
  cmd->add_option("--ioda", o.ioda, "Loop mode override (on|off)")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--set", o.overrides, "Extra config override, key=value (repeatable)");
}

ioda::ScenarioConfig resolve_config(const CommonOptions& o) {
  ioda::ScenarioConfig config = o.scenario.empty() ? ioda::ScenarioConfig{} : ioda::builtin_scenario(o.scenario);
  if (!o.config_path.empty()) {
    if (!o.scenario.empty()) {
      throw ioda::Error(ioda::ErrorCategory::kUsage, "--config and --scenario are mutually exclusive");
    }
    config = ioda::load_config(o.config_path);
  }
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ioda::Error(ioda::ErrorCategory::kUsage, "--set expects key=value");
    ioda::set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) config.seed = *o.seed;
  if (!o.out.empty()) config.output_dir = o.out;
  if (!o.ioda.empty()) config.ioda_enabled = o.ioda == "on";
  return config;
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared-control workbench: imagined out-of-distribution actions"};
  app.require_subcommand(1);

  CommonOptions collect_opts, run_opts, eval_opts, serve_opts;
  auto* collect = app.add_subcommand("collect", "Collect the rollout history D and calibrate the detector");
  add_common(collect, collect_opts);

  auto* run = app.add_subcommand("run", "Run one scenario; writes a trajectory log and metrics");
  add_common(run, run_opts);

  int n_seeds = 50;
  auto* eval = app.add_subcommand("eval", "Run IODA and baseline over many seeds; writes an aggregate table");
  add_common(eval, eval_opts);
  eval->add_option("--seeds", n_seeds, "Number of seeds")->check(CLI::PositiveNumber);

  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Serve live teleoperation sessions over HTTP/WebSocket");
  add_common(serve, serve_opts);
  serve->add_option("--address", address, "Listen address");
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--static-dir", static_dir, "Directory with the UI bundle");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*collect) {
      const auto out = ioda::cmd_collect(resolve_config(collect_opts));
      std::cout << "collected " << out.rollouts_collected << " rollouts (" << out.states << " states) -> "
                << out.rollouts.string() << "\n"
                << "epsilon = " << ioda::format_double(out.epsilon) << " -> " << out.calibration.string() << "\n";
    } else if (*run) {
      const auto out = ioda::cmd_run(resolve_config(run_opts));
      std::cout << ioda::metrics_to_json(out.summary).dump() << "\n"
                << "trajectory -> " << out.trajectory.string() << "\n"
                << "metrics -> " << out.metrics.string() << "\n";
    } else if (*eval) {
      const auto config = resolve_config(eval_opts);
      const auto rows = ioda::cmd_eval(config, n_seeds);
      std::cout << ioda::format_eval_table(config, rows);
    } else if (*serve) {
      ioda::ServerOptions options;
      options.address = address;
      options.port = port;
      options.static_dir = static_dir;
      options.base = resolve_config(serve_opts);
      ioda::validate(options.base);
      ioda::TeleopServer server(options);
      const auto bound = server.start();
      std::cout << "listening on http://" << address << ":" << bound << std::endl;
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    }
  } catch (const ioda::Error& e) {
    std::cerr << "error [" << ioda::to_string(e.category()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
