#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "server.hpp"

using namespace trustnav;

namespace {

struct ServeArgs {
  std::vector<std::string> configs{"data/configs"};
  std::string condition = "informed-high";
  unsigned short port = 8080;
  std::string static_dir;
  std::string log_dir = "logs";
  std::string survey;
  std::uint64_t seed = 0;
  double grace_s = 60.0;
  int groups = 2;
  int tasks_per_group = 4;
  bool training = false;
  int cadence_ms = 500;
  int sensor_radius = kDefaultSensorRadius;
  std::uint64_t assess_seed = 0;
};

int serve(ServeArgs args, bool port_given) {
  if (const char* env = std::getenv("PORT"); env && !port_given) {
    try {
      args.port = static_cast<unsigned short>(std::stoul(env));
    } catch (const std::exception&) {
      std::cerr << "error: PORT='" << env << "' is not a port number\n";
      return 2;
    }
  }
  LibraryOptions lib;
  lib.seed = args.assess_seed;
  const auto library = TaskLibrary::build(load_configs(args.configs), lib);

  server::ServerOptions options;
  options.port = args.port;
  options.static_dir = args.static_dir;
  options.log_dir = args.log_dir;
  options.condition = parse_condition(args.condition);
  options.seed = args.seed;
  options.grace = std::chrono::milliseconds(static_cast<std::int64_t>(args.grace_s * 1000));
  options.session.groups = args.groups;
  options.session.tasks_per_group = args.tasks_per_group;
  options.session.training_round = args.training;
  options.session.cadence_ms = args.cadence_ms;
  options.session.sensor_radius = args.sensor_radius;
  if (!args.survey.empty()) {
    std::ifstream in(args.survey);
    if (!in) throw std::runtime_error("cannot open '" + args.survey + "'");
    options.instrument = SurveyInstrument::from_json(nlohmann::json::parse(in));
  }

  boost::asio::io_context ioc;
  server::Server srv(ioc, library, std::move(options));
  try {
    srv.start();
  } catch (const boost::system::system_error& e) {
    std::cerr << "error: cannot listen on port " << args.port << ": " << e.what() << "\n";
    return 1;
  }
  boost::asio::signal_set signals(ioc, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) {
    spdlog::info("shutting down");
    ioc.stop();
  });
  ioc.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competency-aware navigation testbed"};
  app.require_subcommand(1);

  cli::GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate grid configurations");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--n", gen.count, "Number of configurations")->capture_default_str();
  gen_cmd->add_option("--obstacle", gen.params.obstacle_density, "Obstacle density")->capture_default_str();
  gen_cmd->add_option("--debris", gen.params.debris_density, "Debris density")->capture_default_str();
  gen_cmd->add_option("--crater", gen.params.crater_density, "Crater density")->capture_default_str();
  gen_cmd->add_option("--width", gen.params.width)->capture_default_str();
  gen_cmd->add_option("--height", gen.params.height)->capture_default_str();
  gen_cmd->add_option("--prefix", gen.params.id_prefix, "Config id prefix")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->capture_default_str();

  cli::SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a configuration by value iteration");
  solve_cmd->add_option("config", solve.config, "Config file (JSON or ASCII)")->required();
  solve_cmd->add_option("--gamma", solve.solver.gamma)->capture_default_str();
  solve_cmd->add_option("--tolerance", solve.solver.tolerance)->capture_default_str();
  solve_cmd->add_option("--out", solve.out, "Output file (default stdout)");

  cli::AssessOptions assess;
  std::string oa_mode = "semantic";
  auto* assess_cmd = app.add_subcommand("assess", "Outcome assessment of a configuration");
  assess_cmd->add_option("config", assess.config, "Config file (JSON or ASCII)")->required();
  assess_cmd->add_option("--n", assess.params.n_rollouts, "Rollouts")->capture_default_str();
  assess_cmd->add_option("--seed", assess.seed, "Rollout seed");
  assess_cmd->add_option("--r-min", assess.params.r_min, "Reward threshold")->capture_default_str();
  assess_cmd->add_option("--oa-mode", oa_mode, "semantic | literal")
      ->check(CLI::IsMember({"semantic", "literal"}))
      ->capture_default_str();
  assess_cmd->add_option("--gamma", assess.params.solver.gamma)->capture_default_str();

  cli::HeadlessOptions headless;
  auto* headless_cmd = app.add_subcommand("run-headless", "Run simulated-operator sessions from a manifest");
  headless_cmd->add_option("manifest", headless.manifest, "Run manifest (JSON)")->required();
  headless_cmd->add_option("--seed", headless.seed, "Override the manifest seed");
  headless_cmd->add_option("--condition", headless.condition, "e.g. informed-high, random-random");
  headless_cmd->add_option("--operator", headless.op, "auto-only | manual-optimal | report-following | mixed");
  headless_cmd->add_option("--n", headless.n_sessions, "Override the session count");
  headless_cmd->add_option("--out", headless.out, "JSONL log path");

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Host live sessions over WebSocket");
  auto* port_opt = serve_cmd->add_option("--port", serve_args.port, "Listen port (PORT env otherwise)");
  serve_cmd->add_option("--configs", serve_args.configs, "Config files or directories")->capture_default_str();
  serve_cmd->add_option("--condition", serve_args.condition)->capture_default_str();
  serve_cmd->add_option("--seed", serve_args.seed, "Session plan seed");
  serve_cmd->add_option("--assess-seed", serve_args.assess_seed, "Assessment rollout seed");
  serve_cmd->add_option("--static", serve_args.static_dir, "Console asset directory");
  serve_cmd->add_option("--log-dir", serve_args.log_dir)->capture_default_str();
  serve_cmd->add_option("--survey", serve_args.survey, "Survey instrument JSON");
  serve_cmd->add_option("--grace", serve_args.grace_s, "Disconnect grace period, seconds")->capture_default_str();
  serve_cmd->add_option("--groups", serve_args.groups)->capture_default_str();
  serve_cmd->add_option("--tasks-per-group", serve_args.tasks_per_group)->capture_default_str();
  serve_cmd->add_flag("--training", serve_args.training, "Start with a training task");
  serve_cmd->add_option("--cadence-ms", serve_args.cadence_ms)->capture_default_str();
  serve_cmd->add_option("--sensor-radius", serve_args.sensor_radius)->capture_default_str();

  cli::AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Summarise session logs");
  analyze_cmd->add_option("logs", analyze.logs, "JSONL logs or directories");
  analyze_cmd->add_option("--out", analyze.out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return cli::cmd_gen(gen, std::cout, std::cerr);
    if (*solve_cmd) return cli::cmd_solve(solve, std::cout, std::cerr);
    if (*assess_cmd) {
      assess.params.mode = parse_oa_mode(oa_mode);
      return cli::cmd_assess(assess, std::cout, std::cerr);
    }
    if (*headless_cmd) return cli::cmd_run_headless(headless, std::cout, std::cerr);
    if (*serve_cmd) return serve(serve_args, port_opt->count() > 0);
    if (*analyze_cmd) return cli::cmd_analyze(analyze, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
