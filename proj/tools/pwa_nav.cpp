// pwa_nav: explore-and-navigate planner for control-affine systems on a box grid.
//
//   pwa_nav plan --scenario S --out DIR [--seed N] [--max-iters K]
//   pwa_nav truth-graph --scenario S --out DIR
//   pwa_nav sysid-check --scenario S --cell ID [--samples N] [--seed N] [--out DIR]
//
// PWA_NAV_LOG=error|info|debug selects the log level (default info, stderr).

#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "pwanav/cli.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_mt("pwa_nav");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("PWA_NAV_LOG")) {
    const std::string level(env);
    if (level == "error") {
      spdlog::set_level(spdlog::level::err);
    } else if (level == "debug") {
      spdlog::set_level(spdlog::level::debug);
    } else if (level != "info") {
      spdlog::warn("PWA_NAV_LOG='{}' not recognized; using info", level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Explore-and-navigate planner with local reachability tests"};
  app.require_subcommand(1);

  pwanav::cli::PlanOptions plan;
  std::optional<std::uint64_t> plan_seed;
  std::optional<int> plan_iters;
  auto* plan_cmd = app.add_subcommand("plan", "run a mission and write its artifacts");
  plan_cmd->add_option("--scenario", plan.scenario_path, "scenario JSON")->required();
  plan_cmd->add_option("--out", plan.out_dir, "output directory")->required();
  plan_cmd->add_option("--seed", plan_seed, "mission seed (defaults to sysid.seed)");
  plan_cmd->add_option("--max-iters", plan_iters, "iteration cap");

  std::string truth_scenario;
  std::string truth_out;
  auto* truth_cmd = app.add_subcommand("truth-graph", "decide every edge from exact linearizations");
  truth_cmd->add_option("--scenario", truth_scenario, "scenario JSON")->required();
  truth_cmd->add_option("--out", truth_out, "output directory")->required();

  pwanav::cli::SysidCheckOptions check;
  check.out_dir = ".";
  std::optional<int> check_samples;
  std::optional<std::uint64_t> check_seed;
  auto* check_cmd = app.add_subcommand("sysid-check", "identify one cell and compare with the truth");
  check_cmd->add_option("--scenario", check.scenario_path, "scenario JSON")->required();
  check_cmd->add_option("--cell", check.cell, "cell id")->required();
  check_cmd->add_option("--samples", check_samples, "override sysid.N");
  check_cmd->add_option("--seed", check_seed, "override sysid.seed");
  check_cmd->add_option("--out", check.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pwanav::cli::kExitConfig;
  }

  try {
    if (*plan_cmd) {
      plan.seed = plan_seed;
      plan.max_iterations = plan_iters;
      return pwanav::cli::cmd_plan(plan);
    }
    if (*truth_cmd) return pwanav::cli::cmd_truth_graph(truth_scenario, truth_out);
    check.samples = check_samples;
    check.seed = check_seed;
    return pwanav::cli::cmd_sysid_check(check);
  } catch (const pwanav::ConfigError& e) {
    spdlog::error("{}", e.what());
    return pwanav::cli::kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return pwanav::cli::kExitConfig;
  }
}
