// Command line front end: verify, flow, bvp and sweep scenarios.
//
// Exit status: 0 when every check passed, 1 when a check failed, 2 on any
// execution error (bad configuration, solver failure, I/O).

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "yamabe/errors.hpp"
#include "yamabe/experiments.hpp"

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--workers", c.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "random seed");
}

int execute(yamabe::Scenario scenario, const Common& c) {
  yamabe::ScenarioConfig config =
      c.config.empty() ? yamabe::default_config(scenario) : yamabe::load_config(c.config);
  if (config.scenario != scenario) {
    throw yamabe::ConfigError(std::string("configuration is for scenario '") + yamabe::to_string(config.scenario) +
                              "', not '" + yamabe::to_string(scenario) + "'");
  }
  if (c.workers) config.workers = *c.workers;
  if (c.seed) config.seed = *c.seed;

  const yamabe::ScenarioReport report = yamabe::run_scenario(config, c.out);
  for (const auto& row : report.checks) {
    std::printf("[%s] %-4s %-60s measured %.6g %s %.6g\n", row.passed ? "PASS" : "FAIL", row.criterion.c_str(),
                row.name.c_str(), row.measured, row.relation.c_str(), row.threshold);
  }
  std::printf("%s: %s (%.2f s), output in %s\n", yamabe::to_string(scenario),
              report.all_passed() ? "all checks passed" : "some checks failed", report.runtime_seconds,
              c.out.c_str());
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Yamabe flow lab: incomplete flows and removable singularities"};
  app.require_subcommand(1);

  Common verify_opts, flow_opts, bvp_opts, sweep_opts;
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  add_common(verify, verify_opts);
  auto* flow = app.add_subcommand("flow", "run one radial flow");
  add_common(flow, flow_opts);
  auto* bvp = app.add_subcommand("bvp", "solve an elliptic side problem");
  add_common(bvp, bvp_opts);
  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep, sweep_opts);
  std::string kind;
  sweep->add_option("--kind", kind, "removability, completeness or dichotomy")
      ->required()
      ->check(CLI::IsMember({"removability", "completeness", "dichotomy"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return execute(yamabe::Scenario::Verify, verify_opts);
    if (flow->parsed()) return execute(yamabe::Scenario::Flow, flow_opts);
    if (bvp->parsed()) return execute(yamabe::Scenario::Bvp, bvp_opts);
    return execute(yamabe::scenario_from_string(kind), sweep_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
