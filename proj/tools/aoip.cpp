// Command-line front end.
//
//   aoip solve    --config c.json | --preset fig3     rates and the bound
//   aoip simulate --preset fig4 [--horizon T]         run policies, report ages
//   aoip sweep    --preset fig3 [--out DIR]           replication ladder CSV
//   aoip oracle   --config tiny.json                  exact optimum, sandwich
//
// Exit codes: 0 ok, 2 bad config/flags, 3 invariant violation, 4 budget.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <aoip/experiment.hpp>

namespace {

struct CommonFlags {
  std::string config_path;
  std::string preset;
  aoip::i64 horizon = 0;
  std::vector<std::string> policies;
  std::string out_dir;
  std::string format;
  std::string checks;
};

void attach(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "JSON config file");
  sub->add_option("--preset", f.preset, "built-in setup: fig3 or fig4");
  sub->add_option("--horizon", f.horizon, "simulation slots T");
  sub->add_option("--policy", f.policies,
                  "policy to run (repeatable): power2, backoff, maxweight");
  sub->add_option("--out", f.out_dir, "directory for result files");
  sub->add_option("--format", f.format, "table format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--checks", f.checks, "runtime invariant checks: on or off")
      ->check(CLI::IsMember({"on", "off"}));
}

aoip::ExperimentConfig build_config(const CommonFlags& f) {
  if (f.config_path.empty() == f.preset.empty())
    throw aoip::config_error("give exactly one of --config or --preset");
  aoip::ExperimentConfig cfg = f.preset.empty()
                                   ? aoip::load_config(f.config_path)
                                   : aoip::preset_by_name(f.preset);
  if (f.horizon > 0) cfg.horizon = f.horizon;
  if (!f.policies.empty()) cfg.policies = f.policies;
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (!f.format.empty()) cfg.format = f.format;
  if (!f.checks.empty()) cfg.checks = (f.checks == "on");
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scheduling policies and bounds for weighted information ages"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* solve = app.add_subcommand("solve", "rate program and lower bound");
  CLI::App* simulate = app.add_subcommand("simulate", "run policies for T slots");
  CLI::App* sweep = app.add_subcommand("sweep", "replication ladder");
  CLI::App* oracle = app.add_subcommand("oracle", "exact optimum for tiny nets");
  for (CLI::App* sub : {solve, simulate, sweep, oracle}) attach(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const aoip::ExperimentConfig cfg = build_config(flags);
    if (solve->parsed()) return aoip::cmd_solve(cfg);
    if (simulate->parsed()) return aoip::cmd_simulate(cfg);
    if (sweep->parsed()) return aoip::cmd_sweep(cfg);
    return aoip::cmd_oracle(cfg);
  } catch (...) {
    return aoip::exit_code_for_current_exception();
  }
}
