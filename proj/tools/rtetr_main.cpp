#include <iostream>

#include "CLI11.hpp"
#include "experiment/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Radiative transport: simulation, time-reversal inversion and boundary control"};
  app.require_subcommand(1);

  rtetr::experiment::RunOptions options;
  std::string out;
  std::uint64_t seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Run the direct problem and record the outflow trace"},
      {"invert", "Reconstruct the initial condition from synthetic outflow data"},
      {"control", "Compute the minimum-norm inflow control for a target state"},
      {"validate", "Run the invariant checks of every module"},
      {"spectrum", "Estimate |S(t)|, |R(t)| and |Q(tau)| against the analytic bounds"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", options.config, "Experiment config (YAML)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_flag("--allow-inverse-crime", options.allow_inverse_crime,
                  "Generate synthetic data on the reconstruction grid");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rtetr::experiment::kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--out") > 0) options.out = out;
  if (chosen->count("--seed") > 0) options.seed = seed;
  return rtetr::experiment::run(chosen->get_name(), options, std::cout, std::cerr);
}
