#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"workbench for a pair-pattern calculus with counting type systems"};
  app.require_subcommand(1);

  patcalc::cli::RunConfig config;
  std::string macros = "on";
  std::string pair_reading = "sum";

  auto add_common = [&](CLI::App* cmd, bool takes_term) {
    if (takes_term) {
      cmd->add_option("-e,--expr", config.expr, "inline expression");
      cmd->add_option("-f,--file", config.file, "input file");
      cmd->add_option("--macros", macros, "expand I/K/Delta/Omega macros (on|off)")
          ->check(CLI::IsMember({"on", "off"}));
      if (cmd->get_name() == "normalize")
        cmd->add_option("--strategy", config.strategy,
                        "head reduction, or a two-path joinability probe (head|full-probe)")
            ->check(CLI::IsMember({"head", "full-probe"}));
    } else {
      cmd->add_option("-f,--file", config.file, "input file")->required();
    }
    cmd->add_option("--max-steps", config.max_steps, "head-reduction step budget")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--system", config.system, "typing system (u|e)")
        ->check(CLI::IsMember({"u", "e"}));
    cmd->add_option("--out", config.out_path, "output path for derivations");
    cmd->add_option("--pair-e-reading", pair_reading,
                    "second index of the consuming pair rule (sum|paper)")
        ->check(CLI::IsMember({"sum", "paper"}));
  };

  add_common(app.add_subcommand("normalize", "head-normalize and print the trace"), true);
  add_common(app.add_subcommand("classify", "classify a term"), true);
  add_common(app.add_subcommand("check", "check a derivation document"), false);
  add_common(app.add_subcommand("synthesize", "synthesize a derivation for a term"), true);
  add_common(app.add_subcommand("verify", "compare synthesized and observed counters"), true);

  CLI::App* fuzz = app.add_subcommand("fuzz", "random-term property run");
  fuzz->add_option("--seed", config.seed, "generator seed");
  fuzz->add_option("--count", config.count, "number of terms")->check(CLI::PositiveNumber);
  fuzz->add_option("--size", config.size, "term size bound")->check(CLI::PositiveNumber);
  fuzz->add_option("--pair-e-reading", pair_reading,
                   "second index of the consuming pair rule (sum|paper)")
      ->check(CLI::IsMember({"sum", "paper"}));

  CLI11_PARSE(app, argc, argv);

  config.command = app.get_subcommands().front()->get_name();
  config.macros = macros == "on";
  config.pair_reading = pair_reading == "paper" ? patcalc::PairReading::Paper
                                                : patcalc::PairReading::Sum;
  return patcalc::cli::run_command(config, std::cout, std::cerr);
}
