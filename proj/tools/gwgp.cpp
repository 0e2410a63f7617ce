#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gwgp/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process modelling of guided-wave feature fields"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
  };
  Args args;

  for (const char* verb : {"synth", "fit", "predict", "compare", "sample-prior"}) {
    CLI::App* sub = app.add_subcommand(verb);
    sub->add_option("--config", args.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--seed", args.seed, "overrides the config seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gwgp::app::kExitValidation;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  return gwgp::app::run_command(verb, args.config, args.out, args.seed, std::cerr);
}
