#include <iostream>

#include <CLI11.hpp>

#include "polaron/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = polaron::cli;
  CLI::App app{"polaron: Pekar, bipolaron and block-Hamiltonian numerics"};
  app.require_subcommand(1);
  cli::RunOptions opts;
  for (const auto& name : cli::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config, "INI config file")->required();
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--seed", opts.seed, "seed for randomized checks");
    sub->add_option("--threads", opts.threads, "worker threads for scans")
        ->check(CLI::PositiveNumber);
    sub->callback([&opts, name] { opts.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kValidation;
  }
  const auto result = cli::run(opts);
  if (result.exit_code != cli::kOk) std::cerr << "error: " << result.message << "\n";
  else std::cout << result.record.string() << "\n";
  return result.exit_code;
}
