#include <CLI11.hpp>

#include <iostream>

#include "hopflab/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = hopflab::cli;
  CLI::App app{"hopf-lab: batch experiments for degenerate fully nonlinear elliptic equations"};
  cli::RunRequest req;
  std::uint64_t seed = 0;
  std::string names;
  for (const auto& n : cli::experiment_names()) names += "\n  " + n;
  app.add_option("subcommand", req.subcommand, "experiment to run, or `run` to take it from the config:" + names)
      ->required();
  app.add_option("--config", req.config_path, "flat key = value config file")->required();
  app.add_option("--out", req.out_dir, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitUsage;
  }
  if (*seed_opt) req.seed = seed;
  const auto& valid = cli::experiment_names();
  if (req.subcommand != "run" && std::find(valid.begin(), valid.end(), req.subcommand) == valid.end()) {
    std::cerr << "hopf-lab: unknown experiment '" << req.subcommand << "'; valid experiments:";
    for (const auto& n : valid) std::cerr << " " << n;
    std::cerr << "\n";
    return cli::kExitUsage;
  }
  req.argv.assign(argv, argv + argc);
  return cli::run(req, std::cerr);
}
