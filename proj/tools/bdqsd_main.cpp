#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bdqsd/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quasi-stationary analysis of density-dependent birth-and-death processes"};
  app.require_subcommand(1);

  bdqsd::RunOptions opt;
  std::string out_dir = ".";
  std::string config;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", opt.seed, "master seed");
  app.add_flag("--oracle", opt.oracle, "run the tridiagonal eigensolver cross-check");
  app.add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);

  const char* names[][2] = {
      {"validate", "check the model assumptions (report.json)"},
      {"analyze", "eigenvalue, eigenvector, QSD and extinction times (analysis.json, qsd.csv)"},
      {"sweep", "headline quantities over a list of K (sweep.csv)"},
      {"simulate", "stochastic simulation cross-check (sim.csv, sim.json)"},
      {"yaglom", "transient convergence to the QSD (yaglom.csv, yaglom.json)"},
  };
  for (const auto& [name, help] : names) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "JSON config file")->required();
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opt.out_dir = out_dir;
  return bdqsd::run_command(app.get_subcommands().front()->get_name(), config, opt, std::cerr);
}
