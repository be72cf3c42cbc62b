// Batch front-end for the homogenization toolkit.
//
// Subcommands: cell, fine, hom, sweep, verify, report. Exit codes:
//   0  all checks/windows met
//   2  solver failure
//   3  config or geometry error
//   4  a rate window or verification item failed

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "homog/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical homogenization toolkit for perforated-domain problems"};
  app.require_subcommand(1);

  homog::CliOptions opt;
  std::string eps_text = "1/4";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "run configuration file (key = value sections)");
    cmd->add_option("--out", opt.out_override, "output directory (overrides [output] dir)");
    cmd->add_option("--cache", opt.cache_override, "cache directory (overrides [output] cache)");
    cmd->add_option("--threads", opt.threads, "assembly worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "seed for randomized property checks");
  };

  CLI::App* cell = app.add_subcommand("cell", "solve the cell problems, print the effective tensor");
  add_common(cell);
  CLI::App* fine = app.add_subcommand("fine", "solve the fine problem at one epsilon");
  add_common(fine);
  fine->add_option("--eps", eps_text, "epsilon as 1/N (or plain N)");
  CLI::App* hom = app.add_subcommand("hom", "solve the homogenized limit problem");
  add_common(hom);
  CLI::App* sweep = app.add_subcommand("sweep", "run the epsilon sweep and emit the convergence report");
  add_common(sweep);
  CLI::App* verify = app.add_subcommand("verify", "run the identity/compatibility/bound checks");
  add_common(verify);
  CLI::App* report = app.add_subcommand("report", "refit rates from an existing report.csv");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  if (cell->parsed()) return homog::cmd_cell(opt, std::cout);
  if (fine->parsed()) return homog::cmd_fine(opt, eps_text, std::cout);
  if (hom->parsed()) return homog::cmd_hom(opt, std::cout);
  if (sweep->parsed()) return homog::cmd_sweep(opt, std::cout);
  if (verify->parsed()) return homog::cmd_verify(opt, std::cout);
  if (report->parsed()) return homog::cmd_report(opt, std::cout);
  return homog::exit_config_error;
}
