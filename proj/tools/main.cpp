// ddes: solve and verify delay differential equation initial value problems
// described by problem-definition files.
#include <iostream>

#include "CLI11.hpp"
#include "dde/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Fixed-point solver for state-dependent delay differential "
      "equations with certified operator bounds"};
  app.require_subcommand(1);

  dde::CliOptions opt;

  auto add_common = [&opt](CLI::App* cmd, bool needs_file) {
    if (needs_file)
      cmd->add_option("file", opt.file,
                      "problem-definition file ([problem]/[prehistory]/"
                      "[solver]/[output] sections; keys: family, dim, h, T, "
                      "lags, coeffs, lag_const, f_coeff, g3_coeff, kernel, "
                      "kernel_mode; kind, value, slope, samples, file; delta, "
                      "theta, fp_tol, fp_sup_tol, max_iters, alpha1, "
                      "alpha_max, rho_max; trajectory, metadata, report, "
                      "pairs)")
          ->required();
    cmd->add_option("--delta", opt.delta,
                    "grid spacing override; must divide h and T");
    cmd->add_option("--out", opt.out, "primary output path override");
  };

  CLI::App* solve =
      app.add_subcommand("solve", "solve the problem, write CSV + metadata");
  add_common(solve, true);

  CLI::App* certify = app.add_subcommand(
      "certify", "run every operator-bound sweep, emit a JSON report");
  certify->add_option("--seed", opt.seed, "sweep seed (default 0)");
  certify->add_option("--out", opt.out, "report path (default: stdout)");

  CLI::App* dd = app.add_subcommand(
      "depend-datum",
      "perturbation ladder on the initial datum, report difference ratios");
  add_common(dd, true);

  CLI::App* dr = app.add_subcommand(
      "depend-rhs",
      "perturbation ladder on the right-hand side, report difference ratios");
  add_common(dr, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  opt.command = app.get_subcommands().front()->get_name();
  return dde::run(opt, std::cout, std::cerr);
}
