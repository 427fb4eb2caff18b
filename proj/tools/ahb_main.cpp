// Command-line front end: solve, scaling, and verify subcommands over the
// built-in problem families.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ahb/ahb.hpp>

namespace {

void add_problem_options(CLI::App* cmd, ahb::RunConfig& cfg) {
  cmd->add_option("--problem", cfg.problem, "box_qp | poisson | lp_regression");
  cmd->add_option("--n", cfg.n, "primary dimension (box_qp/lp_regression size, poisson columns)");
  cmd->add_option("--m", cfg.m, "poisson: number of measurement rows");
  cmd->add_option("--seed", cfg.seed, "generator seed");
  cmd->add_option("--neg-frac", cfg.neg_frac, "box_qp: fraction of negative eigenvalues");
  cmd->add_flag("!--no-sum-constraint", cfg.sum_constraint, "box_qp: drop the mass constraint");
  cmd->add_option("--alpha", cfg.alpha, "poisson: regularization weight");
  cmd->add_option("--p", cfg.p, "poisson/lp_regression: power in (0,1)");
  cmd->add_option("--lambda", cfg.lambda, "lp_regression: penalty weight");
}

void add_solver_options(CLI::App* cmd, ahb::RunConfig& cfg) {
  cmd->add_option("--algo", cfg.algo, "ahba | sahba | ahba_restart | sahba_restart");
  cmd->add_option("--eps", cfg.eps, "target accuracy");
  cmd->add_option("--eps0", cfg.eps0, "restart variants: first epoch accuracy");
  cmd->add_option("--L0", cfg.L0, "initial curvature estimate");
  cmd->add_option("--mu", cfg.mu, "override the accuracy-derived barrier weight");
  cmd->add_option("--max-outer", cfg.max_outer, "outer iteration budget");
  cmd->add_option("--max-inner", cfg.max_inner, "line-search trials per outer iteration");
  cmd->add_flag("--center", cfg.center_start, "move the start to the analytic center");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive Hessian-barrier solvers for conically constrained minimization"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a key = value file");

  ahb::RunConfig cfg;

  CLI::App* solve = app.add_subcommand("solve", "run one solve and report the certificate");
  solve->configurable();
  add_problem_options(solve, cfg);
  add_solver_options(solve, cfg);
  solve->add_option("--trace", cfg.trace_path, "write the per-trial trace CSV here");
  solve->add_option("--report", cfg.report_path, "write the key = value report here");

  ahb::RunConfig scfg;
  scfg.center_start = true; // sweep semantics: common centered start
  std::vector<double> eps_list;
  std::string scaling_out;
  CLI::App* scaling = app.add_subcommand("scaling", "sweep eps and fit the iteration exponent");
  scaling->configurable();
  add_problem_options(scaling, scfg);
  scaling->add_option("--algo", scfg.algo, "ahba | sahba");
  scaling->add_option("--eps", eps_list, "accuracies to sweep")->expected(-1);
  scaling->add_option("--L0", scfg.L0, "initial curvature estimate");
  scaling->add_option("--max-outer", scfg.max_outer, "outer iteration budget per run");
  scaling->add_option("--max-inner", scfg.max_inner, "line-search trials per outer iteration");
  scaling->add_flag("--center,!--no-center", scfg.center_start,
                    "start every run from the analytic center (default on)");
  scaling->add_option("--out", scaling_out, "write the eps,outer,inner,fitted_exponent CSV here");

  ahb::RunConfig vcfg;
  CLI::App* verify = app.add_subcommand("verify", "numeric sanity checks for one problem");
  verify->configurable();
  add_problem_options(verify, vcfg);
  verify->add_option("--algo", vcfg.algo, "solver used for the smoke run");
  verify->add_option("--eps", vcfg.eps, "accuracy for the smoke run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cout, std::cerr);
    return ahb::kExitUserError;
  }

  try {
    if (solve->parsed()) return ahb::cli_solve(cfg);
    if (scaling->parsed()) {
      if (eps_list.empty()) eps_list = {1e-1, 1e-2, 1e-3};
      return ahb::cli_scaling(scfg, eps_list, scaling_out);
    }
    return ahb::cli_verify(vcfg);
  } catch (const ahb::UserError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ahb::kExitUserError;
  } catch (const ahb::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return ahb::kExitNumericError;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << '\n';
    return ahb::kExitNumericError;
  }
}
