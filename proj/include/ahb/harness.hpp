#pragma once

// Run orchestration shared by the command-line tool and the integration
// tests: problem lookup, solver dispatch, certificate reporting, and the
// epsilon-scaling sweep.
//
// Process exit codes: 0 converged (or all checks passed), 2 iteration budget
// exhausted, 3 bad input, 4 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "certification.hpp"
#include "errors.hpp"
#include "problems.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace ahb {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitMaxIterations = 2;
inline constexpr int kExitUserError = 3;
inline constexpr int kExitNumericError = 4;

struct RunConfig {
  std::string algo = "ahba"; // ahba | sahba | ahba_restart | sahba_restart
  std::string problem;       // box_qp | poisson | lp_regression
  Index n = 20;              // box_qp/lp_regression size; poisson column count
  Index m = 10;              // poisson row count
  std::uint64_t seed = 0;
  double eps = 1e-3;
  double eps0 = 1e-1;  // restart variants: first epoch accuracy
  double L0 = 1.0;     // initial curvature estimate (M0 for sahba)
  double mu = 0.0;     // <= 0 means the accuracy-derived default
  long max_outer = 2000000;
  int max_inner = 64;
  double neg_frac = 0.5;  // box_qp
  bool sum_constraint = true; // box_qp
  double alpha = 1.0;     // poisson regularization weight
  double p = 0.5;         // poisson / lp_regression exponent
  double lambda = 0.1;    // lp_regression
  bool center_start = false; // move the start to the analytic center first
  std::string trace_path;    // empty: no trace file
  std::string report_path;   // empty: report to stdout
};

inline ProblemBundle problem_by_name(const RunConfig& cfg) {
  if (cfg.problem == "box_qp")
    return build_box_qp(cfg.n, cfg.seed, cfg.neg_frac, cfg.sum_constraint);
  if (cfg.problem == "poisson") return build_poisson(cfg.n, cfg.m, cfg.alpha, cfg.p, cfg.seed);
  if (cfg.problem == "lp_regression") return build_lp_regression(cfg.n, cfg.lambda, cfg.p, cfg.seed);
  if (cfg.problem.empty()) throw InvalidParameter("no problem named; pick one of box_qp, poisson, lp_regression");
  throw InvalidParameter("unknown problem '" + cfg.problem + "'");
}

namespace detail {

inline void write_vector(std::ostream& os, const char* key, const Vector& v) {
  os << key << " =";
  for (Index i = 0; i < v.size(); ++i) os << ' ' << format_g17(v(i));
  os << '\n';
}

inline void write_scalar(std::ostream& os, const char* key, double v) {
  os << key << " = " << format_g17(v) << '\n';
}

} // namespace detail

// Least-squares slope of log(outer) against log(1/eps); 0 when the sweep has
// fewer than two points.
inline double fitted_exponent(const std::vector<double>& eps_list,
                              const std::vector<long>& outer_counts) {
  const std::size_t n = eps_list.size();
  if (n != outer_counts.size()) throw DimensionMismatch("fitted_exponent: length mismatch");
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(1.0 / eps_list[i]);
    const double y = std::log(static_cast<double>(std::max<long>(outer_counts[i], 1)));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double d = static_cast<double>(n) * sxx - sx * sx;
  if (d == 0.0) return 0.0;
  return (static_cast<double>(n) * sxy - sx * sy) / d;
}

struct SolveArtifacts {
  SolveOutput out;
  KktCertificate kkt;
  std::optional<SecondOrderCertificate> second_order; // sahba only
  double eps2 = 0.0;                                  // sahba only
  long restart_epochs = 0;                            // restart variants only
};

inline bool algo_is_second_order(const std::string& algo) {
  return algo == "sahba" || algo == "sahba_restart";
}

// Runs one solve per the config on a prebuilt problem. The certificates are
// evaluated at the returned pair (x, y) regardless of status, so a budget
// exit still reports how close it got.
inline SolveArtifacts run_configured(const ProblemBundle& pb, const RunConfig& cfg,
                                     TraceSink* sink = nullptr,
                                     std::string* warning = nullptr) {
  const bool second = algo_is_second_order(cfg.algo);
  const bool restart = cfg.algo == "ahba_restart" || cfg.algo == "sahba_restart";
  if (!second && cfg.algo != "ahba" && cfg.algo != "ahba_restart")
    throw InvalidParameter("unknown algorithm '" + cfg.algo + "'");

  Vector x0 = pb.x_start;
  if (cfg.center_start) x0 = analytic_center(pb.h, pb.c, x0);

  const Algo tag = second ? Algo::Sahba : Algo::Ahba;
  AhbaConfig acfg;
  acfg.eps = cfg.eps;
  acfg.L0 = cfg.L0;
  acfg.max_outer = cfg.max_outer;
  acfg.max_inner_per_step = cfg.max_inner;
  SahbaConfig scfg;
  scfg.eps = cfg.eps;
  scfg.M0 = cfg.L0;
  scfg.max_outer = cfg.max_outer;
  scfg.max_inner_per_step = cfg.max_inner;

  SolveArtifacts art;
  if (restart) {
    auto factory = [&](double eps_i) {
      const double mu_i = cfg.mu > 0.0 ? cfg.mu : default_mu(tag, eps_i, pb.h.nu);
      return Potential(pb.f, pb.h, mu_i);
    };
    RestartResult rr = restart_loop(tag, factory, pb.c, x0, cfg.eps0, cfg.eps,
                                    acfg, scfg, sink);
    art.out = rr.last;
    art.restart_epochs = rr.epochs;
  } else {
    const double mu = cfg.mu > 0.0 ? cfg.mu : default_mu(tag, cfg.eps, pb.h.nu);
    Potential pot(pb.f, pb.h, mu);
    art.out = second ? run_sahba(pot, pb.c, x0, scfg, sink, warning)
                     : run_ahba(pot, pb.c, x0, acfg, sink);
  }

  art.kkt = eps_kkt_certificate(art.out.x, art.out.y, art.out.mu, pb.h,
                                pb.f.gradient(art.out.x), pb.c);
  if (second) {
    art.eps2 = art.out.L_last_accepted * art.out.eps / (24.0 * pb.h.nu);
    NullBasis nb = build_null_basis(pb.c);
    art.second_order = second_order_certificate(art.out.x, nb, pb.f.hessian(art.out.x),
                                                pb.h, art.eps2);
  }
  return art;
}

inline void write_report(std::ostream& os, const ProblemBundle& pb, const RunConfig& cfg,
                         const SolveArtifacts& art) {
  const SolveOutput& out = art.out;
  os << "problem = " << pb.name << '\n';
  os << "algo = " << cfg.algo << '\n';
  os << "n = " << pb.f.dim << '\n';
  os << "constraint_rows = " << pb.c.rows() << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "status = "
     << (out.status == SolveStatus::Converged
             ? "converged"
             : (out.status == SolveStatus::MaxIterations ? "max_iterations" : "failure"))
     << '\n';
  detail::write_scalar(os, "eps", out.eps);
  detail::write_scalar(os, "mu", out.mu);
  detail::write_scalar(os, "nu", pb.h.nu);
  os << "outer_iterations = " << out.iterations << '\n';
  os << "inner_trials = " << out.inner_trials << '\n';
  if (art.restart_epochs > 0) os << "restart_epochs = " << art.restart_epochs << '\n';
  detail::write_scalar(os, "f_final", out.f_final);
  detail::write_scalar(os, "potential_final", out.Fmu_final);
  detail::write_scalar(os, "best_f_seen", out.best_f_seen);
  detail::write_scalar(os, "feasibility_residual", out.feas_residual);
  detail::write_scalar(os, "L_final", out.L_final);
  detail::write_scalar(os, "L_last_accepted", out.L_last_accepted);
  detail::write_scalar(os, "L_max_accepted", out.L_max_accepted);
  detail::write_scalar(os, "final_direction_norm", out.final_vnorm);
  detail::write_scalar(os, "stop_threshold", out.final_threshold);
  detail::write_scalar(os, "kkt_xi", art.kkt.xi);
  if (art.kkt.eps_bound)
    detail::write_scalar(os, "kkt_eps_bound", *art.kkt.eps_bound);
  else
    os << "kkt_eps_bound = unavailable\n";
  if (art.second_order) {
    detail::write_scalar(os, "eps2", art.second_order->eps2);
    detail::write_scalar(os, "second_order_min_eig", art.second_order->min_eig);
    os << "second_order_psd = " << (art.second_order->passed ? "yes" : "no") << '\n';
  }
  detail::write_vector(os, "x", out.x);
  detail::write_vector(os, "y", out.y);
  detail::write_vector(os, "s", out.s);
}

inline int status_exit_code(const SolveOutput& out) {
  switch (out.status) {
    case SolveStatus::Converged: return kExitConverged;
    case SolveStatus::MaxIterations: return kExitMaxIterations;
    default: return kExitNumericError;
  }
}

// solve subcommand body. Throws UserError/NumericError upward; the CLI maps
// those to exit codes 3 and 4.
inline int cli_solve(const RunConfig& cfg, std::ostream& console = std::cout) {
  ProblemBundle pb = problem_by_name(cfg);
  std::optional<CsvTraceSink> csv;
  if (!cfg.trace_path.empty()) csv.emplace(cfg.trace_path);
  std::string warning;
  SolveArtifacts art = run_configured(pb, cfg, csv ? &*csv : nullptr, &warning);
  if (!warning.empty()) console << "note: " << warning << '\n';
  if (!cfg.report_path.empty()) {
    std::ofstream rf(cfg.report_path);
    if (!rf) throw InvalidData("cannot open report path '" + cfg.report_path + "'");
    write_report(rf, pb, cfg, art);
    console << "report written to " << cfg.report_path << '\n';
  } else {
    write_report(console, pb, cfg, art);
  }
  return status_exit_code(art.out);
}

struct ScalingRow {
  double eps = 0.0;
  long outer = 0;
  long inner = 0;
  SolveArtifacts art;
};

// Holds the instance and the starting point fixed across the accuracy sweep;
// runs are sequential from coarsest to finest eps.
inline std::vector<ScalingRow> scaling_run(const ProblemBundle& pb, const RunConfig& cfg,
                                           const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw InvalidParameter("scaling: need at least one eps");
  for (double e : eps_list)
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidParameter("scaling: eps values must be positive");
  if (cfg.algo != "ahba" && cfg.algo != "sahba")
    throw InvalidParameter("scaling supports algo ahba or sahba");
  RunConfig base = cfg;
  base.trace_path.clear();
  Vector x0 = pb.x_start;
  if (cfg.center_start) x0 = analytic_center(pb.h, pb.c, x0);
  ProblemBundle fixed = pb;
  fixed.x_start = x0;
  base.center_start = false; // already applied once, shared by every run
  std::vector<ScalingRow> rows;
  rows.reserve(eps_list.size());
  for (double e : eps_list) {
    RunConfig rc = base;
    rc.eps = e;
    ScalingRow row;
    row.eps = e;
    row.art = run_configured(fixed, rc);
    row.outer = row.art.out.iterations;
    row.inner = row.art.out.inner_trials;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows) {
  std::vector<double> eps;
  std::vector<long> outer;
  for (const ScalingRow& r : rows) { eps.push_back(r.eps); outer.push_back(r.outer); }
  const double expo = fitted_exponent(eps, outer);
  os << "eps,outer,inner,fitted_exponent\n";
  for (const ScalingRow& r : rows)
    os << format_g17(r.eps) << ',' << r.outer << ',' << r.inner << ',' << format_g17(expo)
       << '\n';
}

inline int cli_scaling(const RunConfig& cfg, const std::vector<double>& eps_list,
                       const std::string& out_path, std::ostream& console = std::cout) {
  ProblemBundle pb = problem_by_name(cfg);
  std::vector<ScalingRow> rows = scaling_run(pb, cfg, eps_list);
  if (!out_path.empty()) {
    std::ofstream of(out_path);
    if (!of) throw InvalidData("cannot open output path '" + out_path + "'");
    write_scaling_csv(of, rows);
    console << "scaling table written to " << out_path << '\n';
  } else {
    write_scaling_csv(console, rows);
  }
  int worst = kExitConverged;
  for (const ScalingRow& r : rows) worst = std::max(worst, status_exit_code(r.art.out));
  return worst;
}

// verify subcommand: derivative and geometry sanity checks on a small
// instance of the named problem, then a short solve at loose accuracy.
inline int cli_verify(const RunConfig& cfg_in, std::ostream& console = std::cout) {
  RunConfig cfg = cfg_in;
  cfg.n = std::min<Index>(cfg.n, 12);
  cfg.m = std::min<Index>(cfg.m, 6);
  ProblemBundle pb = problem_by_name(cfg);
  int failures = 0;
  auto check = [&](const char* label, bool ok) {
    console << (ok ? "[PASS] " : "[FAIL] ") << label << '\n';
    if (!ok) ++failures;
  };

  const Vector& x0 = pb.x_start;
  check("start interior", pb.h.interior(x0));
  check("start feasible", pb.c.residual(x0) <= 1e-8 * (1.0 + pb.c.b.norm()));
  check("objective gradient matches finite differences", fd_check_gradient(pb.f, x0) < 1e-6);
  if (pb.f.hessian)
    check("objective hessian matches finite differences", fd_check_hessian(pb.f, x0) < 1e-4);
  ObjectiveModel hm = barrier_as_model(pb.h);
  check("barrier gradient matches finite differences", fd_check_gradient(hm, x0) < 1e-6);
  check("barrier hessian matches finite differences", fd_check_hessian(hm, x0) < 1e-4);
  LocalMetric metric(pb.h, x0);
  const Vector hg = pb.h.gradient(x0);
  const double load = hg.dot(metric.solve(hg));
  check("barrier parameter bound at start", load <= pb.h.nu * (1.0 + 1e-9));

  RunConfig solve_cfg = cfg;
  solve_cfg.eps = std::max(cfg.eps, 5e-2);
  solve_cfg.max_outer = 200000;
  SolveArtifacts art = run_configured(pb, solve_cfg);
  check("loose-accuracy solve converged", art.out.status == SolveStatus::Converged);
  check("solution feasible",
        art.out.feas_residual <= 1e-8 * (1.0 + pb.c.b.norm()) && pb.h.interior(art.out.x));
  check("kkt bound available", art.kkt.eps_bound.has_value());

  console << (failures == 0 ? "verify: all checks passed\n"
                            : "verify: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? kExitConverged : kExitNumericError;
}

} // namespace ahb
