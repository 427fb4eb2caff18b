#pragma once

// Feasible starting points and post-hoc optimality certificates.
//
// The KKT certificate turns a candidate (x, y) into a quantitative bound: if
// xi = | -(1/mu)(grad f - A^T y) - grad h(x) |*_x < 1, then every point of
// the domain closure satisfies
//   <grad f(x) - A^T y, z - x> >= -mu * (nu + (sqrt(nu) + xi) xi / (1 - xi)).

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "ahba.hpp"
#include "barrier.hpp"
#include "errors.hpp"
#include "linear_geometry.hpp"
#include "model.hpp"
#include "sahba.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace ahb {

// Damped Newton on the barrier restricted to {Ax = b}: step 1/(1 + lambda)
// until the decrement lambda falls to 1/2. The decrement gap omega*(1/2)
// ~= 0.193 is below nu for every barrier here, so the returned point serves
// as the approximate analytic center both solvers assume. Divergence (the
// barrier is unbounded below on the slice) surfaces as NoConvergence.
inline Vector analytic_center(const Barrier& h, const AffineConstraint& c,
                              const Vector& x_start, int max_iters = 500) {
  if (x_start.size() != h.dim) throw DimensionMismatch("analytic_center: start dimension");
  if (!h.interior(x_start)) throw InfeasibleStart("analytic_center: start is not interior");
  if (c.residual(x_start) > 1e-8 * (1.0 + c.b.norm()))
    throw InfeasibleStart("analytic_center: start violates the affine constraint");
  NullBasis nb = build_null_basis(c);
  Vector x = x_start;
  for (int it = 0; it < max_iters; ++it) {
    LocalMetric metric(h, x);
    KktSolution kkt = solve_first_order_kkt(metric.hessian(), c, nb, h.gradient(x));
    const double lambda = metric.norm(kkt.v);
    if (lambda <= 0.5) return x;
    x += kkt.v / (1.0 + lambda);
    if (!h.interior(x))
      throw NoConvergence("analytic_center: iterate left the domain");
  }
  throw NoConvergence(
      "analytic_center: Newton decrement stayed above 1/2 (barrier may be unbounded below "
      "on the feasible slice)");
}

struct KktCertificate {
  double xi = 0.0;
  std::optional<double> eps_bound; // absent when xi >= 1
};

inline KktCertificate eps_kkt_certificate(const Vector& x, const Vector& y, double mu,
                                          const Barrier& h, const Vector& f_grad,
                                          const AffineConstraint& c) {
  if (!(mu > 0.0)) throw InvalidParameter("eps_kkt_certificate: mu must be positive");
  if (!h.interior(x)) throw OutsideDomain("eps_kkt_certificate: x is not interior");
  Vector s = f_grad;
  if (c.rows() > 0) {
    if (y.size() != c.rows()) throw DimensionMismatch("eps_kkt_certificate: multiplier size");
    s -= c.A.transpose() * y;
  }
  LocalMetric metric(h, x);
  const Vector target = -(1.0 / mu) * s - h.gradient(x);
  KktCertificate cert;
  cert.xi = metric.dual_norm(target);
  if (cert.xi < 1.0) {
    const double nu = h.nu;
    cert.eps_bound = mu * (nu + (std::sqrt(nu) + cert.xi) * cert.xi / (1.0 - cert.xi));
  }
  return cert;
}

struct SecondOrderCertificate {
  double eps2 = 0.0;
  double min_eig = 0.0; // of Z^T (hess f + sqrt(eps2) H) Z
  bool passed = false;
};

inline SecondOrderCertificate second_order_certificate(const Vector& x, const NullBasis& nb,
                                                       const Matrix& f_hess, const Barrier& h,
                                                       double eps2, double tol_psd = 1e-8) {
  if (!(eps2 >= 0.0)) throw InvalidParameter("second_order_certificate: eps2 must be >= 0");
  if (!h.interior(x)) throw OutsideDomain("second_order_certificate: x is not interior");
  SecondOrderCertificate cert;
  cert.eps2 = eps2;
  if (nb.p() == 0) {
    cert.min_eig = std::numeric_limits<double>::infinity();
    cert.passed = true;
    return cert;
  }
  Matrix M = f_hess + std::sqrt(eps2) * h.hessian(x);
  const Matrix Mraw = nb.Z.transpose() * M * nb.Z;
  const Matrix Mr = 0.5 * (Mraw + Mraw.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Mr, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw FactorizationFailure("second_order_certificate: eigendecomposition failed");
  cert.min_eig = eig.eigenvalues()(0);
  cert.passed = cert.min_eig >= -tol_psd;
  return cert;
}

enum class Algo { Ahba, Sahba };

inline double default_mu(Algo algo, double eps, double nu) {
  return (algo == Algo::Ahba) ? eps / nu : eps / (4.0 * nu);
}

struct RestartResult {
  SolveOutput last;
  long epochs = 0;
  long total_iterations = 0;
  long total_inner = 0;
  std::vector<double> eps_schedule;
};

// Halving restarts: epoch i runs at eps_i = eps0 / 2^i warm-started at the
// previous output, stopping after the first epoch with eps_i <= eps_target.
// pot_factory(eps_i) supplies the potential (and its mu) for each epoch.
inline RestartResult restart_loop(Algo algo,
                                  const std::function<Potential(double)>& pot_factory,
                                  const AffineConstraint& c, const Vector& x_start,
                                  double eps0, double eps_target,
                                  const AhbaConfig& acfg_base, const SahbaConfig& scfg_base,
                                  TraceSink* sink = nullptr) {
  if (!(eps_target > 0.0) || !(eps0 >= eps_target))
    throw InvalidParameter("restart_loop: need eps0 >= eps_target > 0");
  RestartResult rr;
  Vector x = x_start;
  for (int i = 0;; ++i) {
    const double eps_i = std::ldexp(eps0, -i);
    Potential pot = pot_factory(eps_i);
    SolveOutput out;
    if (algo == Algo::Ahba) {
      AhbaConfig cfg = acfg_base;
      cfg.eps = eps_i;
      out = run_ahba(pot, c, x, cfg, sink);
    } else {
      SahbaConfig cfg = scfg_base;
      cfg.eps = eps_i;
      out = run_sahba(pot, c, x, cfg, sink);
    }
    rr.epochs += 1;
    rr.total_iterations += out.iterations;
    rr.total_inner += out.inner_trials;
    rr.eps_schedule.push_back(eps_i);
    rr.last = out;
    x = out.x;
    if (out.status != SolveStatus::Converged) break; // keep the honest status
    if (eps_i <= eps_target) break;
  }
  return rr;
}

} // namespace ahb
