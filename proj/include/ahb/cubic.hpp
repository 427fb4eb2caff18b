#pragma once

// Global minimization of the metric-regularized cubic model
//   m(u) = <g, u> + (1/2) <J u, u> + (L/6) |u|_H^3,   |u|_H = sqrt(<H u, u>),
// with H positive definite and J symmetric (possibly indefinite).
//
// Method: factor H = C^T C, whiten (w = C u), eigendecompose the whitened
// J. A stationary point satisfies w_i = -g_i / (lambda_i + sigma) with
// sigma = L r / 2 and r = |w|; the global minimizer is the unique sigma in
// [max(0, -lambda_min), inf) where |w(sigma)| = 2 sigma / L, found by
// safeguarded bracketing + Newton on the secular equation. When g has no
// component on the bottom eigenspace and the interior root does not exist,
// the minimizer sits at sigma = -lambda_min with a bottom-eigenvector
// component closing the norm gap (the hard case).

#include <cmath>
#include <limits>

#include "errors.hpp"
#include "types.hpp"

namespace ahb {

struct CubicInstance {
  Vector g;
  Matrix J;
  Matrix H;
  double L = 0.0;
};

struct CubicSolution {
  Vector u;
  double r = 0.0;                     // |u|_H
  double stationarity_residual = 0.0; // |g + J u + (L r / 2) H u|
  double min_eig_certificate = 0.0;   // min generalized eigenvalue of (J + (L r / 2) H, H)
};

inline double model_value(const CubicInstance& inst, const Vector& u) {
  if (u.size() != inst.g.size()) throw DimensionMismatch("model_value");
  const double rn = std::sqrt(std::max(0.0, u.dot(inst.H * u)));
  return inst.g.dot(u) + 0.5 * u.dot(inst.J * u) + (inst.L / 6.0) * rn * rn * rn;
}

inline CubicSolution solve_cubic(const CubicInstance& inst) {
  const Index p = inst.g.size();
  if (inst.J.rows() != p || inst.J.cols() != p || inst.H.rows() != p || inst.H.cols() != p)
    throw DimensionMismatch("solve_cubic: operand sizes disagree");
  if (!(inst.L > 0.0) || !std::isfinite(inst.L))
    throw InvalidParameter("solve_cubic: L must be positive and finite");
  CubicSolution sol;
  if (p == 0) {
    sol.u = Vector(0);
    sol.min_eig_certificate = std::numeric_limits<double>::infinity();
    return sol;
  }
  if (!inst.g.allFinite() || !inst.J.allFinite() || !inst.H.allFinite())
    throw NonFiniteValue("solve_cubic: non-finite instance data");

  Eigen::LLT<Matrix> llt(inst.H);
  if (llt.info() != Eigen::Success)
    throw FactorizationFailure("solve_cubic: H is not positive definite");

  // Whitened data: ghat = C^-T g, B = C^-T J C^-1 with C = U from H = L_c U.
  const Vector ghat = llt.matrixL().solve(inst.g);
  Matrix B = llt.matrixL().solve(inst.J);
  const Matrix Braw = llt.matrixL().solve(B.transpose()).transpose();
  B = 0.5 * (Braw + Braw.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(B);
  if (eig.info() != Eigen::Success)
    throw FactorizationFailure("solve_cubic: eigendecomposition failed");
  const Vector lam = eig.eigenvalues(); // ascending, deterministic ordering
  const Vector gt = eig.eigenvectors().transpose() * ghat;

  const double lam_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double sigma_lo = std::max(0.0, -lam(0));
  const double pole_tol = 1e-12 * lam_scale;
  const double gnorm = gt.norm();

  // Norm of the parametric stationary point, skipping pole coordinates.
  auto norm_at = [&](double sigma, bool skip_poles) {
    double s2 = 0.0;
    for (Index i = 0; i < p; ++i) {
      const double d = lam(i) + sigma;
      if (skip_poles && d <= pole_tol) continue;
      const double wi = gt(i) / d;
      s2 += wi * wi;
    }
    return std::sqrt(s2);
  };

  double g_pole2 = 0.0;
  Index first_pole = -1;
  for (Index i = 0; i < p; ++i) {
    if (lam(i) + sigma_lo <= pole_tol) {
      g_pole2 += gt(i) * gt(i);
      if (first_pole < 0) first_pole = i;
    }
  }
  const bool g_on_bottom = std::sqrt(g_pole2) > 1e-12 * (1.0 + gnorm);

  double sigma = sigma_lo;
  Vector wt(p);

  if (!g_on_bottom && norm_at(sigma_lo, true) <= 2.0 * sigma_lo / inst.L) {
    // Boundary solution at sigma = max(0, -lambda_min). If the norm falls
    // short, a bottom-eigenvector component makes up the difference.
    const double target = 2.0 * sigma_lo / inst.L;
    const double base = norm_at(sigma_lo, true);
    const double tau = std::sqrt(std::max(0.0, target * target - base * base));
    for (Index i = 0; i < p; ++i) {
      const double d = lam(i) + sigma_lo;
      wt(i) = (d <= pole_tol) ? 0.0 : -gt(i) / d;
    }
    if (first_pole >= 0 && tau > 0.0) {
      auto whitened_model = [&](const Vector& w) {
        const double rw = w.norm();
        return gt.dot(w) + 0.5 * w.dot(lam.asDiagonal() * w) + (inst.L / 6.0) * rw * rw * rw;
      };
      Vector wplus = wt, wminus = wt;
      wplus(first_pole) += tau;
      wminus(first_pole) -= tau;
      wt = (whitened_model(wminus) < whitened_model(wplus)) ? wminus : wplus;
    }
  } else {
    // Interior root of phi(sigma) = |w(sigma)| - 2 sigma / L on (sigma_lo, inf).
    // phi is strictly decreasing there; bracket then safeguarded Newton.
    auto phi = [&](double s) { return norm_at(s, false) - 2.0 * s / inst.L; };
    double a = sigma_lo;
    double b = sigma_lo + std::max({1.0, sigma_lo, 0.5 * inst.L * gnorm});
    int expand = 0;
    while (phi(b) > 0.0) {
      a = b;
      b = sigma_lo + 2.0 * (b - sigma_lo);
      if (++expand > 400)
        throw NoConvergence("solve_cubic: failed to bracket the secular root");
    }
    sigma = 0.5 * (a + b);
    bool converged = false;
    for (int it = 0; it < 300; ++it) {
      double n2 = 0.0, dn = 0.0;
      for (Index i = 0; i < p; ++i) {
        const double d = lam(i) + sigma;
        const double wi = gt(i) / d;
        n2 += wi * wi;
        dn += wi * wi / d;
      }
      const double nrm = std::sqrt(n2);
      const double f = nrm - 2.0 * sigma / inst.L;
      if (std::abs(f) <= 1e-12 * (1.0 + 2.0 * sigma / inst.L)) {
        converged = true;
        break;
      }
      if (f > 0.0) a = sigma; else b = sigma;
      const double fprime = (nrm > 0.0 ? -dn / nrm : 0.0) - 2.0 / inst.L;
      double next = (fprime < 0.0) ? sigma - f / fprime : 0.5 * (a + b);
      if (!(next > a && next < b) || it % 8 == 7) next = 0.5 * (a + b);
      sigma = next;
    }
    if (!converged)
      throw NoConvergence("solve_cubic: secular iteration did not reach tolerance");
    for (Index i = 0; i < p; ++i) wt(i) = -gt(i) / (lam(i) + sigma);
  }

  const Vector what = eig.eigenvectors() * wt;
  sol.u = llt.matrixU().solve(what);
  sol.r = (llt.matrixU() * sol.u).norm();
  const double shift = inst.L * sol.r / 2.0;
  sol.stationarity_residual = (inst.g + inst.J * sol.u + shift * (inst.H * sol.u)).norm();
  sol.min_eig_certificate = lam(0) + shift;
  if (!sol.u.allFinite())
    throw NonFiniteValue("solve_cubic: non-finite solution");
  return sol;
}

} // namespace ahb
