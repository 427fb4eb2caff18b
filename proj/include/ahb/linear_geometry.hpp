#pragma once

// Affine equality constraints Ax = b and the null-space reduction used by
// every KKT solve. Z comes from a rank-revealing Householder QR of A^T: the
// trailing columns of Q span ker(A), are orthonormal, and are computed once
// per constraint since A never changes during a run.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"
#include "types.hpp"

namespace ahb {

struct AffineConstraint {
  Matrix A; // m x n, full row rank (m == 0 means unconstrained)
  Vector b; // length m
  double rank_tol = 0.0;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
  double residual(const Vector& x) const {
    if (rows() == 0) return 0.0;
    return (A * x - b).norm();
  }
};

inline AffineConstraint make_affine(Matrix A, Vector b, double rank_tol = -1.0) {
  if (A.rows() != b.size())
    throw DimensionMismatch("make_affine: A and b disagree on the row count");
  if (A.cols() < 1) throw InvalidDimension("make_affine: A needs at least one column");
  if (!A.allFinite() || !b.allFinite())
    throw InvalidData("make_affine: constraint data must be finite");
  if (A.rows() > A.cols())
    throw RankDeficient("make_affine: more rows than columns cannot have full row rank");
  AffineConstraint c;
  const double amax = (A.size() == 0) ? 0.0 : A.cwiseAbs().maxCoeff();
  c.rank_tol = (rank_tol > 0.0)
                   ? rank_tol
                   : 1e-10 * static_cast<double>(std::max(A.rows(), A.cols())) *
                         std::max(amax, 1.0);
  c.A = std::move(A);
  c.b = std::move(b);
  return c;
}

struct NullBasis {
  Matrix Z;      // n x p, orthonormal columns spanning ker(A)
  Index m = 0;   // rows of the source constraint
  Index n = 0;   // columns of the source constraint
  Index p() const { return Z.cols(); }
};

inline NullBasis build_null_basis(const AffineConstraint& c) {
  NullBasis nb;
  nb.m = c.rows();
  nb.n = c.cols();
  if (nb.m == 0) {
    nb.Z = Matrix::Identity(nb.n, nb.n);
    return nb;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(c.A.transpose());
  const auto& R = qr.matrixR();
  Index rank = 0;
  const Index kmax = std::min(nb.m, nb.n);
  for (Index k = 0; k < kmax; ++k)
    if (std::abs(R(k, k)) > c.rank_tol) ++rank;
  if (rank < nb.m) {
    std::ostringstream os;
    os << "build_null_basis: A has row rank " << rank << " < " << nb.m;
    throw RankDeficient(os.str());
  }
  Matrix Q = qr.householderQ();
  nb.Z = Q.rightCols(nb.n - nb.m);
  return nb;
}

struct KktSolution {
  Vector v; // primal direction, A v = 0
  Vector y; // multiplier for the affine constraint
};

// Solves  g + H v - A^T y = 0,  A v = 0  in whitened form: with H = R^T R the
// reduced normal equations (Z^T H Z) u = -Z^T g are the least-squares problem
//   min_u | R Z u + R^{-T} g |_2,
// solved by Householder QR of R Z. This keeps the error of the identity
// <g, v> = -v^T H v near sqrt(cond(H)) * machine-eps instead of cond(H) *
// machine-eps; barrier Hessians routinely reach cond 1e12 late in a run, and
// the per-step decrease audit consumes that identity. y is recovered by least
// squares from A^T y = g + H v. H must be positive definite on ker(A).
inline KktSolution solve_first_order_kkt(const Matrix& H, const AffineConstraint& c,
                                         const NullBasis& nb, const Vector& g) {
  const Index n = c.cols();
  if (H.rows() != n || H.cols() != n || g.size() != n)
    throw DimensionMismatch("solve_first_order_kkt: operand sizes disagree");
  if (nb.n != n || nb.m != c.rows())
    throw DimensionMismatch("solve_first_order_kkt: null basis belongs to another constraint");
  KktSolution sol;
  const Index p = nb.p();
  if (p == 0) {
    sol.v = Vector::Zero(n);
  } else {
    Eigen::LLT<Matrix> hllt(H);
    if (hllt.info() != Eigen::Success)
      throw IllConditionedKKT("solve_first_order_kkt: metric is not positive definite");
    const Matrix RZ = hllt.matrixU() * nb.Z;
    const Vector rg = hllt.matrixL().solve(g);
    Eigen::HouseholderQR<Matrix> qr(RZ);
    Vector u = qr.solve(-rg);
    sol.v = nb.Z * u;
  }
  if (c.rows() == 0) {
    sol.y = Vector(0);
  } else {
    Vector rhs = g + H * sol.v;
    sol.y = c.A.transpose().colPivHouseholderQr().solve(rhs);
    // Breakdown guard only; the sharp residual bound is enforced by tests.
    const double resid = (rhs - c.A.transpose() * sol.y).norm();
    const double scale = 1.0 + g.norm() + (H * sol.v).norm();
    if (!std::isfinite(resid) || resid > 1e-6 * scale)
      throw IllConditionedKKT("solve_first_order_kkt: multiplier recovery residual too large");
  }
  if (!sol.v.allFinite() || !sol.y.allFinite())
    throw IllConditionedKKT("solve_first_order_kkt: non-finite solution");
  return sol;
}

inline KktSolution solve_first_order_kkt(const Matrix& H, const AffineConstraint& c,
                                         const Vector& g) {
  return solve_first_order_kkt(H, c, build_null_basis(c), g);
}

struct ReducedData {
  Vector g; // Z^T grad
  Matrix J; // Z^T (hess f) Z
  Matrix H; // Z^T (barrier hess) Z
};

inline ReducedData project_reduced_data(const NullBasis& nb, const Vector& grad,
                                        const Matrix& hess_f, const Matrix& H) {
  const Index n = nb.n;
  if (grad.size() != n || hess_f.rows() != n || hess_f.cols() != n || H.rows() != n ||
      H.cols() != n)
    throw DimensionMismatch("project_reduced_data: operand sizes disagree");
  ReducedData rd;
  rd.g = nb.Z.transpose() * grad;
  const Matrix Jr = nb.Z.transpose() * hess_f * nb.Z;
  const Matrix Hr = nb.Z.transpose() * H * nb.Z;
  // fresh destinations: symmetrizing in place would read half-updated entries
  rd.J = 0.5 * (Jr + Jr.transpose());
  rd.H = 0.5 * (Hr + Hr.transpose());
  return rd;
}

// Reduced data in coordinates where the metric is exactly the identity. With
// H = U^T U and the thin QR factorization U Z = Q T, the change of variables
// s = T u gives |Z u|_H = |s|_2, so a reduced subproblem posed on s needs no
// metric at all. Forming Z^T H Z instead squares the conditioning, and near
// cond(H) ~ 1e16 the product is indefinite in floating point; this route only
// ever applies U and T through well-conditioned triangular operations.
struct WhitenedReduction {
  Matrix T; // p x p upper triangular, s = T u
  Vector g; // T^{-T} Z^T grad
  Matrix J; // T^{-T} (Z^T hess_f Z) T^{-1}

  // v = Z T^{-1} s, the ambient step for whitened coordinates s.
  Vector lift(const NullBasis& nb, const Vector& s) const {
    return nb.Z * T.triangularView<Eigen::Upper>().solve(s);
  }
};

inline WhitenedReduction whiten_reduced_data(const NullBasis& nb, const Matrix& U,
                                             const Vector& grad, const Matrix& hess_f) {
  const Index n = nb.n;
  if (grad.size() != n || hess_f.rows() != n || hess_f.cols() != n || U.rows() != n ||
      U.cols() != n)
    throw DimensionMismatch("whiten_reduced_data: operand sizes disagree");
  const Index p = nb.p();
  WhitenedReduction wr;
  if (p == 0) {
    wr.T = Matrix(0, 0);
    wr.g = Vector(0);
    wr.J = Matrix(0, 0);
    return wr;
  }
  const Matrix W = U * nb.Z;
  Eigen::HouseholderQR<Matrix> qr(W);
  wr.T = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const double tmin = wr.T.diagonal().cwiseAbs().minCoeff();
  const double tmax = wr.T.diagonal().cwiseAbs().maxCoeff();
  if (!(tmin > 0.0) || !std::isfinite(tmax))
    throw IllConditionedKKT("whiten_reduced_data: whitened basis is rank deficient");
  wr.g = wr.T.triangularView<Eigen::Upper>().transpose().solve(
      Vector(nb.Z.transpose() * grad));
  const Matrix Jz_raw = nb.Z.transpose() * hess_f * nb.Z;
  const Matrix Jz = 0.5 * (Jz_raw + Jz_raw.transpose());
  const Matrix half = wr.T.triangularView<Eigen::Upper>().transpose().solve(Jz);
  const Matrix Jw =
      wr.T.triangularView<Eigen::Upper>().transpose().solve(Matrix(half.transpose()));
  wr.J = 0.5 * (Jw + Jw.transpose());
  return wr;
}

} // namespace ahb
