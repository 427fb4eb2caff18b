#pragma once

// Built-in test problems. Each builder returns the objective, the barrier for
// its cone, the affine constraint, and a strictly feasible starting point.
// Generators are deterministic in the seed: identical (n, m, seed, params)
// reproduce the instance bit for bit.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "barrier.hpp"
#include "errors.hpp"
#include "linear_geometry.hpp"
#include "model.hpp"
#include "types.hpp"

namespace ahb {

struct ProblemBundle {
  std::string name;
  ObjectiveModel f;
  Barrier h;
  AffineConstraint c;
  Vector x_start;
};

namespace detail {

// Raw-bit uniform in [0,1); avoids distribution objects so streams are
// identical across standard libraries.
inline double u01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * u01(rng);
}

inline double gaussian(std::mt19937_64& rng) {
  const double u1 = u01(rng);
  const double u2 = u01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

inline Matrix gaussian_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = gaussian(rng);
  return M;
}

} // namespace detail

// Box-constrained quadratic: f(x) = x^T Q x / 2 + c^T x over (0,2)^n, with an
// optional mass constraint sum(x) = 0.9 n. Q has a random orthogonal
// eigenbasis and eigenvalue magnitudes in [2.5, 5]; the first
// round(neg_frac * n) eigenvalues are negative, so neg_frac = 0 gives a
// strongly convex instance and neg_frac > 0 an indefinite one.
inline ProblemBundle build_box_qp(Index n, std::uint64_t seed, double neg_frac,
                                  bool sum_constraint = true) {
  if (n < 1) throw InvalidDimension("box_qp: n must be >= 1");
  if (!(neg_frac >= 0.0 && neg_frac <= 1.0))
    throw InvalidParameter("box_qp: neg_frac must lie in [0,1]");
  std::mt19937_64 rng(seed);
  Matrix G = detail::gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix V = qr.householderQ() * Matrix::Identity(n, n);
  Vector lam(n);
  const Index n_neg = static_cast<Index>(std::lround(neg_frac * static_cast<double>(n)));
  for (Index i = 0; i < n; ++i) {
    const double mag = detail::uniform(rng, 2.5, 5.0);
    lam(i) = (i < n_neg) ? -mag : mag;
  }
  const Matrix Qraw = V * lam.asDiagonal() * V.transpose();
  Matrix Q = 0.5 * (Qraw + Qraw.transpose());
  Vector lin(n);
  for (Index i = 0; i < n; ++i) lin(i) = detail::uniform(rng, -2.0, 2.0);

  ProblemBundle pb;
  pb.name = "box_qp";
  pb.f.dim = n;
  pb.f.smooth_on_boundary = true;
  pb.f.value = [Q, lin](const Vector& x) { return 0.5 * x.dot(Q * x) + lin.dot(x); };
  pb.f.gradient = [Q, lin](const Vector& x) -> Vector { return Q * x + lin; };
  pb.f.hessian = [Q](const Vector&) -> Matrix { return Q; };
  pb.h = make_log_box(Vector::Zero(n), Vector::Constant(n, 2.0));

  if (sum_constraint) {
    Matrix A = Matrix::Ones(1, n);
    Vector b(1);
    b(0) = 0.9 * static_cast<double>(n);
    pb.c = make_affine(A, b);
    // midpoint of the box, shifted by the minimum-norm correction onto Ax=b
    Vector mid = Vector::Constant(n, 1.0);
    Vector r = b - A * mid;
    Vector corr = A.transpose() * (A * A.transpose()).ldlt().solve(r);
    pb.x_start = mid + corr;
  } else {
    pb.c = make_affine(Matrix(0, n), Vector(0));
    pb.x_start = Vector::Constant(n, 1.0);
  }
  if (!pb.h.interior(pb.x_start))
    throw InfeasibleStart("box_qp: constructed start is not interior");
  return pb;
}

// Poisson inverse problem with concave regularization:
//   min over (u, v)  alpha * sum(u_j^p) + sum(v_i - z_i log v_i)
//   subject to  Phi u - v = 0,  u > 0, v > 0.
// The log-likelihood part is convex, the p in (0,1) power term is concave,
// and the orthant barrier covers the stacked variable x = (u; v).
inline ProblemBundle build_poisson(const Matrix& Phi, const Vector& z, double alpha,
                                   double p) {
  const Index m = Phi.rows();
  const Index n_u = Phi.cols();
  if (m < 1 || n_u < 1) throw InvalidDimension("poisson: Phi must be nonempty");
  if (z.size() != m) throw DimensionMismatch("poisson: z must have one entry per row of Phi");
  if (!(alpha > 0.0)) throw InvalidParameter("poisson: alpha must be positive");
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("poisson: p must lie in (0,1)");
  if ((Phi.array() < 0.0).any()) throw InvalidData("poisson: Phi must be entrywise nonnegative");
  if (!Phi.allFinite() || !z.allFinite()) throw InvalidData("poisson: non-finite input");
  if ((z.array() < 0.0).any()) throw InvalidData("poisson: z must be nonnegative");
  for (Index j = 0; j < n_u; ++j)
    if (!(Phi.col(j).sum() > 0.0)) throw InvalidData("poisson: Phi has a zero column");
  for (Index i = 0; i < m; ++i)
    if (!(Phi.row(i).sum() > 0.0)) throw InvalidData("poisson: Phi has a zero row");

  const Index n = n_u + m;
  ProblemBundle pb;
  pb.name = "poisson";
  pb.f.dim = n;
  pb.f.smooth_on_boundary = false; // u^p and log v blow up at the boundary
  pb.f.value = [n_u, m, alpha, p, z](const Vector& x) {
    double val = 0.0;
    for (Index j = 0; j < n_u; ++j) val += alpha * std::pow(x(j), p);
    for (Index i = 0; i < m; ++i) {
      const double v = x(n_u + i);
      val += v - (z(i) > 0.0 ? z(i) * std::log(v) : 0.0);
    }
    return val;
  };
  pb.f.gradient = [n_u, m, alpha, p, z](const Vector& x) -> Vector {
    Vector g(n_u + m);
    for (Index j = 0; j < n_u; ++j) g(j) = alpha * p * std::pow(x(j), p - 1.0);
    for (Index i = 0; i < m; ++i) g(n_u + i) = 1.0 - z(i) / x(n_u + i);
    return g;
  };
  pb.f.hessian = [n_u, m, alpha, p, z](const Vector& x) -> Matrix {
    Vector d(n_u + m);
    for (Index j = 0; j < n_u; ++j) d(j) = alpha * p * (p - 1.0) * std::pow(x(j), p - 2.0);
    for (Index i = 0; i < m; ++i) {
      const double v = x(n_u + i);
      d(n_u + i) = z(i) / (v * v);
    }
    return d.asDiagonal();
  };
  pb.h = make_log_orthant(n);

  Matrix A(m, n);
  A.leftCols(n_u) = Phi;
  A.rightCols(m) = -Matrix::Identity(m, m);
  pb.c = make_affine(A, Vector::Zero(m));

  pb.x_start = Vector(n);
  pb.x_start.head(n_u).setOnes();
  pb.x_start.tail(m) = Phi * Vector::Ones(n_u); // positive by the row-sum check
  return pb;
}

inline ProblemBundle build_poisson(Index n_u, Index m, double alpha, double p,
                                   std::uint64_t seed) {
  if (m < 1 || n_u < 1) throw InvalidDimension("poisson: need n_u >= 1 and m >= 1");
  std::mt19937_64 rng(seed);
  Matrix Phi(m, n_u);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n_u; ++j) Phi(i, j) = detail::uniform(rng, 0.05, 1.05);
  Vector z(m);
  for (Index i = 0; i < m; ++i) z(i) = detail::uniform(rng, 0.5, 10.0);
  return build_poisson(Phi, z, alpha, p);
}

// One-hidden-layer regression with an l_p penalty:
//   min over x > 0  || W2 tanh(W1 x + b1) - z ||^2 + lambda * sum(x_j^p)
// Unconstrained over the positive orthant (no affine rows), non-convex in
// both the network term and the p in (0,1) penalty.
inline ProblemBundle build_lp_regression(Index n, double lambda, double p,
                                         std::uint64_t seed) {
  if (n < 1) throw InvalidDimension("lp_regression: n must be >= 1");
  if (!(lambda > 0.0)) throw InvalidParameter("lp_regression: lambda must be positive");
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("lp_regression: p must lie in (0,1)");
  std::mt19937_64 rng(seed);
  const Index hdim = std::max<Index>(2, n);
  const Index dout = std::max<Index>(2, n / 2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix W1 = scale * detail::gaussian_matrix(rng, hdim, n);
  Vector b1 = 0.1 * detail::gaussian_matrix(rng, hdim, 1);
  Matrix W2 = scale * detail::gaussian_matrix(rng, dout, hdim);
  Vector z = detail::gaussian_matrix(rng, dout, 1);

  ProblemBundle pb;
  pb.name = "lp_regression";
  pb.f.dim = n;
  pb.f.smooth_on_boundary = false;
  pb.f.value = [W1, b1, W2, z, lambda, p](const Vector& x) {
    Vector t = (W1 * x + b1).array().tanh();
    double val = (W2 * t - z).squaredNorm();
    for (Index j = 0; j < x.size(); ++j) val += lambda * std::pow(x(j), p);
    return val;
  };
  pb.f.gradient = [W1, b1, W2, z, lambda, p](const Vector& x) -> Vector {
    Vector t = (W1 * x + b1).array().tanh();
    Vector sp = 1.0 - t.array().square(); // tanh'
    Vector r = W2 * t - z;
    Matrix J = W2 * sp.asDiagonal() * W1;
    Vector g = 2.0 * (J.transpose() * r);
    for (Index j = 0; j < x.size(); ++j) g(j) += lambda * p * std::pow(x(j), p - 1.0);
    return g;
  };
  pb.f.hessian = [W1, b1, W2, z, lambda, p](const Vector& x) -> Matrix {
    Vector t = (W1 * x + b1).array().tanh();
    Vector sp = 1.0 - t.array().square();
    Vector spp = -2.0 * t.array() * sp.array(); // tanh''
    Vector r = W2 * t - z;
    Matrix J = W2 * sp.asDiagonal() * W1;
    // Gauss-Newton term plus the curvature of each hidden unit weighted by
    // its back-propagated residual.
    Vector w = (W2.transpose() * (2.0 * r)).array() * spp.array();
    Matrix H = 2.0 * J.transpose() * J + W1.transpose() * w.asDiagonal() * W1;
    for (Index j = 0; j < x.size(); ++j)
      H(j, j) += lambda * p * (p - 1.0) * std::pow(x(j), p - 2.0);
    return H;
  };
  pb.h = make_log_orthant(n);
  pb.c = make_affine(Matrix(0, n), Vector(0));
  pb.x_start = Vector::Constant(n, 1.0);
  return pb;
}

} // namespace ahb
