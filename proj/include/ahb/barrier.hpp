#pragma once

// Self-concordant barriers for the supported cone/box geometries, plus the
// local metric machinery built on the barrier Hessian. A barrier oracle is
// only defined on the strict interior of its domain; callers guard with
// interior() before evaluating.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "errors.hpp"
#include "types.hpp"

namespace ahb {

struct Barrier {
  Index dim = 0;
  double nu = 0.0; // barrier parameter: <grad, H^-1 grad> <= nu on the interior
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
  std::function<bool(const Vector&)> interior; // strict membership
};

namespace detail {

inline bool all_finite(const Vector& x) { return x.allFinite(); }

inline void check_dim(const Barrier& b, const Vector& x) {
  if (x.size() != b.dim) throw DimensionMismatch("barrier: point has wrong dimension");
}

} // namespace detail

inline Barrier make_log_orthant(Index n) {
  if (n < 1) throw InvalidDimension("log_orthant: dimension must be >= 1");
  Barrier b;
  b.dim = n;
  b.nu = static_cast<double>(n);
  b.interior = [n](const Vector& x) {
    if (x.size() != n || !detail::all_finite(x)) return false;
    return (x.array() > 0.0).all();
  };
  b.value = [n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_orthant: wrong dimension");
    if (!(x.array() > 0.0).all()) return std::numeric_limits<double>::infinity();
    return -x.array().log().sum();
  };
  b.gradient = [n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_orthant: wrong dimension");
    return Vector(-x.array().inverse());
  };
  b.hessian = [n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_orthant: wrong dimension");
    Matrix H = Matrix::Zero(n, n);
    H.diagonal() = x.array().square().inverse();
    return H;
  };
  return b;
}

inline Barrier make_log_box(const Vector& lower, const Vector& upper) {
  if (lower.size() != upper.size())
    throw DimensionMismatch("log_box: bound vectors differ in length");
  const Index n = lower.size();
  if (n < 1) throw InvalidDimension("log_box: dimension must be >= 1");
  if (!detail::all_finite(lower) || !detail::all_finite(upper) ||
      !((lower.array() < upper.array()).all()))
    throw InvalidBounds("log_box: requires finite bounds with lower < upper componentwise");
  Barrier b;
  b.dim = n;
  b.nu = 2.0 * static_cast<double>(n);
  Vector l = lower, u = upper;
  b.interior = [l, u, n](const Vector& x) {
    if (x.size() != n || !detail::all_finite(x)) return false;
    return (x.array() > l.array()).all() && (x.array() < u.array()).all();
  };
  b.value = [l, u, n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_box: wrong dimension");
    if (!((x.array() > l.array()).all() && (x.array() < u.array()).all()))
      return std::numeric_limits<double>::infinity();
    return -(x - l).array().log().sum() - (u - x).array().log().sum();
  };
  b.gradient = [l, u, n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_box: wrong dimension");
    return Vector((u - x).array().inverse() - (x - l).array().inverse());
  };
  b.hessian = [l, u, n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_box: wrong dimension");
    Matrix H = Matrix::Zero(n, n);
    H.diagonal() =
        (x - l).array().square().inverse() + (u - x).array().square().inverse();
    return H;
  };
  return b;
}

// -log(R^2 - |x - c|^2). The stored nu is a validated upper bound on the
// gradient-Hessian quantity <grad, H^-1 grad>, obtained by sampling along
// radial lines approaching the boundary and rounding up to an integer.
inline Barrier make_log_ball(const Vector& center, double radius) {
  const Index n = center.size();
  if (n < 1) throw InvalidDimension("log_ball: dimension must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidRadius("log_ball: radius must be positive and finite");
  if (!detail::all_finite(center)) throw InvalidData("log_ball: center must be finite");
  Barrier b;
  b.dim = n;
  Vector c = center;
  const double R2 = radius * radius;
  b.interior = [c, R2, n](const Vector& x) {
    if (x.size() != n || !detail::all_finite(x)) return false;
    return (x - c).squaredNorm() < R2;
  };
  b.value = [c, R2, n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_ball: wrong dimension");
    const double q = R2 - (x - c).squaredNorm();
    if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log(q);
  };
  b.gradient = [c, R2, n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_ball: wrong dimension");
    const double q = R2 - (x - c).squaredNorm();
    return Vector(2.0 * (x - c) / q);
  };
  b.hessian = [c, R2, n](const Vector& x) {
    if (x.size() != n) throw DimensionMismatch("log_ball: wrong dimension");
    const double q = R2 - (x - c).squaredNorm();
    Vector d = x - c;
    Matrix H = (2.0 / q) * Matrix::Identity(n, n);
    H.noalias() += (4.0 / (q * q)) * d * d.transpose();
    return H;
  };

  // Sampled maximization of <grad, H^-1 grad>; radial profile peaks at the
  // boundary, so push samples to 1 - 1e-9 of the radius.
  std::mt19937_64 rng(0x5eedba11u);
  auto unit_dir = [&](Index k) {
    Vector d(n);
    if (k < n) { d.setZero(); d(k) = 1.0; return d; }
    for (Index i = 0; i < n; ++i) {
      const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
      const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
      d(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
    d /= d.norm();
    return d;
  };
  const double fractions[] = {0.5, 0.9, 0.99, 0.999, 1.0 - 1e-6, 1.0 - 1e-9};
  double peak = 0.0;
  const Index ndirs = n + 16;
  for (Index k = 0; k < ndirs; ++k) {
    const Vector d = unit_dir(k);
    for (double fr : fractions) {
      const Vector x = c + (fr * radius) * d;
      const Vector g = b.gradient(x);
      const Matrix H = b.hessian(x);
      peak = std::max(peak, g.dot(H.llt().solve(g)));
    }
  }
  b.nu = std::max(1.0, std::ceil(peak));
  return b;
}

inline Barrier sum_barriers(const Barrier& a, const Barrier& b) {
  if (a.dim != b.dim)
    throw DimensionMismatch("sum_barriers: operands live in different dimensions");
  Barrier s;
  s.dim = a.dim;
  s.nu = a.nu + b.nu;
  auto av = a.value, bv = b.value;
  auto ag = a.gradient, bg = b.gradient;
  auto ah = a.hessian, bh = b.hessian;
  auto ai = a.interior, bi = b.interior;
  s.value = [av, bv](const Vector& x) { return av(x) + bv(x); };
  s.gradient = [ag, bg](const Vector& x) { return Vector(ag(x) + bg(x)); };
  s.hessian = [ah, bh](const Vector& x) { return Matrix(ah(x) + bh(x)); };
  s.interior = [ai, bi](const Vector& x) { return ai(x) && bi(x); };
  return s;
}

// Cholesky of the barrier Hessian at an anchor point. One factorization per
// anchor; every norm/solve at that anchor reuses it. A failed factorization
// gets one diagonal jitter of 1e-12 * trace(H)/n before giving up.
class LocalMetric {
 public:
  LocalMetric(Matrix H, Vector anchor) : H_(std::move(H)), x_(std::move(anchor)) {
    if (H_.rows() != H_.cols() || H_.rows() != x_.size())
      throw DimensionMismatch("LocalMetric: H must be square and match the anchor");
    if (!H_.allFinite()) throw IllConditionedMetric("LocalMetric: non-finite Hessian");
    llt_.compute(H_);
    if (llt_.info() != Eigen::Success) {
      const double jitter = 1e-12 * H_.trace() / static_cast<double>(H_.rows());
      H_.diagonal().array() += jitter;
      llt_.compute(H_);
      if (llt_.info() != Eigen::Success)
        throw IllConditionedMetric("LocalMetric: Hessian is not positive definite");
    }
    const auto d = llt_.matrixLLT().diagonal();
    const double dmax = d.maxCoeff(), dmin = d.minCoeff();
    cond_ = (dmin > 0.0) ? (dmax / dmin) * (dmax / dmin)
                         : std::numeric_limits<double>::infinity();
  }

  LocalMetric(const Barrier& b, const Vector& x) : LocalMetric(b.hessian(x), x) {}

  double norm(const Vector& v) const {
    if (v.size() != x_.size()) throw DimensionMismatch("LocalMetric::norm");
    return (llt_.matrixU() * v).norm();
  }
  double dual_norm(const Vector& s) const {
    if (s.size() != x_.size()) throw DimensionMismatch("LocalMetric::dual_norm");
    return llt_.matrixL().solve(s).norm();
  }
  Vector solve(const Vector& s) const { return llt_.solve(s); }

  // Upper-triangular U with H = U^T U, the same factor norm() applies. Callers
  // that whiten against this metric must use it (not a fresh factorization) so
  // their coordinates agree with norm() even when the jitter path fired.
  Matrix factor_upper() const { return llt_.matrixU(); }

  const Matrix& hessian() const { return H_; }
  const Vector& anchor() const { return x_; }
  double condition_estimate() const { return cond_; }

 private:
  Matrix H_;
  Vector x_;
  Eigen::LLT<Matrix> llt_;
  double cond_ = 0.0;
};

inline double local_norm(const LocalMetric& m, const Vector& v) { return m.norm(v); }
inline double dual_local_norm(const LocalMetric& m, const Vector& s) { return m.dual_norm(s); }

// omega(t) = (-t - log(1-t)) / t^2 on [0, 1). Below 1e-4 the direct formula
// loses digits to cancellation, so a five-term series takes over.
inline double omega(double t) {
  if (!(t >= 0.0) || t >= 1.0) {
    std::ostringstream os;
    os << "omega: argument " << t << " outside [0, 1)";
    throw OutOfRange(os.str());
  }
  if (t < 1e-4)
    return 0.5 + t / 3.0 + t * t / 4.0 + t * t * t / 5.0 + t * t * t * t / 6.0;
  return (-t - std::log1p(-t)) / (t * t);
}

inline bool dikin_step_feasible(const LocalMetric& m, const Vector& v, double t) {
  if (!(t >= 0.0)) throw OutOfRange("dikin_step_feasible: step length must be >= 0");
  return t * m.norm(v) < 1.0;
}

} // namespace ahb
