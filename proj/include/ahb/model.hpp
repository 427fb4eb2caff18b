#pragma once

// Objective oracles and the barrier-augmented potential F_mu = f + mu*h.

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "barrier.hpp"
#include "errors.hpp"
#include "types.hpp"

namespace ahb {

struct ObjectiveModel {
  Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian; // may be empty for first-order use
  bool smooth_on_boundary = false;
};

struct Potential {
  ObjectiveModel f;
  Barrier h;
  double mu = 0.0;

  Potential() = default;
  Potential(ObjectiveModel f_, Barrier h_, double mu_)
      : f(std::move(f_)), h(std::move(h_)), mu(mu_) {
    if (f.dim != h.dim)
      throw DimensionMismatch("Potential: objective and barrier dimensions differ");
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw InvalidParameter("Potential: mu must be positive and finite");
  }

  double value(const Vector& x) const {
    if (!h.interior(x)) throw OutsideDomain("Potential: point is not interior");
    return f.value(x) + mu * h.value(x);
  }

  // Line-search probe: nullopt for points outside the domain or evaluating
  // non-finite, so callers can treat both as a failed trial.
  std::optional<double> try_value(const Vector& x) const {
    if (!h.interior(x)) return std::nullopt;
    const double v = f.value(x) + mu * h.value(x);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  }

  Vector gradient(const Vector& x) const {
    if (!h.interior(x)) throw OutsideDomain("Potential: point is not interior");
    return f.gradient(x) + mu * h.gradient(x);
  }
};

inline std::pair<double, Vector> potential_eval(const Potential& pot, const Vector& x) {
  return {pot.value(x), pot.gradient(x)};
}

namespace detail {

inline double fd_step(const Vector& x, double base) { return base * (1.0 + x.lpNorm<Eigen::Infinity>()); }

} // namespace detail

// Max relative error between analytic gradient and central differences.
// step <= 0 picks 1e-5 * (1 + |x|_inf). Relative to 1 + |grad|_inf.
inline double fd_check_gradient(const ObjectiveModel& m, const Vector& x, double step = -1.0) {
  if (x.size() != m.dim) throw DimensionMismatch("fd_check_gradient");
  const double hstep = (step > 0.0) ? step : detail::fd_step(x, 1e-5);
  const Vector g = m.gradient(x);
  const double scale = 1.0 + g.lpNorm<Eigen::Infinity>();
  double worst = 0.0;
  Vector e = x;
  for (Index i = 0; i < x.size(); ++i) {
    e(i) = x(i) + hstep;
    const double fp = m.value(e);
    e(i) = x(i) - hstep;
    const double fm = m.value(e);
    e(i) = x(i);
    worst = std::max(worst, std::abs((fp - fm) / (2.0 * hstep) - g(i)) / scale);
  }
  return worst;
}

inline double fd_check_hessian(const ObjectiveModel& m, const Vector& x, double step = -1.0) {
  if (x.size() != m.dim) throw DimensionMismatch("fd_check_hessian");
  if (!m.hessian) throw InvalidParameter("fd_check_hessian: model has no Hessian oracle");
  const double hstep = (step > 0.0) ? step : detail::fd_step(x, 1e-4);
  const Matrix H = m.hessian(x);
  const double scale = 1.0 + H.cwiseAbs().maxCoeff();
  double worst = 0.0;
  Vector e = x;
  for (Index i = 0; i < x.size(); ++i) {
    e(i) = x(i) + hstep;
    const Vector gp = m.gradient(e);
    e(i) = x(i) - hstep;
    const Vector gm = m.gradient(e);
    e(i) = x(i);
    const Vector col = (gp - gm) / (2.0 * hstep);
    worst = std::max(worst, (col - H.col(i)).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

inline ObjectiveModel barrier_as_model(const Barrier& b) {
  ObjectiveModel m;
  m.dim = b.dim;
  m.value = b.value;
  m.gradient = b.gradient;
  m.hessian = b.hessian;
  return m;
}

// Empirical probe of the local smoothness ratio
//   (f(x+v) - f(x) - <grad f(x), v>) / (|v|_x^2 / 2)
// over sampled Dikin steps. Diagnostic only; nothing asserts on it.
inline double probe_local_smoothness(const ObjectiveModel& f, const Barrier& h,
                                     const Vector& x, int samples = 32,
                                     unsigned long long seed = 0x10ca15eedULL) {
  if (!h.interior(x)) throw OutsideDomain("probe_local_smoothness");
  LocalMetric metric(h, x);
  const double fx = f.value(x);
  const Vector gx = f.gradient(x);
  std::mt19937_64 rng(seed);
  auto unit = [&]() {
    Vector d(x.size());
    for (Index i = 0; i < d.size(); ++i) {
      const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
      const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
      d(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
    return d;
  };
  double ratio = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector v = unit();
    const double nx = metric.norm(v);
    if (nx == 0.0) continue;
    v *= (0.25 + 0.5 * (static_cast<double>(rng() >> 11) * 0x1p-53)) / nx;
    const Vector z = x + v;
    if (!h.interior(z)) continue;
    const double rem = f.value(z) - fx - gx.dot(v);
    const double vn2 = metric.norm(v);
    ratio = std::max(ratio, rem / (0.5 * vn2 * vn2));
  }
  return ratio;
}

} // namespace ahb
