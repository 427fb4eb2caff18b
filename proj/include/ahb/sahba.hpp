#pragma once

// Second-order adaptive barrier solver. Each inner trial re-solves the
// metric-regularized cubic subproblem on ker(A) at estimate L = 2^i M_k,
// steps with alpha = min(1, 1 / (2 |v|_x)), and accepts once both the cubic
// upper model and the Hessian secant bound hold. The estimate relaxes as
// M_{k+1} = max(L_k / 2, 144 eps). Stopping needs two consecutive direction
// records below their own thresholds Delta_k = sqrt(eps / (12 L_k nu)); the
// result is the point the last direction was computed at, paired with the
// previous iteration's multiplier.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "barrier.hpp"
#include "cubic.hpp"
#include "errors.hpp"
#include "linear_geometry.hpp"
#include "model.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace ahb {

struct SahbaConfig {
  double eps = 1e-3;
  double M0 = 1.0; // clamped up to 144 eps when below
  long max_outer = 500000;
  int max_inner_per_step = 64;
};

inline double sahba_delta(double eps, double L, double nu) {
  return std::sqrt(eps / (12.0 * L * nu));
}

struct SahbaState {
  Vector x;
  double M = 0.0;
  long k = 0;
  long inner_total = 0;
  long directions = 0;
  double L_max_accepted = 0.0;
  double L_last_accepted = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  bool has_prev = false;
  double prev_vnorm = 0.0;
  double prev_delta = 0.0;
  Vector prev_y;
};

struct SahbaStepReport {
  bool stopped = false; // two-consecutive rule fired; step not committed
  Vector v;
  Vector y;
  Vector z; // trial point of the accepted direction
  double vnorm = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  double L_accepted = 0.0;
  int trials = 0;
  double F_before = 0.0;
  double F_after = 0.0;
  double f_after = 0.0;
};

inline SahbaStepReport sahba_step(SahbaState& state, const Potential& pot,
                                  const AffineConstraint& c, const NullBasis& nb,
                                  const SahbaConfig& cfg, double L_lower,
                                  TraceSink& sink,
                                  std::chrono::steady_clock::time_point t0) {
  if (!pot.f.hessian)
    throw InvalidParameter("sahba_step: objective model has no Hessian oracle");
  SahbaStepReport rep;
  const Vector& x = state.x;
  const double fx = pot.f.value(x);
  const double hx = pot.h.value(x);
  const double F = fx + pot.mu * hx;
  if (!std::isfinite(F)) throw NonFiniteValue("sahba_step: potential non-finite at iterate");
  const Vector gfx = pot.f.gradient(x);
  const Matrix Jfx = pot.f.hessian(x);
  const Vector gF = gfx + pot.mu * pot.h.gradient(x);
  if (!gF.allFinite() || !Jfx.allFinite())
    throw NonFiniteValue("sahba_step: derivatives non-finite at iterate");

  LocalMetric metric(pot.h, x);
  // Whitened coordinates keep the subproblem metric at exactly the identity.
  // The barrier Hessian reaches cond ~ 1e16 near convergence, where the
  // squared form Z^T H Z is indefinite in floating point.
  const WhitenedReduction wr = whiten_reduced_data(nb, metric.factor_upper(), gF, Jfx);
  const Matrix Iw = Matrix::Identity(nb.p(), nb.p());
  state.directions += 1;
  rep.F_before = F;

  TraceRow head;
  head.k = state.k;
  head.inner = -1;
  head.estimate = state.M;
  head.alpha = 0.0;
  head.vnorm = 0.0;
  head.Fmu = F;
  head.f = fx;
  head.feas = c.residual(x);
  head.accepted = false;
  head.ms = detail::ms_since(t0);
  sink.row(head, x);

  const double grad_dual_scale = metric.dual_norm(gfx);

  int nonfinite_run = 0;
  bool halved_retry_used = false;
  bool retry_halved = false;
  int i = 0;
  while (i < cfg.max_inner_per_step) {
    const double L = std::ldexp(state.M, i);
    CubicInstance ci{wr.g, wr.J, Iw, L};
    CubicSolution cs = solve_cubic(ci);
    const Vector v = wr.lift(nb, cs.u);
    const double vnorm = cs.r; // |v|_x equals |cs.u|_2 in whitened coordinates
    double alpha = (vnorm > 0.0) ? std::min(1.0, 1.0 / (2.0 * vnorm)) : 1.0;
    if (retry_halved) {
      alpha *= 0.5;
      retry_halved = false;
    }
    const Vector z = x + alpha * v;
    state.inner_total += 1;
    rep.trials += 1;

    TraceRow row;
    row.k = state.k;
    row.inner = i;
    row.estimate = L;
    row.alpha = alpha;
    row.vnorm = vnorm;
    row.feas = c.residual(z);
    row.ms = detail::ms_since(t0);

    const std::optional<double> Fz = pot.try_value(z);
    bool finite = Fz.has_value();
    Vector gfz;
    if (finite) {
      gfz = pot.f.gradient(z);
      finite = gfz.allFinite();
    }
    if (!finite) {
      row.Fmu = std::numeric_limits<double>::infinity();
      row.f = std::numeric_limits<double>::infinity();
      row.accepted = false;
      sink.row(row, z);
      ++nonfinite_run;
      if (nonfinite_run == 1) {
        ++i;
        continue;
      }
      if (!halved_retry_used) {
        halved_retry_used = true;
        retry_halved = true;
        continue;
      }
      throw NonFiniteValue("sahba_step: trial point evaluated non-finite twice");
    }
    nonfinite_run = 0;

    const double fz = pot.f.value(z);
    const Vector d = z - x;
    const double dx = metric.norm(d);
    const double rhs1 = fx + gfx.dot(d) + 0.5 * d.dot(Jfx * d) + (L / 6.0) * dx * dx * dx;
    const bool ok1 = fz <= rhs1 + detail::ls_slack(fx, fz);
    const double secant = metric.dual_norm(gfz - gfx - Jfx * d);
    const double rhs2 = 0.5 * L * dx * dx;
    const bool ok2 =
        secant <= rhs2 + 32.0 * std::numeric_limits<double>::epsilon() * (1.0 + grad_dual_scale);
    const bool ok = ok1 && ok2;
    row.Fmu = *Fz;
    row.f = fz;
    row.accepted = ok;
    sink.row(row, z);
    if (ok) {
      rep.v = v;
      rep.z = z;
      rep.vnorm = vnorm;
      rep.alpha = alpha;
      rep.L_accepted = L;
      rep.delta = sahba_delta(cfg.eps, L, pot.h.nu);
      rep.F_after = *Fz;
      rep.f_after = fz;
      // Multiplier from the subproblem optimality system, by least squares.
      if (c.rows() > 0) {
        const Vector rhs_y =
            gF + Jfx * v + (0.5 * L * vnorm) * (metric.hessian() * v);
        rep.y = c.A.transpose().colPivHouseholderQr().solve(rhs_y);
      } else {
        rep.y = Vector(0);
      }

      const bool below = vnorm < rep.delta;
      if (state.has_prev && state.prev_vnorm < state.prev_delta && below) {
        rep.stopped = true; // result point stays at x; z is discarded
        return rep;
      }

      // Guaranteed decrease whenever the step is committed; the mu term only
      // weakens the bound when the direction is already below threshold.
      const double relax = (L * vnorm > 0.0) ? 1.0 - 12.0 * pot.mu / (L * vnorm) : 0.0;
      if (relax > 0.0) {
        const double promised = -(vnorm * vnorm * vnorm) * L * alpha * alpha / 12.0 * relax;
        if (rep.F_after - rep.F_before > promised + 1e-10)
          throw InvariantViolation("sahba_step: accepted step misses the decrease bound");
      }

      state.prev_vnorm = vnorm;
      state.prev_delta = rep.delta;
      state.prev_y = rep.y;
      state.has_prev = true;
      state.x = z;
      state.M = std::max(0.5 * L, L_lower);
      state.k += 1;
      state.L_last_accepted = L;
      state.L_max_accepted = std::max(state.L_max_accepted, L);
      state.best_f = std::min(state.best_f, fz);
      return rep;
    }
    ++i;
  }
  throw InnerLoopExceeded("sahba_step: no trial accepted within max_inner_per_step");
}

inline SolveOutput run_sahba(const Potential& pot, const AffineConstraint& c,
                             const Vector& x0, const SahbaConfig& cfg,
                             TraceSink* sink = nullptr, std::string* warning = nullptr) {
  if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps))
    throw InvalidParameter("run_sahba: eps must be positive");
  if (!(cfg.M0 > 0.0) || !std::isfinite(cfg.M0))
    throw InvalidParameter("run_sahba: M0 must be positive");
  if (cfg.max_outer < 1) throw InvalidParameter("run_sahba: max_outer must be >= 1");
  if (cfg.max_inner_per_step < 1)
    throw InvalidParameter("run_sahba: max_inner_per_step must be >= 1");
  if (x0.size() != pot.f.dim) throw DimensionMismatch("run_sahba: x0 dimension");
  if (!pot.h.interior(x0)) throw InfeasibleStart("run_sahba: x0 is not interior");
  if (c.residual(x0) > 1e-8 * (1.0 + c.b.norm()))
    throw InfeasibleStart("run_sahba: x0 violates the affine constraint");

  const double L_lower = 144.0 * cfg.eps;
  double M0 = cfg.M0;
  if (M0 < L_lower) {
    if (warning)
      *warning = "M0 below 144*eps; clamped to " + format_g17(L_lower);
    M0 = L_lower;
  }

  NullTraceSink null_sink;
  TraceSink& out = sink ? *sink : static_cast<TraceSink&>(null_sink);
  const auto t0 = std::chrono::steady_clock::now();
  NullBasis nb = build_null_basis(c);

  SahbaState st;
  st.x = x0;
  st.M = M0;
  st.best_f = pot.f.value(x0);
  st.prev_vnorm = std::numeric_limits<double>::quiet_NaN();
  st.prev_delta = std::numeric_limits<double>::quiet_NaN();

  SolveOutput res;
  res.eps = cfg.eps;
  res.mu = pot.mu;

  while (true) {
    const double prev_vnorm = st.prev_vnorm;
    const double prev_delta = st.prev_delta;
    SahbaStepReport rep = sahba_step(st, pot, c, nb, cfg, L_lower, out, t0);
    if (rep.stopped) {
      res.status = SolveStatus::Converged;
      res.x = st.x;
      res.y = st.prev_y; // multiplier of the previous direction, per the result pairing
      res.final_vnorm = rep.vnorm;
      res.final_threshold = rep.delta;
      res.prev_vnorm = prev_vnorm;
      res.prev_threshold = prev_delta;
      res.L_last_accepted = rep.L_accepted;
      res.f_final = pot.f.value(st.x);
      res.Fmu_final = pot.value(st.x);
      res.L_max_accepted = std::max(st.L_max_accepted, rep.L_accepted);
      break;
    }
    if (st.k >= cfg.max_outer) {
      res.status = SolveStatus::MaxIterations;
      res.x = st.x;
      res.y = st.prev_y;
      res.final_vnorm = st.prev_vnorm;
      res.final_threshold = st.prev_delta;
      res.prev_vnorm = prev_vnorm;
      res.prev_threshold = prev_delta;
      res.L_last_accepted = st.L_last_accepted;
      res.f_final = pot.f.value(st.x);
      res.Fmu_final = pot.value(st.x);
      res.L_max_accepted = st.L_max_accepted;
      break;
    }
  }
  res.iterations = st.k;
  res.directions = st.directions;
  res.inner_trials = st.inner_total;
  res.L_final = st.M;
  res.mu = pot.mu;
  res.best_f_seen = std::min(st.best_f, res.f_final);
  res.feas_residual = c.residual(res.x);
  res.s = pot.f.gradient(res.x);
  if (c.rows() > 0 && res.y.size() == c.rows()) res.s -= c.A.transpose() * res.y;
  return res;
}

} // namespace ahb
