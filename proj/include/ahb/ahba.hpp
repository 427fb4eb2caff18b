#pragma once

// First-order adaptive barrier solver. Each outer iteration solves the
// metric KKT system for a feasible direction v, then backtracks on the
// Lipschitz estimate: trial i uses estimate 2^i * L_k and step
//   alpha = min( 1 / (2^i L_k + 2 mu), 1 / (2 |v|_x) ),
// accepting once the quadratic upper model holds. The accepted estimate is
// halved into L_{k+1}, letting the estimate drift down between iterations.
// Stopping tests the freshly computed direction (before any step), so the
// returned (x, y) pair is the one the direction was computed at.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "barrier.hpp"
#include "errors.hpp"
#include "linear_geometry.hpp"
#include "model.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace ahb {

struct AhbaConfig {
  double eps = 1e-3;
  double L0 = 1.0; // 0 is allowed for linear objectives
  long max_outer = 2000000;
  int max_inner_per_step = 64;
};

// Escalation floor when L0 == 0 and a trial fails: doubling from zero goes
// nowhere, so the estimate restarts from here.
inline constexpr double kAhbaLFloor = 1e-12;

inline double ahba_alpha(double estimate, double mu, double vnorm) {
  return std::min(1.0 / (estimate + 2.0 * mu), 1.0 / (2.0 * vnorm));
}

struct AhbaState {
  Vector x;
  double L = 0.0;
  long k = 0;
  long inner_total = 0;
  long directions = 0;
  double L_max_accepted = 0.0;
  double L_last_accepted = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
};

struct AhbaStepReport {
  bool stopped = false; // direction fell below the threshold; no step taken
  Vector v;
  Vector y;
  double vnorm = 0.0;
  double alpha = 0.0;
  double estimate = 0.0; // accepted trial estimate 2^i L_k
  int trials = 0;
  double F_before = 0.0;
  double F_after = 0.0;
  double f_after = 0.0;
};

namespace detail {

inline double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Acceptance slack: the sufficient-decrease tests are exact inequalities in
// real arithmetic; a few ulps keep rounding from forcing a pointless extra
// doubling (the linear-objective case accepts with equality).
inline double ls_slack(double a, double b) {
  return 32.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(a) + std::abs(b));
}

} // namespace detail

inline AhbaStepReport ahba_step(AhbaState& state, const Potential& pot,
                                const AffineConstraint& c, const NullBasis& nb,
                                const AhbaConfig& cfg, double stop_threshold,
                                TraceSink& sink,
                                std::chrono::steady_clock::time_point t0) {
  AhbaStepReport rep;
  const Vector& x = state.x;
  const double fx = pot.f.value(x);
  const double hx = pot.h.value(x);
  const double F = fx + pot.mu * hx;
  if (!std::isfinite(F)) throw NonFiniteValue("ahba_step: potential non-finite at iterate");
  const Vector gfx = pot.f.gradient(x);
  const Vector gF = gfx + pot.mu * pot.h.gradient(x);
  if (!gF.allFinite()) throw NonFiniteValue("ahba_step: gradient non-finite at iterate");

  LocalMetric metric(pot.h, x);
  KktSolution kkt = solve_first_order_kkt(metric.hessian(), c, nb, gF);
  state.directions += 1;
  rep.v = kkt.v;
  rep.y = kkt.y;
  rep.vnorm = metric.norm(kkt.v);
  rep.F_before = F;

  TraceRow head;
  head.k = state.k;
  head.inner = -1;
  head.estimate = state.L;
  head.alpha = 0.0;
  head.vnorm = rep.vnorm;
  head.Fmu = F;
  head.f = fx;
  head.feas = c.residual(x);
  head.accepted = false;
  head.ms = detail::ms_since(t0);
  sink.row(head, x);

  if (rep.vnorm < stop_threshold) {
    rep.stopped = true;
    rep.F_after = F;
    rep.f_after = fx;
    return rep;
  }

  int nonfinite_run = 0;
  bool halved_retry_used = false;
  bool retry_halved = false;
  int i = 0;
  while (i < cfg.max_inner_per_step) {
    double estimate;
    if (state.L > 0.0)
      estimate = std::ldexp(state.L, i);
    else
      estimate = (i == 0) ? 0.0 : std::ldexp(kAhbaLFloor, i - 1);
    double alpha = ahba_alpha(estimate, pot.mu, rep.vnorm);
    if (retry_halved) {
      alpha *= 0.5;
      retry_halved = false;
    }
    const Vector z = x + alpha * rep.v;
    state.inner_total += 1;
    rep.trials += 1;

    const std::optional<double> Fz = pot.try_value(z);
    TraceRow row;
    row.k = state.k;
    row.inner = i;
    row.estimate = estimate;
    row.alpha = alpha;
    row.vnorm = rep.vnorm;
    row.feas = c.residual(z);
    row.ms = detail::ms_since(t0);
    if (!Fz) {
      row.Fmu = std::numeric_limits<double>::infinity();
      row.f = std::numeric_limits<double>::infinity();
      row.accepted = false;
      sink.row(row, z);
      ++nonfinite_run;
      if (nonfinite_run == 1) {
        ++i; // treated as a failed sufficient-decrease test
        continue;
      }
      if (!halved_retry_used) {
        halved_retry_used = true;
        retry_halved = true;
        continue;
      }
      throw NonFiniteValue("ahba_step: trial point evaluated non-finite twice");
    }
    nonfinite_run = 0;
    const double fz = pot.f.value(z);
    const Vector d = z - x;
    const double dx = metric.norm(d);
    const double rhs = fx + gfx.dot(d) + 0.5 * estimate * dx * dx;
    const bool ok = fz <= rhs + detail::ls_slack(fx, fz);
    row.Fmu = *Fz;
    row.f = fz;
    row.accepted = ok;
    sink.row(row, z);
    if (ok) {
      rep.alpha = alpha;
      rep.estimate = estimate;
      rep.F_after = *Fz;
      rep.f_after = fz;
      // Guaranteed per-iteration decrease for the accepted step.
      const double promised = -0.5 * alpha * rep.vnorm * rep.vnorm;
      if (rep.F_after - rep.F_before > promised + 1e-10)
        throw InvariantViolation("ahba_step: accepted step misses the decrease bound");
      state.x = z;
      state.L = 0.5 * estimate;
      state.k += 1;
      state.L_last_accepted = estimate;
      state.L_max_accepted = std::max(state.L_max_accepted, estimate);
      state.best_f = std::min(state.best_f, fz);
      return rep;
    }
    ++i;
  }
  throw InnerLoopExceeded("ahba_step: no trial accepted within max_inner_per_step");
}

inline SolveOutput run_ahba(const Potential& pot, const AffineConstraint& c,
                            const Vector& x0, const AhbaConfig& cfg,
                            TraceSink* sink = nullptr) {
  if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps))
    throw InvalidParameter("run_ahba: eps must be positive");
  if (cfg.L0 < 0.0 || !std::isfinite(cfg.L0))
    throw InvalidParameter("run_ahba: L0 must be >= 0");
  if (cfg.max_outer < 1) throw InvalidParameter("run_ahba: max_outer must be >= 1");
  if (cfg.max_inner_per_step < 1)
    throw InvalidParameter("run_ahba: max_inner_per_step must be >= 1");
  if (x0.size() != pot.f.dim) throw DimensionMismatch("run_ahba: x0 dimension");
  if (!pot.h.interior(x0)) throw InfeasibleStart("run_ahba: x0 is not interior");
  if (c.residual(x0) > 1e-8 * (1.0 + c.b.norm()))
    throw InfeasibleStart("run_ahba: x0 violates the affine constraint");

  const double nu = pot.h.nu;
  const double threshold = cfg.eps / (3.0 * nu);
  NullTraceSink null_sink;
  TraceSink& out = sink ? *sink : static_cast<TraceSink&>(null_sink);
  const auto t0 = std::chrono::steady_clock::now();
  NullBasis nb = build_null_basis(c);

  AhbaState st;
  st.x = x0;
  st.L = cfg.L0;
  st.best_f = pot.f.value(x0);

  SolveOutput res;
  res.eps = cfg.eps;
  res.mu = pot.mu;
  res.final_threshold = threshold;

  while (true) {
    AhbaStepReport rep = ahba_step(st, pot, c, nb, cfg, threshold, out, t0);
    if (rep.stopped) {
      res.status = SolveStatus::Converged;
      res.x = st.x;
      res.y = rep.y;
      res.final_vnorm = rep.vnorm;
      res.f_final = rep.f_after;
      res.Fmu_final = rep.F_after;
      break;
    }
    if (st.k >= cfg.max_outer) {
      res.status = SolveStatus::MaxIterations;
      res.x = st.x;
      // Fresh pairing at the final point so the reported (x, y, |v|) agree.
      const Vector gF = pot.gradient(st.x);
      LocalMetric metric(pot.h, st.x);
      KktSolution kkt = solve_first_order_kkt(metric.hessian(), c, nb, gF);
      st.directions += 1;
      res.y = kkt.y;
      res.final_vnorm = metric.norm(kkt.v);
      res.f_final = pot.f.value(st.x);
      res.Fmu_final = pot.value(st.x);
      break;
    }
  }
  res.iterations = st.k;
  res.directions = st.directions;
  res.inner_trials = st.inner_total;
  res.L_final = st.L;
  res.L_last_accepted = st.L_last_accepted;
  res.L_max_accepted = st.L_max_accepted;
  res.best_f_seen = std::min(st.best_f, res.f_final);
  res.feas_residual = c.residual(res.x);
  res.s = pot.f.gradient(res.x);
  if (c.rows() > 0) res.s -= c.A.transpose() * res.y;
  return res;
}

} // namespace ahb
