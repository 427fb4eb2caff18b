#include <catch_amalgamated.hpp>

#include <cmath>

#include <ahb/barrier.hpp>
#include <ahb/model.hpp>

#include "support/oracles.hpp"

using ahb::Barrier;
using ahb::LocalMetric;
using ahb::Matrix;
using ahb::Vector;

TEST_CASE("omega matches the closed form and its series") {
  // omega(1/2) = (-1/2 - ln(1/2)) / (1/4) = 4 (ln 2 - 1/2)
  const double w_half = 4.0 * (std::log(2.0) - 0.5);
  CHECK(ahb::omega(0.5) == Catch::Approx(w_half).epsilon(1e-15));
  CHECK(ahb::omega(0.0) == Catch::Approx(0.5).margin(1e-16));
  // the two evaluation regimes agree across the switch: the points differ by
  // 2e-18, so any mismatch here is a branch inconsistency, not real variation
  CHECK(ahb::omega(1e-4 * (1.0 - 1e-14)) ==
        Catch::Approx(ahb::omega(1e-4 * (1.0 + 1e-14))).epsilon(1e-10));
  // monotone increasing and below the 1/(2(1-t)) envelope
  double prev = ahb::omega(0.0);
  for (double t = 0.05; t < 0.95; t += 0.05) {
    const double w = ahb::omega(t);
    CHECK(w > prev);
    CHECK(w <= 0.5 / (1.0 - t) + 1e-12);
    prev = w;
  }
  CHECK_THROWS_AS(ahb::omega(-0.1), ahb::OutOfRange);
  CHECK_THROWS_AS(ahb::omega(1.0), ahb::OutOfRange);
}

TEST_CASE("orthant barrier values at a hand-checked point") {
  Barrier b = ahb::make_log_orthant(3);
  CHECK(b.nu == 3.0);
  Vector x(3);
  x << 1.0, 2.0, 4.0;
  CHECK(b.value(x) == Catch::Approx(-3.0 * std::log(2.0)).epsilon(1e-15));
  Vector g = b.gradient(x);
  CHECK(g(0) == Catch::Approx(-1.0));
  CHECK(g(1) == Catch::Approx(-0.5));
  CHECK(g(2) == Catch::Approx(-0.25));
  Matrix H = b.hessian(x);
  CHECK(H(0, 0) == Catch::Approx(1.0));
  CHECK(H(1, 1) == Catch::Approx(0.25));
  CHECK(H(2, 2) == Catch::Approx(0.0625));
  CHECK(H(0, 1) == 0.0);

  Vector edge(3);
  edge << 1.0, 0.0, 1.0;
  CHECK_FALSE(b.interior(edge));
  CHECK(b.value(edge) == std::numeric_limits<double>::infinity());
  CHECK(b.interior(x));
}

TEST_CASE("box barrier on (0,2): values at x = 1.5") {
  Barrier b = ahb::make_log_box(Vector::Zero(1), Vector::Constant(1, 2.0));
  CHECK(b.nu == 2.0);
  Vector x(1);
  x << 1.5;
  CHECK(b.value(x) == Catch::Approx(-std::log(1.5) - std::log(0.5)).epsilon(1e-15));
  CHECK(b.gradient(x)(0) == Catch::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(b.hessian(x)(0, 0) == Catch::Approx(40.0 / 9.0).epsilon(1e-15));

  Vector lo(2), hi(2);
  lo << 0.0, 1.0;
  hi << 1.0, 1.0; // equal on the second coordinate
  CHECK_THROWS_AS(ahb::make_log_box(lo, hi), ahb::InvalidBounds);
}

TEST_CASE("ball barrier: unit ball in 1-D and the sampled parameter") {
  Vector c(1);
  c << 0.0;
  Barrier b = ahb::make_log_ball(c, 1.0);
  CHECK(b.nu == 1.0); // sampled <g, H^-1 g> never exceeds 1 for this barrier
  Vector x(1);
  x << 0.5;
  CHECK(b.value(x) == Catch::Approx(-std::log(0.75)).epsilon(1e-15));
  CHECK(b.gradient(x)(0) == Catch::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(b.hessian(x)(0, 0) == Catch::Approx(40.0 / 9.0).epsilon(1e-15));

  Vector c3 = Vector::Zero(3);
  Barrier b3 = ahb::make_log_ball(c3, 2.5);
  CHECK(b3.nu == 1.0);
  CHECK_THROWS_AS(ahb::make_log_ball(c3, 0.0), ahb::InvalidRadius);
}

TEST_CASE("sum of barriers composes values and parameters") {
  Barrier orth = ahb::make_log_orthant(2);
  Vector center = Vector::Constant(2, 1.0);
  Barrier ball = ahb::make_log_ball(center, 3.0);
  Barrier s = ahb::sum_barriers(orth, ball);
  CHECK(s.nu == orth.nu + ball.nu);
  Vector x(2);
  x << 0.5, 1.5;
  CHECK(s.value(x) == Catch::Approx(orth.value(x) + ball.value(x)).epsilon(1e-14));
  CHECK((s.gradient(x) - (orth.gradient(x) + ball.gradient(x))).norm() <=
        1e-15 * s.gradient(x).norm());
  CHECK((s.hessian(x) - (orth.hessian(x) + ball.hessian(x))).norm() <=
        1e-15 * s.hessian(x).norm());
  CHECK(s.interior(x));
  Vector outside(2);
  outside << -0.5, 1.0; // inside the ball, outside the orthant
  CHECK_FALSE(s.interior(outside));
  CHECK_THROWS_AS(ahb::sum_barriers(orth, ahb::make_log_orthant(3)), ahb::DimensionMismatch);
}

TEST_CASE("barrier derivatives agree with finite differences") {
  Barrier box = ahb::make_log_box(Vector::Constant(3, -1.0), Vector::Constant(3, 2.0));
  Vector x(3);
  x << 0.0, 0.5, 1.2;
  ahb::ObjectiveModel m = ahb::barrier_as_model(box);
  CHECK(ahb::fd_check_gradient(m, x) < 1e-7);
  CHECK(ahb::fd_check_hessian(m, x) < 1e-5);

  Barrier ball = ahb::make_log_ball(Vector::Zero(3), 2.0);
  Vector xb(3);
  xb << 0.3, -0.4, 0.9;
  ahb::ObjectiveModel mb = ahb::barrier_as_model(ball);
  CHECK(ahb::fd_check_gradient(mb, xb) < 1e-7);
  CHECK(ahb::fd_check_hessian(mb, xb) < 1e-5);
}

TEST_CASE("local metric norms against explicit numbers") {
  Matrix H(2, 2);
  H << 2.0, 0.0, 0.0, 8.0;
  LocalMetric m(H, Vector::Zero(2));
  Vector v(2);
  v << 1.0, 1.0;
  CHECK(m.norm(v) == Catch::Approx(std::sqrt(10.0)).epsilon(1e-15));
  CHECK(m.dual_norm(v) == Catch::Approx(std::sqrt(0.5 + 0.125)).epsilon(1e-15));
  Vector sol = m.solve(v);
  CHECK(sol(0) == Catch::Approx(0.5));
  CHECK(sol(1) == Catch::Approx(0.125));

  Vector e1(2);
  e1 << 1.0, 0.0; // metric norm sqrt(2)
  CHECK(ahb::dikin_step_feasible(m, e1, 0.7));
  CHECK_FALSE(ahb::dikin_step_feasible(m, e1, 0.8));
  CHECK_THROWS_AS(ahb::dikin_step_feasible(m, e1, -0.1), ahb::OutOfRange);
}

TEST_CASE("local metric rejects an indefinite matrix") {
  Matrix H(2, 2);
  H << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(LocalMetric(H, Vector::Zero(2)), ahb::IllConditionedMetric);
}

TEST_CASE("dual norm is the metric norm of the solved vector") {
  std::mt19937_64 rng(11);
  Matrix H = oracle::random_spd(rng, 5, 0.5, 4.0);
  LocalMetric m(H, Vector::Zero(5));
  Vector s = oracle::gaussian_vector(rng, 5);
  // |s|_* = |H^-1 s|_H
  CHECK(m.dual_norm(s) == Catch::Approx(m.norm(m.solve(s))).epsilon(1e-12));
  // Cauchy-Schwarz pairing: <s, v> <= |s|_* |v|_x
  Vector v = oracle::gaussian_vector(rng, 5);
  CHECK(std::abs(s.dot(v)) <= m.dual_norm(s) * m.norm(v) * (1.0 + 1e-12));
}
