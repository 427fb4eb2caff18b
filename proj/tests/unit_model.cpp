#include <catch_amalgamated.hpp>

#include <cmath>

#include <ahb/barrier.hpp>
#include <ahb/model.hpp>

using ahb::Matrix;
using ahb::ObjectiveModel;
using ahb::Potential;
using ahb::Vector;

namespace {

ObjectiveModel smooth_model() {
  ObjectiveModel m;
  m.dim = 2;
  m.value = [](const Vector& x) { return std::sin(x(0)) + x(0) * x(1) * x(1); };
  m.gradient = [](const Vector& x) -> Vector {
    Vector g(2);
    g << std::cos(x(0)) + x(1) * x(1), 2.0 * x(0) * x(1);
    return g;
  };
  m.hessian = [](const Vector& x) -> Matrix {
    Matrix H(2, 2);
    H << -std::sin(x(0)), 2.0 * x(1), 2.0 * x(1), 2.0 * x(0);
    return H;
  };
  m.smooth_on_boundary = true;
  return m;
}

} // namespace

TEST_CASE("potential combines objective and barrier with weight mu") {
  ObjectiveModel f = smooth_model();
  ahb::Barrier h = ahb::make_log_orthant(2);
  Potential pot(f, h, 0.25);
  Vector x(2);
  x << 1.0, 2.0;
  const double expected = std::sin(1.0) + 4.0 + 0.25 * (-std::log(1.0) - std::log(2.0));
  CHECK(pot.value(x) == Catch::Approx(expected).epsilon(1e-15));
  Vector g = pot.gradient(x);
  CHECK(g(0) == Catch::Approx(std::cos(1.0) + 4.0 - 0.25).epsilon(1e-14));
  CHECK(g(1) == Catch::Approx(4.0 - 0.125).epsilon(1e-14));

  Vector bad(2);
  bad << -1.0, 1.0;
  CHECK_THROWS_AS(pot.value(bad), ahb::OutsideDomain);
  CHECK_THROWS_AS(pot.gradient(bad), ahb::OutsideDomain);
  CHECK_FALSE(pot.try_value(bad).has_value());
  CHECK(pot.try_value(x).has_value());

  CHECK_THROWS_AS(Potential(f, ahb::make_log_orthant(3), 0.1), ahb::DimensionMismatch);
  CHECK_THROWS_AS(Potential(f, h, 0.0), ahb::InvalidParameter);
  CHECK_THROWS_AS(Potential(f, h, -1.0), ahb::InvalidParameter);
}

TEST_CASE("finite-difference checks accept correct derivatives and flag wrong ones") {
  ObjectiveModel m = smooth_model();
  Vector x(2);
  x << 0.7, -1.3;
  CHECK(ahb::fd_check_gradient(m, x) < 1e-8);
  CHECK(ahb::fd_check_hessian(m, x) < 1e-6);

  ObjectiveModel broken = smooth_model();
  broken.gradient = [](const Vector& x) -> Vector {
    Vector g(2);
    g << std::cos(x(0)), 2.0 * x(0) * x(1); // missing the x1^2 term
    return g;
  };
  CHECK(ahb::fd_check_gradient(broken, x) > 1e-2);

  ObjectiveModel no_hess = smooth_model();
  no_hess.hessian = nullptr;
  CHECK_THROWS_AS(ahb::fd_check_hessian(no_hess, x), ahb::InvalidParameter);
}

TEST_CASE("smoothness probe reports a sane curvature scale") {
  // f(x) = 2|x|^2 has remainder exactly |v|^2, so against the orthant metric
  // at x = ones the ratio is bounded by 4 / min eig H = 4.
  ObjectiveModel f;
  f.dim = 2;
  f.value = [](const Vector& x) { return 2.0 * x.squaredNorm(); };
  f.gradient = [](const Vector& x) -> Vector { return 4.0 * x; };
  ahb::Barrier h = ahb::make_log_orthant(2);
  Vector x = Vector::Constant(2, 1.0);
  const double ratio = ahb::probe_local_smoothness(f, h, x);
  CHECK(ratio > 0.0);
  CHECK(ratio <= 4.0 + 1e-9);
}
