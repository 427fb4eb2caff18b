#include <catch_amalgamated.hpp>

#include <cmath>

#include <ahb/problems.hpp>

using ahb::Matrix;
using ahb::ProblemBundle;
using ahb::Vector;

TEST_CASE("box quadratic instance structure") {
  const ahb::Index n = 6;
  ProblemBundle pb = ahb::build_box_qp(n, 3, 0.5);
  CHECK(pb.name == "box_qp");
  CHECK(pb.h.nu == 2.0 * n);
  REQUIRE(pb.c.A.rows() == 1);
  CHECK((pb.c.A.array() == 1.0).all());
  CHECK(pb.c.b(0) == Catch::Approx(0.9 * n));
  CHECK((pb.x_start.array() == 0.9).all()); // midpoint projected onto the mass row
  CHECK(pb.c.residual(pb.x_start) <= 1e-12);
  CHECK(pb.h.interior(pb.x_start));

  // eigenvalue magnitudes in [2.5, 5] with exactly half negative
  Matrix Q = pb.f.hessian(pb.x_start);
  CHECK((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
  REQUIRE(eig.info() == Eigen::Success);
  Vector lam = eig.eigenvalues();
  long negs = 0;
  for (ahb::Index i = 0; i < n; ++i) {
    CHECK(std::abs(lam(i)) >= 2.5 - 1e-9);
    CHECK(std::abs(lam(i)) <= 5.0 + 1e-9);
    if (lam(i) < 0.0) ++negs;
  }
  CHECK(negs == 3);

  CHECK(ahb::fd_check_gradient(pb.f, pb.x_start) < 1e-6);
  CHECK(ahb::fd_check_hessian(pb.f, pb.x_start) < 1e-4);
}

TEST_CASE("box quadratic determinism and variants") {
  ProblemBundle a = ahb::build_box_qp(5, 11, 0.4);
  ProblemBundle b = ahb::build_box_qp(5, 11, 0.4);
  Vector probe(5);
  probe << 0.3, 1.1, 0.7, 1.9, 0.2;
  CHECK(a.f.value(probe) == b.f.value(probe)); // bit-identical generators
  CHECK((a.f.gradient(probe) - b.f.gradient(probe)).norm() == 0.0);

  ProblemBundle convex = ahb::build_box_qp(5, 11, 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(convex.f.hessian(probe), Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues()(0) >= 2.5 - 1e-9);

  ProblemBundle loose = ahb::build_box_qp(5, 11, 0.4, false);
  CHECK(loose.c.rows() == 0);
  CHECK((loose.x_start.array() == 1.0).all());

  CHECK_THROWS_AS(ahb::build_box_qp(0, 1, 0.5), ahb::InvalidDimension);
  CHECK_THROWS_AS(ahb::build_box_qp(4, 1, 1.5), ahb::InvalidParameter);
  CHECK_THROWS_AS(ahb::build_box_qp(4, 1, -0.1), ahb::InvalidParameter);
}

TEST_CASE("poisson model derivatives at a hand-checked point") {
  Matrix Phi(1, 1);
  Phi << 2.0;
  Vector z = Vector::Constant(1, 1.0);
  ProblemBundle pb = ahb::build_poisson(Phi, z, 1.0, 0.5);
  CHECK(pb.name == "poisson");
  CHECK(pb.f.dim == 2);
  CHECK(!pb.f.smooth_on_boundary);
  REQUIRE(pb.c.A.rows() == 1);
  CHECK(pb.c.A(0, 0) == 2.0);
  CHECK(pb.c.A(0, 1) == -1.0);
  CHECK(pb.c.b(0) == 0.0);
  CHECK(pb.x_start(0) == 1.0);
  CHECK(pb.x_start(1) == 2.0); // Phi * ones
  CHECK(pb.c.residual(pb.x_start) == 0.0);

  Vector x(2);
  x << 4.0, 2.0;
  CHECK(pb.f.value(x) == Catch::Approx(2.0 + 2.0 - std::log(2.0)).epsilon(1e-15));
  Vector g = pb.f.gradient(x);
  CHECK(g(0) == Catch::Approx(0.25).epsilon(1e-15));  // alpha p u^(p-1)
  CHECK(g(1) == Catch::Approx(0.5).epsilon(1e-15));   // 1 - z/v
  Matrix H = pb.f.hessian(x);
  CHECK(H(0, 0) == Catch::Approx(-0.03125).epsilon(1e-15)); // concave in u
  CHECK(H(1, 1) == Catch::Approx(0.25).epsilon(1e-15));     // z/v^2
  CHECK(H(0, 1) == 0.0);

  CHECK(ahb::fd_check_gradient(pb.f, x) < 1e-6);
  CHECK(ahb::fd_check_hessian(pb.f, x) < 1e-4);
}

TEST_CASE("poisson zero counts skip the log term") {
  Matrix Phi(2, 1);
  Phi << 1.0, 1.0;
  Vector z(2);
  z << 0.0, 3.0;
  ProblemBundle pb = ahb::build_poisson(Phi, z, 1.0, 0.5);
  Vector x(3);
  x << 1.0, 0.5, 0.5;
  CHECK(std::isfinite(pb.f.value(x)));
  CHECK(pb.f.gradient(x)(1) == 1.0); // no z/v pull when z = 0
}

TEST_CASE("poisson input validation") {
  Matrix Phi(1, 1);
  Phi << 2.0;
  Vector z = Vector::Constant(1, 1.0);
  CHECK_THROWS_AS(ahb::build_poisson(Matrix(0, 1), Vector(0), 1.0, 0.5),
                  ahb::InvalidDimension);
  CHECK_THROWS_AS(ahb::build_poisson(Phi, Vector::Constant(2, 1.0), 1.0, 0.5),
                  ahb::DimensionMismatch);
  CHECK_THROWS_AS(ahb::build_poisson(Phi, z, 0.0, 0.5), ahb::InvalidParameter);
  CHECK_THROWS_AS(ahb::build_poisson(Phi, z, 1.0, 1.0), ahb::InvalidParameter);
  CHECK_THROWS_AS(ahb::build_poisson(Phi, z, 1.0, 0.0), ahb::InvalidParameter);
  CHECK_THROWS_AS(ahb::build_poisson(-Phi, z, 1.0, 0.5), ahb::InvalidData);
  CHECK_THROWS_AS(ahb::build_poisson(Phi, Vector::Constant(1, -1.0), 1.0, 0.5),
                  ahb::InvalidData);
  Matrix zero_col(2, 2);
  zero_col << 1.0, 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(ahb::build_poisson(zero_col, Vector::Constant(2, 1.0), 1.0, 0.5),
                  ahb::InvalidData);
  Matrix zero_row(2, 2);
  zero_row << 1.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(ahb::build_poisson(zero_row, Vector::Constant(2, 1.0), 1.0, 0.5),
                  ahb::InvalidData);
}

TEST_CASE("poisson seeded builder") {
  ProblemBundle pb = ahb::build_poisson(3, 2, 1.0, 0.5, 7);
  CHECK(pb.f.dim == 5);
  CHECK(pb.c.A.rows() == 2);
  CHECK(pb.h.nu == 5.0);
  CHECK(pb.h.interior(pb.x_start));
  CHECK(pb.c.residual(pb.x_start) <= 1e-12);
  ProblemBundle pb2 = ahb::build_poisson(3, 2, 1.0, 0.5, 7);
  CHECK((pb.c.A - pb2.c.A).cwiseAbs().maxCoeff() == 0.0);
  Vector x = pb.x_start * 1.3;
  x = x.array() + 0.2;
  CHECK(ahb::fd_check_gradient(pb.f, x) < 1e-6);
  CHECK(ahb::fd_check_hessian(pb.f, x) < 1e-4);
}

TEST_CASE("regression model derivatives agree with finite differences") {
  ProblemBundle pb = ahb::build_lp_regression(4, 0.1, 0.5, 2);
  CHECK(pb.name == "lp_regression");
  CHECK(pb.h.nu == 4.0);
  CHECK(pb.c.rows() == 0);
  CHECK((pb.x_start.array() == 1.0).all());
  Vector x(4);
  x << 0.7, 1.3, 0.4, 2.1;
  CHECK(ahb::fd_check_gradient(pb.f, x) < 1e-6);
  CHECK(ahb::fd_check_hessian(pb.f, x) < 1e-4);

  CHECK_THROWS_AS(ahb::build_lp_regression(0, 0.1, 0.5, 2), ahb::InvalidDimension);
  CHECK_THROWS_AS(ahb::build_lp_regression(4, 0.0, 0.5, 2), ahb::InvalidParameter);
  CHECK_THROWS_AS(ahb::build_lp_regression(4, 0.1, 1.0, 2), ahb::InvalidParameter);
}
