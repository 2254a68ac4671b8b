#include <cmath>

#include "doctest.h"

#include "dissolve/finite_diff.hpp"
#include "dissolve/linalg.hpp"
#include "dissolve/rng.hpp"
#include "support.hpp"

using namespace dissolve;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("rng is deterministic and splits are independent") {
  Rng a(123), b(123);
  for (int i = 0; i < 32; ++i) CHECK(a.uniform() == b.uniform());
  CHECK((a.gaussian_vector(8) - b.gaussian_vector(8)).norm() == 0.0);

  Rng parent(9);
  Vector s0 = parent.split(0).gaussian_vector(4);
  Vector s1 = parent.split(1).gaussian_vector(4);
  CHECK((s0 - s1).norm() > 0.0);
  CHECK((parent.split(0).gaussian_vector(4) - s0).norm() == 0.0);
}

TEST_CASE("uniform ball samples stay inside and center on the mean") {
  Rng rng(4);
  const Point center = Point::from_vector(Vector::Constant(3, 2.0));
  Vector mean = Vector::Zero(3);
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const Point s = sample_uniform_ball(center, 0.5, rng);
    CHECK((s.data - center.data).norm() <= 0.5 + 1e-15);
    mean += s.data;
  }
  mean /= trials;
  CHECK((mean - center.data).norm() < 0.01 * 0.5);
}

TEST_CASE("random_orthonormal has orthonormal columns and fixed seeds") {
  Rng rng(11);
  const MatrixRM x = random_orthonormal(12, 4, rng);
  CHECK((x.transpose() * x - Eigen::MatrixXd::Identity(4, 4)).norm() <=
        1e-12);
  Rng r1(5), r2(5);
  CHECK((random_orthonormal(6, 2, r1) - random_orthonormal(6, 2, r2))
            .norm() == 0.0);

  Rng r3(1);
  const MatrixRM one = random_orthonormal(1, 1, r3);
  CHECK(std::abs(std::abs(one(0, 0)) - 1.0) <= 1e-15);

  CHECK_ERROR_CODE(random_orthonormal(2, 3, rng),
                   ErrorCode::dimension_mismatch);
}

TEST_CASE("pinv_solve handles full-rank and rank-deficient systems") {
  // diag(2,0), b=(4,3): least squares zeroes the null coordinate.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 2.0;
  Vector b(2);
  b << 4.0, 3.0;
  Vector y = pinv_solve(m, b);
  CHECK(y[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(y[1]) <= 1e-12);

  CHECK((pinv_solve(Eigen::MatrixXd::Identity(3, 3),
                    Vector::LinSpaced(3, 1.0, 3.0)) -
         Vector::LinSpaced(3, 1.0, 3.0))
            .norm() <= 1e-13);

  Eigen::MatrixXd d41 = Eigen::Vector2d(4.0, 1.0).asDiagonal();
  Vector b82(2);
  b82 << 8.0, 2.0;
  CHECK((pinv_solve(d41, b82) - Vector::Constant(2, 2.0)).norm() <= 1e-12);
}

TEST_CASE("pinv_solve minimal-norm property on random rank-deficient 5x5") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    // Rank-3 symmetric PSD matrix.
    const MatrixRM u = rng.gaussian_matrix(5, 3);
    const Eigen::MatrixXd m = u * u.transpose();
    const Vector b = rng.gaussian_vector(5);
    const Vector y = pinv_solve(m, b);

    // Brute-force reference through the eigendecomposition.
    const EighResult eig = sym_eigh(m);
    Vector ref = Vector::Zero(5);
    for (Index k = 0; k < 5; ++k) {
      if (std::abs(eig.eigenvalues[k]) <= 1e-10) continue;
      const Vector v = eig.eigenvectors.col(k);
      ref += v * (v.dot(b) / eig.eigenvalues[k]);
    }
    CHECK((y - ref).norm() <= 1e-9 * (1.0 + ref.norm()));
  }
}

TEST_CASE("tridiag_solve against hand solves") {
  Vector d1(1), b1(1);
  d1 << 2.0;
  b1 << 4.0;
  CHECK(tridiag_solve(d1, Vector(0), b1)[0] == doctest::Approx(2.0));

  // 2y1 - y2 = 1, -y1 + 2y2 = 1 has the solution (1, 1).
  Vector d2 = Vector::Constant(2, 2.0), off = Vector::Constant(1, -1.0);
  CHECK((tridiag_solve(d2, off, Vector::Constant(2, 1.0)) -
         Vector::Constant(2, 1.0))
            .norm() <= 1e-14);

  CHECK(tridiag_solve(d2, off, Vector::Zero(2)).norm() == 0.0);

  Vector singular = Vector::Zero(2);
  CHECK_ERROR_CODE(tridiag_solve(singular, off, b1.replicate(2, 1)),
                   ErrorCode::singular_pivot);
}

TEST_CASE("sym_eigh frozen spectra and reconstruction") {
  Eigen::MatrixXd d = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
  EighResult r = sym_eigh(d);
  CHECK(r.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(r.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(r.eigenvalues[2] == doctest::Approx(3.0));

  CHECK((sym_eigh(Eigen::MatrixXd::Identity(4, 4)).eigenvalues -
         Vector::Ones(4))
            .norm() <= 1e-13);

  // Second-difference matrix, n=3: eigenvalues 2 - 2 cos(k pi / 4).
  Eigen::MatrixXd t(3, 3);
  t << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  r = sym_eigh(t);
  const double sq2 = std::sqrt(2.0);
  CHECK(r.eigenvalues[0] == doctest::Approx(2.0 - sq2).epsilon(1e-12));
  CHECK(r.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.eigenvalues[2] == doctest::Approx(2.0 + sq2).epsilon(1e-12));

  Rng rng(3);
  const MatrixRM g = rng.gaussian_matrix(50, 50);
  const Eigen::MatrixXd s = 0.5 * (g + g.transpose());
  r = sym_eigh(s);
  const Eigen::MatrixXd recon = r.eigenvectors *
                                r.eigenvalues.asDiagonal() *
                                r.eigenvectors.transpose();
  CHECK((recon - s).norm() <= 1e-9 * (1.0 + s.norm()));
  CHECK((r.eigenvectors.transpose() * r.eigenvectors -
         Eigen::MatrixXd::Identity(50, 50))
            .norm() <= 1e-12);
  for (Index k = 1; k < 50; ++k)
    CHECK(r.eigenvalues[k] >= r.eigenvalues[k - 1]);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 0, 1;
  CHECK_ERROR_CODE(sym_eigh(bad), ErrorCode::non_symmetric);
}

TEST_CASE("fd_gradient matches hand gradients") {
  Vector x12(2);
  x12 << 1.0, 2.0;
  Vector g = fd_gradient([](const Vector& v) { return v.squaredNorm(); },
                         x12);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-6));

  CHECK(fd_gradient([](const Vector&) { return 3.5; }, x12).norm() <= 1e-8);

  Vector x35(2);
  x35 << 3.0, 5.0;
  g = fd_gradient([](const Vector& v) { return v[0] * v[1]; }, x35);
  CHECK(g[0] == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("fd_jvp is exact on linear maps up to roundoff") {
  // Central differences of a linear map carry no truncation term, only
  // the cancellation noise of the two shifted evaluations.
  Rng rng(8);
  const Vector x = rng.gaussian_vector(4);
  const Vector v = rng.gaussian_vector(4);
  CHECK((fd_jvp([](const Vector& z) { return z; }, x, v) - v).norm() <=
        1e-8 * (1.0 + v.norm()));

  const MatrixRM m = rng.gaussian_matrix(4, 4);
  const Vector jv =
      fd_jvp([&m](const Vector& z) { return Vector(m * z); }, x, v);
  CHECK((jv - m * v).norm() <= 1e-8 * (1.0 + (m * v).norm()));

  CHECK(fd_jvp([](const Vector&) { return Vector::Ones(4); }, x, v).norm() <=
        1e-8);
}

TEST_SUITE_END();
