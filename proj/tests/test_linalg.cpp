#include <doctest.h>

#include <cmath>

#include "grok/error.hpp"
#include "grok/linalg.hpp"
#include "test_util.hpp"

using namespace grok;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd a53() {
  MatrixXd A(5, 3);
  A << 0.8, -1.2, 0.5, 0.3, 0.7, -0.9, -1.1, 0.2, 0.4, 0.6, -0.4, 1.3, 0.05, 1.0, -0.2;
  return A;
}

MatrixXd a44() {
  MatrixXd A(4, 4);
  A << 1.0, 0.2, -0.3, 0.5, 0.4, -0.8, 0.6, 0.1, -0.2, 0.3, 0.9, -0.7, 0.5, 0.5, -0.1, 0.2;
  return A;
}

double inner(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("compact_svd of a diagonal matrix") {
  MatrixXd D = MatrixXd::Zero(2, 2);
  D.diagonal() << 3.0, 1.0;
  SvdFactors f = compact_svd(D, 0.0);
  CHECK(f.rank() == 2);
  CHECK(f.S(0) == doctest::Approx(3.0));
  CHECK(f.S(1) == doctest::Approx(1.0));
  CHECK((f.U - MatrixXd::Identity(2, 2)).norm() < 1e-14);
  CHECK((f.V - MatrixXd::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("compact_svd of the zero matrix is empty") {
  SvdFactors f = compact_svd(MatrixXd::Zero(2, 2));
  CHECK(f.rank() == 0);
  CHECK(f.reconstruct().isZero(0.0));
}

TEST_CASE("compact_svd of a 5x3 matrix matches reference singular values") {
  // numpy.linalg.svd of the same literal matrix.
  const double ref[] = {2.314724374499712, 1.439591968565362, 0.975769457473957};
  const MatrixXd A = a53();
  SvdFactors f = compact_svd(A);
  REQUIRE(f.rank() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(f.S(i) - ref[i]) < 1e-13);
  CHECK((f.reconstruct() - A).norm() <= 1e-9 * std::max(1.0, A.norm()));
}

TEST_CASE("compact_svd invariants on random matrices") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const long m = 2 + static_cast<long>(seed % 5), n = 2 + static_cast<long>((seed * 7) % 6);
    const MatrixXd A = test::gaussian(m, n, seed);
    SvdFactors f = compact_svd(A);
    const long k = f.rank();
    CHECK((f.U.transpose() * f.U - MatrixXd::Identity(k, k)).norm() <= 1e-10);
    CHECK((f.V.transpose() * f.V - MatrixXd::Identity(k, k)).norm() <= 1e-10);
    for (long i = 0; i < k; ++i) {
      CHECK(f.S(i) >= 0.0);
      if (i > 0) CHECK(f.S(i) <= f.S(i - 1));
      Eigen::Index arg;
      f.U.col(i).cwiseAbs().maxCoeff(&arg);
      CHECK(f.U(arg, i) > 0.0);
    }
    CHECK((f.reconstruct() - A).norm() <= 1e-9 * std::max(1.0, A.norm()));
  }
}

TEST_CASE("compact_svd drops singular values below the rank tolerance") {
  const MatrixXd u = test::gaussian(6, 1, 1), v = test::gaussian(4, 1, 2);
  const MatrixXd A = u * v.transpose();
  CHECK(compact_svd(A).rank() == 1);
  MatrixXd D = MatrixXd::Zero(3, 3);
  D.diagonal() << 1.0, 1e-3, 1e-8;
  CHECK(compact_svd(D, 1e-6).rank() == 2);
}

TEST_CASE("compact_svd rejects non-finite input") {
  MatrixXd A = MatrixXd::Ones(2, 2);
  A(0, 1) = std::nan("");
  CHECK_THROWS_AS(compact_svd(A), InputError);
  A(0, 1) = INFINITY;
  CHECK_THROWS_AS(compact_svd(A), InputError);
}

TEST_CASE("soft_threshold examples") {
  VectorXd v(3);
  v << 2.0, -0.5, 0.0;
  VectorXd out = soft_threshold(v, 1.0);
  CHECK(out(0) == 1.0);
  CHECK(out(1) == 0.0);
  CHECK(out(2) == 0.0);
  CHECK(soft_threshold(v, 0.0) == v);
  VectorXd w(2);
  w << 0.3, -0.3;
  out = soft_threshold(w, 0.1);
  CHECK(out(0) == doctest::Approx(0.2));
  CHECK(out(1) == doctest::Approx(-0.2));
  CHECK_THROWS_AS(soft_threshold(v, -1.0), InputError);
}

TEST_CASE("soft_threshold prox identity") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const VectorXd v = test::gaussian(8, 1, seed);
    const double gamma = 0.1 + 0.05 * static_cast<double>(seed % 10);
    const VectorXd p = soft_threshold(v, gamma);
    for (long i = 0; i < v.size(); ++i) {
      const double r = v(i) - p(i);
      if (p(i) != 0.0) CHECK(std::abs(r - gamma * (p(i) > 0 ? 1.0 : -1.0)) < 1e-14);
      else CHECK(std::abs(r) <= gamma + 1e-14);
    }
  }
}

TEST_CASE("singular_value_threshold examples") {
  MatrixXd D = MatrixXd::Zero(2, 2);
  D.diagonal() << 3.0, 1.0;
  MatrixXd out = singular_value_threshold(D, 2.0);
  MatrixXd expect = MatrixXd::Zero(2, 2);
  expect(0, 0) = 1.0;
  CHECK((out - expect).norm() < 1e-14);

  const MatrixXd A = test::gaussian(4, 3, 9);
  CHECK((singular_value_threshold(A, 0.0) - A).norm() <= 1e-9);
  CHECK_THROWS_AS(singular_value_threshold(A, -0.1), InputError);
}

TEST_CASE("singular_value_threshold shrinks a 4x4 spectrum") {
  // numpy singular values of the literal; shrink by 0.5 and clip.
  const double ref[] = {1.5505980342032435, 1.111884811967176, 0.9402394484106714, 0.07285383239166042};
  Eigen::JacobiSVD<MatrixXd> svd(singular_value_threshold(a44(), 0.5));
  for (int i = 0; i < 4; ++i) CHECK(std::abs(svd.singularValues()(i) - std::max(ref[i] - 0.5, 0.0)) < 1e-12);
}

TEST_CASE("singular_value_threshold is nonexpansive") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const MatrixXd A = test::gaussian(5, 4, 2 * seed), B = test::gaussian(5, 4, 2 * seed + 1);
    const double gamma = 0.2 * static_cast<double>(seed % 7);
    CHECK((singular_value_threshold(A, gamma) - singular_value_threshold(B, gamma)).norm() <= (A - B).norm() + 1e-8);
  }
}

TEST_CASE("l1_subgradient examples and identity") {
  VectorXd v(3);
  v << 1.5, -2.0, 0.0;
  VectorXd h = l1_subgradient(v);
  CHECK(h(0) == 1.0);
  CHECK(h(1) == -1.0);
  CHECK(h(2) == 0.0);
  CHECK(l1_subgradient(VectorXd::Zero(4)).isZero(0.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const VectorXd r = test::gaussian(11, 1, seed);
    CHECK(l1_subgradient(r).dot(r) == doctest::Approx(r.lpNorm<1>()).epsilon(1e-14));
  }
}

TEST_CASE("nuclear_subgradient examples") {
  CHECK((nuclear_subgradient(MatrixXd::Identity(2, 2)) - MatrixXd::Identity(2, 2)).norm() < 1e-14);
  MatrixXd D = MatrixXd::Zero(2, 2);
  D(0, 0) = 2.0;
  MatrixXd expect = MatrixXd::Zero(2, 2);
  expect(0, 0) = 1.0;
  CHECK((nuclear_subgradient(D) - expect).norm() < 1e-14);
}

TEST_CASE("nuclear_subgradient of a full-rank 3x3 matrix") {
  MatrixXd A(3, 3);
  A << 2.0, -0.5, 0.3, 0.1, 1.5, -0.4, 0.7, 0.2, 0.9;
  const double nuclear_ref = 4.584822308575744;  // numpy: sum of singular values
  const MatrixXd H = nuclear_subgradient(A);
  CHECK(std::abs(norm(H, NormKind::spectral) - 1.0) < 1e-12);
  CHECK(std::abs((H.transpose() * A).trace() - nuclear_ref) < 1e-12);
}

TEST_CASE("nuclear_subgradient properties on random matrices") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const MatrixXd A = test::gaussian(4, 6, 3 * seed), B = test::gaussian(4, 6, 3 * seed + 1);
    const MatrixXd H = nuclear_subgradient(A);
    const double nucA = norm(A, NormKind::nuclear);
    CHECK(norm(H, NormKind::spectral) <= 1.0 + 1e-9);
    CHECK(std::abs(inner(H, A) - nucA) <= 1e-8 * nucA);
    CHECK(norm(B, NormKind::nuclear) >= nucA + inner(H, B - A) - 1e-7);
  }
}

TEST_CASE("affine_project examples") {
  MatrixXd X(1, 2);
  X << 1.0, 0.0;
  VectorXd y(1);
  y << 1.0;
  VectorXd p = affine_project(VectorXd::Zero(2), X, y);
  CHECK(p(0) == doctest::Approx(1.0));
  CHECK(p(1) == doctest::Approx(0.0));
  VectorXd feasible(2);
  feasible << 1.0, 5.0;
  CHECK((affine_project(feasible, X, y) - feasible).norm() < 1e-15);
}

TEST_CASE("affine_project feasibility, row-space step and idempotence") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MatrixXd X = test::gaussian(6, 15, 4 * seed);
    const VectorXd y = X * test::gaussian(15, 1, 4 * seed + 1);
    const VectorXd a = test::gaussian(15, 1, 4 * seed + 2);
    const VectorXd p = affine_project(a, X, y);
    CHECK((X * p - y).norm() <= 1e-8 * y.norm());
    // p - a must be orthogonal to null(X): it equals its row-space projection.
    const VectorXd d = p - a;
    const MatrixXd P = pseudo_inverse(X) * X;
    CHECK((P * d - d).norm() <= 1e-10 * std::max(1.0, d.norm()));
    CHECK((affine_project(p, X, y) - p).norm() <= 1e-9);
    AffineProjector proj(X, y);
    CHECK((proj(a) - p).norm() <= 1e-12);
  }
}

TEST_CASE("norm examples") {
  MatrixXd v(3, 1);
  v << 1.0, -2.0, 3.0;
  CHECK(norm(v, NormKind::l1) == 6.0);
  CHECK(norm(v, NormKind::linf) == 3.0);
  CHECK(norm(v, NormKind::l0) == 3.0);
  CHECK(norm(v, NormKind::l2) == doctest::Approx(std::sqrt(14.0)));
  MatrixXd D = MatrixXd::Zero(2, 2);
  D.diagonal() << 2.0, 3.0;
  CHECK(norm(D, NormKind::nuclear) == doctest::Approx(5.0));
  CHECK(norm(D, NormKind::spectral) == doctest::Approx(3.0));
  CHECK(norm(D, NormKind::frobenius) == doctest::Approx(std::sqrt(13.0)));
  MatrixXd tiny(2, 1);
  tiny << 1e-13, 1e-11;
  CHECK(norm(tiny, NormKind::l0) == 1.0);
}

TEST_CASE("spectral norm of the 5x3 literal") {
  CHECK(std::abs(norm(a53(), NormKind::spectral) - 2.314724374499712) < 1e-13);
}

TEST_CASE("nuclear norm equals the sum of compact singular values") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MatrixXd A = test::gaussian(3 + static_cast<long>(seed % 4), 5, seed + 100);
    CHECK(std::abs(norm(A, NormKind::nuclear) - compact_svd(A).S.sum()) <= 1e-9);
  }
}

}
