#include <doctest.h>

#include "grok/kernels.hpp"
#include "test_util.hpp"

using namespace grok;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE("kernels") {

TEST_CASE("parallel kernels are bit-identical to the serial references") {
  // Shapes straddle the parallel threshold and the 4-column unroll.
  for (auto [m, k, n] : {std::array<long, 3>{3, 5, 2}, {97, 64, 301}, {64, 97, 130}, {7, 1, 9}, {40, 41, 43}}) {
    const MatrixXd A = test::gaussian(m, k, 1), B = test::gaussian(k, n, 2);
    const MatrixXd At = A.transpose(), Bt = B.transpose();
    MatrixXd c1, c2;
    kernels::matmul(A, B, c1);
    kernels::ref::matmul(A, B, c2);
    CHECK((c1.array() == c2.array()).all());
    kernels::matmul_tn(At, B, c1);
    kernels::ref::matmul_tn(At, B, c2);
    CHECK((c1.array() == c2.array()).all());
    kernels::matmul_nt(A, Bt, c1);
    kernels::ref::matmul_nt(A, Bt, c2);
    CHECK((c1.array() == c2.array()).all());

    const VectorXd x = test::gaussian(k, 1, 3), z = test::gaussian(m, 1, 4);
    VectorXd y1, y2;
    kernels::matvec(A, x, y1);
    kernels::ref::matvec(A, x, y2);
    CHECK((y1.array() == y2.array()).all());
    kernels::matvec_t(A, z, y1);
    kernels::ref::matvec_t(A, z, y2);
    CHECK((y1.array() == y2.array()).all());
  }
}

TEST_CASE("kernels agree with Eigen products") {
  const MatrixXd A = test::gaussian(13, 8, 5), B = test::gaussian(8, 6, 6);
  MatrixXd C;
  kernels::matmul(A, B, C);
  CHECK(test::rel_err(C, A * B) < 1e-14);
  kernels::matmul_tn(A, test::gaussian(13, 4, 7), C);
  CHECK(test::rel_err(C, A.transpose() * test::gaussian(13, 4, 7)) < 1e-14);
  kernels::matmul_nt(A, test::gaussian(5, 8, 8), C);
  CHECK(test::rel_err(C, A * test::gaussian(5, 8, 8).transpose()) < 1e-14);
}

TEST_CASE("mismatched inner dimensions are rejected") {
  MatrixXd C;
  VectorXd y;
  CHECK_THROWS(kernels::matmul(MatrixXd(2, 3), MatrixXd(2, 3), C));
  CHECK_THROWS(kernels::matvec(MatrixXd(2, 3), VectorXd(2), y));
  CHECK_THROWS(kernels::ref::matmul_nt(MatrixXd(2, 3), MatrixXd(2, 4), C));
}

TEST_CASE("empty operands give empty or zero results") {
  MatrixXd C;
  kernels::matmul(MatrixXd(3, 0), MatrixXd(0, 2), C);
  CHECK(C.rows() == 3);
  CHECK(C.cols() == 2);
  CHECK(C.isZero(0.0));
}

}
