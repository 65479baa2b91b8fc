#pragma once

// Dense products used in the training loops.
//
// Every output entry is a sum accumulated in ascending index order by exactly
// one thread, so the OpenMP kernels are bit-identical to the serial reference
// versions in `ref` regardless of thread count.

#include <Eigen/Dense>

namespace grok::kernels {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// y = A x
void matvec(const MatrixXd& A, const VectorXd& x, VectorXd& y);
// y = A^T x
void matvec_t(const MatrixXd& A, const VectorXd& x, VectorXd& y);
// C = A B
void matmul(const MatrixXd& A, const MatrixXd& B, MatrixXd& C);
// C = A^T B
void matmul_tn(const MatrixXd& A, const MatrixXd& B, MatrixXd& C);
// C = A B^T
void matmul_nt(const MatrixXd& A, const MatrixXd& B, MatrixXd& C);

// Number of threads the kernels would use for a large product.
int max_threads();
// Work size (multiply-adds) below which the kernels stay single-threaded.
inline constexpr long kParallelThreshold = 1L << 15;

namespace ref {
void matvec(const MatrixXd& A, const VectorXd& x, VectorXd& y);
void matvec_t(const MatrixXd& A, const VectorXd& x, VectorXd& y);
void matmul(const MatrixXd& A, const MatrixXd& B, MatrixXd& C);
void matmul_tn(const MatrixXd& A, const MatrixXd& B, MatrixXd& C);
void matmul_nt(const MatrixXd& A, const MatrixXd& B, MatrixXd& C);
}  // namespace ref

}  // namespace grok::kernels
