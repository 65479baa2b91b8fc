#include "grok/kernels.hpp"

#include <omp.h>

#include <algorithm>

#include "grok/error.hpp"

namespace grok::kernels {

namespace {

void check_mul(long inner_a, long inner_b) {
  require(inner_a == inner_b, "kernels: inner dimensions disagree");
}

constexpr long kColumnBlock = 8;

// For j in [j0, j1): C[:, j] += sum_k A[:, k] * coef(k, j), k ascending.
// Four k-terms and a block of output columns are handled per pass so A's
// columns are reused from cache; every output element still accumulates its
// terms one at a time in ascending k, exactly like the reference loops.
template <class Coef>
inline void axpy_block(const double* a, long m, long K, Coef coef, double* c, long j0, long j1) {
  long k = 0;
  for (; k + 4 <= K; k += 4) {
    const double* a0 = a + k * m;
    const double* a1 = a0 + m;
    const double* a2 = a1 + m;
    const double* a3 = a2 + m;
    for (long j = j0; j < j1; ++j) {
      const double b0 = coef(k, j), b1 = coef(k + 1, j), b2 = coef(k + 2, j), b3 = coef(k + 3, j);
      double* cj = c + j * m;
      for (long i = 0; i < m; ++i) {
        double t = cj[i];
        t += a0[i] * b0;
        t += a1[i] * b1;
        t += a2[i] * b2;
        t += a3[i] * b3;
        cj[i] = t;
      }
    }
  }
  for (; k < K; ++k) {
    const double* ak = a + k * m;
    for (long j = j0; j < j1; ++j) {
      const double bk = coef(k, j);
      double* cj = c + j * m;
      for (long i = 0; i < m; ++i) cj[i] += ak[i] * bk;
    }
  }
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void matvec(const MatrixXd& A, const VectorXd& x, VectorXd& y) {
  check_mul(A.cols(), x.size());
  const long m = A.rows(), n = A.cols();
  y.setZero(m);
  const double* a = A.data();
  const double* xp = x.data();
  double* yp = y.data();
  const bool par = m * n >= kParallelThreshold && m >= 64;
  // Row blocks; within a block columns are streamed in order.
#pragma omp parallel for schedule(static) if (par)
  for (long r0 = 0; r0 < m; r0 += 64) {
    const long r1 = std::min(m, r0 + 64);
    for (long k = 0; k < n; ++k) {
      const double xk = xp[k];
      const double* col = a + k * m;
      for (long i = r0; i < r1; ++i) yp[i] += col[i] * xk;
    }
  }
}

void matvec_t(const MatrixXd& A, const VectorXd& x, VectorXd& y) {
  check_mul(A.rows(), x.size());
  const long m = A.rows(), n = A.cols();
  y.resize(n);
  const double* a = A.data();
  const double* xp = x.data();
  double* yp = y.data();
  const bool par = m * n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long j = 0; j < n; ++j) {
    const double* col = a + j * m;
    double s = 0.0;
    for (long i = 0; i < m; ++i) s += col[i] * xp[i];
    yp[j] = s;
  }
}

void matmul(const MatrixXd& A, const MatrixXd& B, MatrixXd& C) {
  check_mul(A.cols(), B.rows());
  const long m = A.rows(), K = A.cols(), n = B.cols();
  C.setZero(m, n);
  const double* a = A.data();
  const double* b = B.data();
  double* c = C.data();
  const bool par = m * K * n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long j0 = 0; j0 < n; j0 += kColumnBlock)
    axpy_block(a, m, K, [b, K](long k, long j) { return b[j * K + k]; }, c, j0, std::min(n, j0 + kColumnBlock));
}

void matmul_tn(const MatrixXd& A, const MatrixXd& B, MatrixXd& C) {
  check_mul(A.rows(), B.rows());
  const long K = A.rows(), m = A.cols(), n = B.cols();
  C.resize(m, n);
  const double* a = A.data();
  const double* b = B.data();
  double* c = C.data();
  const bool par = m * K * n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long j = 0; j < n; ++j) {
    const double* bj = b + j * K;
    for (long i = 0; i < m; ++i) {
      const double* ai = a + i * K;
      double s = 0.0;
      for (long k = 0; k < K; ++k) s += ai[k] * bj[k];
      c[j * m + i] = s;
    }
  }
}

void matmul_nt(const MatrixXd& A, const MatrixXd& B, MatrixXd& C) {
  check_mul(A.cols(), B.cols());
  const long m = A.rows(), K = A.cols(), n = B.rows();
  C.setZero(m, n);
  const double* a = A.data();
  const double* b = B.data();
  double* c = C.data();
  const bool par = m * K * n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long j0 = 0; j0 < n; j0 += kColumnBlock)
    axpy_block(a, m, K, [b, n](long k, long j) { return b[k * n + j]; }, c, j0, std::min(n, j0 + kColumnBlock));
}

namespace ref {

void matvec(const MatrixXd& A, const VectorXd& x, VectorXd& y) {
  check_mul(A.cols(), x.size());
  y.resize(A.rows());
  for (long i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (long k = 0; k < A.cols(); ++k) s += A(i, k) * x(k);
    y(i) = s;
  }
}

void matvec_t(const MatrixXd& A, const VectorXd& x, VectorXd& y) {
  check_mul(A.rows(), x.size());
  y.resize(A.cols());
  for (long j = 0; j < A.cols(); ++j) {
    double s = 0.0;
    for (long i = 0; i < A.rows(); ++i) s += A(i, j) * x(i);
    y(j) = s;
  }
}

void matmul(const MatrixXd& A, const MatrixXd& B, MatrixXd& C) {
  check_mul(A.cols(), B.rows());
  C.resize(A.rows(), B.cols());
  for (long i = 0; i < A.rows(); ++i)
    for (long j = 0; j < B.cols(); ++j) {
      double s = 0.0;
      for (long k = 0; k < A.cols(); ++k) s += A(i, k) * B(k, j);
      C(i, j) = s;
    }
}

void matmul_tn(const MatrixXd& A, const MatrixXd& B, MatrixXd& C) {
  check_mul(A.rows(), B.rows());
  C.resize(A.cols(), B.cols());
  for (long i = 0; i < A.cols(); ++i)
    for (long j = 0; j < B.cols(); ++j) {
      double s = 0.0;
      for (long k = 0; k < A.rows(); ++k) s += A(k, i) * B(k, j);
      C(i, j) = s;
    }
}

void matmul_nt(const MatrixXd& A, const MatrixXd& B, MatrixXd& C) {
  check_mul(A.cols(), B.cols());
  C.resize(A.rows(), B.rows());
  for (long i = 0; i < A.rows(); ++i)
    for (long j = 0; j < B.rows(); ++j) {
      double s = 0.0;
      for (long k = 0; k < A.cols(); ++k) s += A(i, k) * B(j, k);
      C(i, j) = s;
    }
}

}  // namespace ref

}  // namespace grok::kernels
