#pragma once

#include <Eigen/Dense>

namespace grok {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Thin SVD truncated to numerical rank: A ~= U * diag(S) * V^T.
/// Each column of U is signed so that its largest-magnitude entry is positive.
struct SvdFactors {
  MatrixXd U;  // m x k
  VectorXd S;  // k, descending
  MatrixXd V;  // n x k
  long rank() const { return S.size(); }
  MatrixXd reconstruct() const;
};

inline constexpr double kDefaultRankTol = 1e-12;

/// Singular values not above rank_tol * sigma_max are dropped (exact zeros
/// are always dropped). Throws InputError on non-finite input.
SvdFactors compact_svd(const MatrixXd& A, double rank_tol = kDefaultRankTol);

VectorXd soft_threshold(const VectorXd& v, double gamma);
MatrixXd singular_value_threshold(const MatrixXd& A, double gamma);

// sign(v) with sign(0) = 0.
VectorXd l1_subgradient(const VectorXd& v);
// Polar factor U V^T of the compact SVD.
MatrixXd nuclear_subgradient(const MatrixXd& A);

/// Projection onto {a : X a = y}; falls back to the least-squares affine set
/// when the system is inconsistent.
VectorXd affine_project(const VectorXd& a, const MatrixXd& X, const VectorXd& y);

/// Precomputed form of affine_project for repeated use with fixed (X, y).
class AffineProjector {
 public:
  AffineProjector(const MatrixXd& X, const VectorXd& y);
  VectorXd operator()(const VectorXd& a) const;

 private:
  MatrixXd X_;
  VectorXd y_;
  MatrixXd pinv_;  // X^+ = X^T (X X^T)^+
};

enum class NormKind { l0, l1, l2, linf, frobenius, nuclear, spectral };

// l0 counts entries with |x| > 1e-12. Vector kinds act entrywise on matrices;
// nuclear and spectral treat a vector as an n x 1 matrix.
double norm(const MatrixXd& x, NormKind kind);

MatrixXd pseudo_inverse(const MatrixXd& A, double rank_tol = kDefaultRankTol);

}  // namespace grok
