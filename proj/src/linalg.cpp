#include "grok/linalg.hpp"

#include <cmath>

#include "grok/error.hpp"

namespace grok {

MatrixXd SvdFactors::reconstruct() const {
  return U * S.asDiagonal() * V.transpose();
}

SvdFactors compact_svd(const MatrixXd& A, double rank_tol) {
  require(A.allFinite(), "compact_svd: non-finite entries");
  require(rank_tol >= 0.0, "compact_svd: rank_tol must be >= 0");
  SvdFactors out;
  if (A.size() == 0) {
    out.U.resize(A.rows(), 0);
    out.V.resize(A.cols(), 0);
    return out;
  }
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  long k = 0;
  while (k < s.size() && s(k) > 0.0 && s(k) > rank_tol * smax) ++k;

  out.U = svd.matrixU().leftCols(k);
  out.S = s.head(k);
  out.V = svd.matrixV().leftCols(k);
  for (long j = 0; j < k; ++j) {
    Eigen::Index imax = 0;
    out.U.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.U(imax, j) < 0.0) {
      out.U.col(j) = -out.U.col(j);
      out.V.col(j) = -out.V.col(j);
    }
  }
  return out;
}

VectorXd soft_threshold(const VectorXd& v, double gamma) {
  require(gamma >= 0.0, "soft_threshold: gamma must be >= 0");
  VectorXd out(v.size());
  for (long i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i)) - gamma;
    out(i) = m > 0.0 ? std::copysign(m, v(i)) : 0.0;
  }
  return out;
}

MatrixXd singular_value_threshold(const MatrixXd& A, double gamma) {
  require(gamma >= 0.0, "singular_value_threshold: gamma must be >= 0");
  SvdFactors f = compact_svd(A);
  VectorXd shrunk = (f.S.array() - gamma).max(0.0).matrix();
  return f.U * shrunk.asDiagonal() * f.V.transpose();
}

VectorXd l1_subgradient(const VectorXd& v) {
  VectorXd out(v.size());
  for (long i = 0; i < v.size(); ++i)
    out(i) = v(i) > 0.0 ? 1.0 : (v(i) < 0.0 ? -1.0 : 0.0);
  return out;
}

MatrixXd nuclear_subgradient(const MatrixXd& A) {
  SvdFactors f = compact_svd(A);
  return f.U * f.V.transpose();
}

MatrixXd pseudo_inverse(const MatrixXd& A, double rank_tol) {
  SvdFactors f = compact_svd(A, rank_tol);
  VectorXd inv = f.S.cwiseInverse();
  return f.V * inv.asDiagonal() * f.U.transpose();
}

AffineProjector::AffineProjector(const MatrixXd& X, const VectorXd& y)
    : X_(X), y_(y), pinv_(pseudo_inverse(X)) {
  require(X.rows() == y.size(), "affine_project: X and y disagree");
}

VectorXd AffineProjector::operator()(const VectorXd& a) const {
  require(a.size() == X_.cols(), "affine_project: a has wrong length");
  VectorXd r = X_ * a - y_;
  return a - pinv_ * r;
}

VectorXd affine_project(const VectorXd& a, const MatrixXd& X, const VectorXd& y) {
  return AffineProjector(X, y)(a);
}

double norm(const MatrixXd& x, NormKind kind) {
  switch (kind) {
    case NormKind::l0:
      return static_cast<double>((x.array().abs() > 1e-12).count());
    case NormKind::l1:
      return x.cwiseAbs().sum();
    case NormKind::l2:
    case NormKind::frobenius:
      return x.norm();
    case NormKind::linf:
      return x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    case NormKind::nuclear:
      return compact_svd(x).S.sum();
    case NormKind::spectral: {
      SvdFactors f = compact_svd(x);
      return f.rank() ? f.S(0) : 0.0;
    }
  }
  return 0.0;
}

}  // namespace grok
