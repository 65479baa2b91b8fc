#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace grok {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kDefaultSnr = 1e8;
inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

// y_star = X a_star + xi with X = M Phi.
struct SparseRecoveryInstance {
  long n = 0;
  long s = 0;
  long N = 0;
  double tau = 0.0;
  MatrixXd Phi;
  MatrixXd M;
  MatrixXd X;
  VectorXd a_star;
  VectorXd xi;
  VectorXd y_star;
  double snr = kDefaultSnr;
  std::uint64_t seed = 0;
};

enum class LowRankMode { completion, sensing };

std::string to_string(LowRankMode mode);
LowRankMode parse_lowrank_mode(const std::string& s);

// y_star = X vec(A_star) + xi, vec() stacking columns.
struct LowRankInstance {
  long n1 = 0;
  long n2 = 0;
  long r = 0;
  long N = 0;
  double tau = 0.0;
  LowRankMode mode = LowRankMode::completion;
  MatrixXd A_star;
  MatrixXd X;  // N x (n1*n2)
  VectorXd xi;
  VectorXd y_star;
  double snr = kDefaultSnr;
  std::uint64_t seed = 0;
  // Completion mode: observed (row, col) entries in measurement order.
  std::vector<std::pair<long, long>> observed;
};

VectorXd vec(const MatrixXd& A);
MatrixXd unvec(const VectorXd& v, long rows, long cols);

/// Haar-distributed orthogonal n x n matrix (QR of a Gaussian matrix with the
/// signs of R's diagonal absorbed into Q).
MatrixXd gen_orthonormal_basis(long n, std::uint64_t seed);

SparseRecoveryInstance gen_sparse_instance(long n, long s, long N, double tau,
                                           double snr, std::uint64_t seed);

struct LeverageScores {
  VectorXd mu;  // rows
  VectorXd nu;  // columns
};
LeverageScores leverage_scores(const MatrixXd& A);

LowRankInstance gen_lowrank_instance(long n1, long n2, long r, long N, double tau,
                                     LowRankMode mode, double snr, std::uint64_t seed);

/// max_ij |<A_i, B_j>| / (|A_i| |B_j|) over columns of A and B.
double mutual_coherence(const MatrixXd& A, const MatrixXd& B);

}  // namespace grok
