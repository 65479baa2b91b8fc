#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace grok {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct TheoryBounds {
  double rho2 = 0.0;                // |I - alpha X^T X|, equals 1 when N < n
  double rho2_row_space = 0.0;      // the same map restricted to row(X)
  double rho2_ridge = 0.0;          // |I - alpha (X^T X + beta I)|
  std::optional<long> t1_bound;     // from rho2_row_space; none if it is >= 1
  double delta_t = 0.0;             // for the eta the bounds were built with
  double eta = 1.0;
  double residual_floor = 0.0;
  double residence_radius = 0.0;    // 2 alpha beta sqrt(n) / (1 - rho)
  std::optional<double> chi_estimate;
};

/// beta == 0: minimum-norm least squares. beta > 0: ridge solution.
VectorXd least_squares_solution(const MatrixXd& X, const VectorXd& y, double beta = 0.0);

/// Spectral norm of I - alpha (X^T X + beta I). The null space of X
/// contributes |1 - alpha beta| whenever X has fewer rows than columns.
double contraction_factor(const MatrixXd& X, double alpha, double beta = 0.0);

/// max |1 - alpha sigma_k| over the nonzero eigenvalues of X^T X.
double row_space_contraction_factor(const MatrixXd& X, double alpha);

/// Iterate index after which the iterate stays within 2 alpha beta sqrt(n) / (1 - rho2)
/// of a_hat. Throws NoConvergenceError when rho2 >= 1.
long memorization_bound(const VectorXd& a_init, const VectorXd& a_hat, double alpha,
                        double beta, long n, double rho2);

/// |a_t1 - a_star|^2 / (alpha beta eta); Frobenius norm for matrices.
double generalization_delay(const MatrixXd& a_t1, const MatrixXd& a_star, double alpha,
                            double beta, double eta);

/// |(I - X^+ X) a_star|^2, the part of a_star no row-space method can recover.
double residual_floor(const MatrixXd& X, const VectorXd& a_star);

/// g(x) = 0.5 |X x - y|^2.
struct QuadraticObjective {
  MatrixXd X;
  VectorXd y;
  double value(const VectorXd& x) const;
  VectorXd gradient(const VectorXd& x) const;
};

struct ClEstimate {
  double chi = 0.0;      // +inf when g vanished on every sample
  bool r_cl_holds = false;  // 4 g(x0) < r^2 chi
};

inline constexpr long kDefaultClSamples = 100000;

/// Monte Carlo infimum of |grad g|^2 / g over the ball B(x0, r).
ClEstimate estimate_cl_constant(const QuadraticObjective& g, const VectorXd& x0, double r,
                                long samples = kDefaultClSamples, std::uint64_t seed = 0);

struct PureL1Result {
  std::vector<VectorXd> trajectory;  // trajectory[0] is the initial point
  long first_stationary_step = -1;   // 1-based iterate index, -1 if never
  long predicted_step = 0;           // floor(|a|_inf / alpha) + 1
  bool matches = false;
};

/// Simulates a <- a - alpha sign(a) and locates the first iterate with |a|_inf <= alpha.
PureL1Result pure_l1_dynamics_check(const VectorXd& a_init, double alpha, long steps);

struct PureNuclearResult {
  MatrixXd sv_trajectory;            // (steps + 1) x min(m, n), descending rows
  long first_stationary_step = -1;   // 1-based iterate index of first sigma_max < alpha
  long predicted_step = 0;           // floor(sigma_max / alpha) + 1
  double max_recursion_error = 0.0;  // vs sigma <- |sigma - alpha| on nonzero sigma
  bool matches = false;
};

PureNuclearResult pure_nuclear_dynamics_check(const MatrixXd& A_init, double alpha, long steps);

TheoryBounds compute_bounds(const MatrixXd& X, const VectorXd& y, const VectorXd& a_star,
                            const VectorXd& a_init, double alpha, double beta, double eta = 1.0);

}  // namespace grok
