#include "grok/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "grok/error.hpp"
#include "grok/linalg.hpp"
#include "grok/rng.hpp"

namespace grok {

VectorXd least_squares_solution(const MatrixXd& X, const VectorXd& y, double beta) {
  require(beta >= 0.0, "least_squares_solution: beta must be >= 0");
  require(X.rows() == y.size(), "least_squares_solution: X and y disagree");
  if (beta == 0.0) return pseudo_inverse(X) * y;
  MatrixXd Q = X.transpose() * X;
  Q.diagonal().array() += beta;
  return Q.ldlt().solve(X.transpose() * y);
}

namespace {

// Eigenvalues of X^T X, zeros included (n of them).
VectorXd gram_spectrum(const MatrixXd& X) {
  Eigen::JacobiSVD<MatrixXd> svd(X);
  VectorXd ev = VectorXd::Zero(X.cols());
  const VectorXd& s = svd.singularValues();
  for (long k = 0; k < s.size(); ++k) ev(k) = s(k) * s(k);
  return ev;
}

}  // namespace

double contraction_factor(const MatrixXd& X, double alpha, double beta) {
  require(alpha > 0.0, "contraction_factor: alpha must be > 0");
  VectorXd ev = gram_spectrum(X);
  double rho = 0.0;
  for (long k = 0; k < ev.size(); ++k) rho = std::max(rho, std::abs(1.0 - alpha * (ev(k) + beta)));
  return rho;
}

double row_space_contraction_factor(const MatrixXd& X, double alpha) {
  require(alpha > 0.0, "row_space_contraction_factor: alpha must be > 0");
  SvdFactors f = compact_svd(X);
  double rho = 0.0;
  for (long k = 0; k < f.rank(); ++k) rho = std::max(rho, std::abs(1.0 - alpha * f.S(k) * f.S(k)));
  return rho;
}

long memorization_bound(const VectorXd& a_init, const VectorXd& a_hat, double alpha,
                        double beta, long n, double rho2) {
  require(alpha > 0.0 && beta > 0.0, "memorization_bound: alpha and beta must be > 0");
  require(n >= 1, "memorization_bound: n must be >= 1");
  require(rho2 >= 0.0, "memorization_bound: rho2 must be >= 0");
  if (rho2 >= 1.0) throw NoConvergenceError("memorization_bound: rho2 >= 1, no contraction");
  const double dist = (a_init - a_hat).norm();
  if (dist == 0.0) return 0;
  const double ratio = (1.0 - rho2) * dist / (alpha * beta * std::sqrt(static_cast<double>(n)));
  const double t = -std::log1p(ratio) / std::log(rho2);
  return static_cast<long>(std::ceil(t));
}

double generalization_delay(const MatrixXd& a_t1, const MatrixXd& a_star, double alpha,
                            double beta, double eta) {
  require(eta > 0.0, "generalization_delay: eta must be > 0");
  require(alpha > 0.0 && beta > 0.0, "generalization_delay: alpha and beta must be > 0");
  require(a_t1.rows() == a_star.rows() && a_t1.cols() == a_star.cols(),
          "generalization_delay: shape mismatch");
  return (a_t1 - a_star).squaredNorm() / (alpha * beta * eta);
}

double residual_floor(const MatrixXd& X, const VectorXd& a_star) {
  require(X.cols() == a_star.size(), "residual_floor: shape mismatch");
  VectorXd in_row = pseudo_inverse(X) * (X * a_star);
  return (a_star - in_row).squaredNorm();
}

double QuadraticObjective::value(const VectorXd& x) const {
  return 0.5 * (X * x - y).squaredNorm();
}

VectorXd QuadraticObjective::gradient(const VectorXd& x) const {
  return X.transpose() * (X * x - y);
}

ClEstimate estimate_cl_constant(const QuadraticObjective& g, const VectorXd& x0, double r,
                                long samples, std::uint64_t seed) {
  require(r > 0.0, "estimate_cl_constant: r must be > 0");
  require(samples >= 1, "estimate_cl_constant: samples must be >= 1");
  const long n = x0.size();
  Rng rng(seed, Stream::probe);
  double chi = std::numeric_limits<double>::infinity();
  VectorXd z(n);
  for (long s = 0; s < samples; ++s) {
    for (long i = 0; i < n; ++i) z(i) = rng.normal();
    const double zn = z.norm();
    if (zn == 0.0) continue;
    const double radius = r * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    VectorXd x = x0 + (radius / zn) * z;
    const double gv = g.value(x);
    if (gv <= 0.0) continue;
    chi = std::min(chi, g.gradient(x).squaredNorm() / gv);
  }
  ClEstimate out;
  out.chi = chi;
  out.r_cl_holds = 4.0 * g.value(x0) < r * r * chi;
  return out;
}

PureL1Result pure_l1_dynamics_check(const VectorXd& a_init, double alpha, long steps) {
  require(alpha > 0.0, "pure_l1_dynamics_check: alpha must be > 0");
  require(steps >= 0, "pure_l1_dynamics_check: steps must be >= 0");
  PureL1Result out;
  out.predicted_step = static_cast<long>(std::floor(a_init.lpNorm<Eigen::Infinity>() / alpha)) + 1;
  VectorXd a = a_init;
  out.trajectory.push_back(a);
  for (long t = 1; t <= steps + 1; ++t) {
    if (out.first_stationary_step < 0 && a.lpNorm<Eigen::Infinity>() <= alpha) out.first_stationary_step = t;
    if (t == steps + 1) break;
    a -= alpha * l1_subgradient(a);
    out.trajectory.push_back(a);
  }
  out.matches = out.first_stationary_step == out.predicted_step;
  return out;
}

PureNuclearResult pure_nuclear_dynamics_check(const MatrixXd& A_init, double alpha, long steps) {
  require(alpha > 0.0, "pure_nuclear_dynamics_check: alpha must be > 0");
  require(steps >= 0, "pure_nuclear_dynamics_check: steps must be >= 0");
  const long k = std::min(A_init.rows(), A_init.cols());
  PureNuclearResult out;
  out.sv_trajectory.resize(steps + 1, k);

  auto spectrum = [k](const MatrixXd& A) {
    Eigen::JacobiSVD<MatrixXd> svd(A);
    VectorXd s = VectorXd::Zero(k);
    s.head(svd.singularValues().size()) = svd.singularValues();
    return s;
  };

  MatrixXd A = A_init;
  VectorXd s = spectrum(A);
  out.predicted_step = static_cast<long>(std::floor((k ? s(0) : 0.0) / alpha)) + 1;
  for (long t = 0; t <= steps; ++t) {
    out.sv_trajectory.row(t) = s.transpose();
    if (out.first_stationary_step < 0 && (k == 0 || s(0) < alpha)) out.first_stationary_step = t + 1;
    if (t == steps) break;

    // Singular values the update acts on: those kept by the compact SVD.
    const double cut = s.size() ? kDefaultRankTol * s(0) : 0.0;
    std::vector<double> expected(static_cast<std::size_t>(k));
    for (long i = 0; i < k; ++i) expected[i] = (s(i) > cut && s(i) > 0.0) ? std::abs(s(i) - alpha) : 0.0;
    std::sort(expected.begin(), expected.end(), std::greater<>());

    A -= alpha * nuclear_subgradient(A);
    s = spectrum(A);
    for (long i = 0; i < k; ++i)
      out.max_recursion_error = std::max(out.max_recursion_error, std::abs(s(i) - expected[i]));
  }
  out.matches = out.first_stationary_step == out.predicted_step;
  return out;
}

TheoryBounds compute_bounds(const MatrixXd& X, const VectorXd& y, const VectorXd& a_star,
                            const VectorXd& a_init, double alpha, double beta, double eta) {
  TheoryBounds b;
  b.eta = eta;
  b.rho2 = contraction_factor(X, alpha, 0.0);
  b.rho2_row_space = row_space_contraction_factor(X, alpha);
  b.rho2_ridge = contraction_factor(X, alpha, beta);
  b.residual_floor = residual_floor(X, a_star);
  const VectorXd a_hat = least_squares_solution(X, y, 0.0);
  const long n = X.cols();
  if (beta > 0.0) {
    if (b.rho2_row_space < 1.0) {
      b.t1_bound = memorization_bound(a_init, a_hat, alpha, beta, n, b.rho2_row_space);
      b.residence_radius = 2.0 * alpha * beta * std::sqrt(static_cast<double>(n)) / (1.0 - b.rho2_row_space);
    } else {
      b.residence_radius = std::numeric_limits<double>::infinity();
    }
    if (eta > 0.0) b.delta_t = generalization_delay(a_hat, a_star, alpha, beta, eta);
  }
  return b;
}

}  // namespace grok
