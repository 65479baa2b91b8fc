#include <doctest.h>

#include <cmath>
#include <limits>

#include "grok/error.hpp"
#include "grok/instances.hpp"
#include "grok/linalg.hpp"
#include "grok/optimizers.hpp"
#include "grok/theory.hpp"
#include "test_util.hpp"

using namespace grok;

namespace {

MatrixXd x35() {
  MatrixXd X(3, 5);
  X << 1.0, 0.5, -0.2, 0.3, 0.0, 0.2, -1.0, 0.4, 0.0, 0.6, 0.0, 0.3, 0.8, -0.5, 0.1;
  return X;
}

VectorXd y3() {
  VectorXd y(3);
  y << 0.7, -0.4, 1.1;
  return y;
}

VectorXd vec_of(std::initializer_list<double> v) {
  VectorXd out(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("least_squares_solution examples") {
  const MatrixXd I = MatrixXd::Identity(2, 2);
  const VectorXd y = vec_of({1.0, 2.0});
  CHECK((least_squares_solution(I, y, 0.0) - y).norm() < 1e-15);
  CHECK((least_squares_solution(I, y, 1.0) - vec_of({0.5, 1.0})).norm() < 1e-15);
  CHECK_THROWS_AS(least_squares_solution(I, y, -1.0), InputError);
}

TEST_CASE("least squares on a 3x5 literal matches reference solutions") {
  // numpy.linalg.pinv(X) @ y and solve(X^T X + 0.1 I, X^T y).
  const VectorXd pinv = vec_of({0.5669161268081071, 0.8399816136863121, 0.7884855710530473,
                                -0.4306993981355127, 0.01867359983911974});
  const VectorXd ridge = vec_of({0.5151871704362225, 0.7734998038959343, 0.7045365407242772,
                                 -0.38639037782716773, 0.0091515230749122});
  CHECK((least_squares_solution(x35(), y3(), 0.0) - pinv).norm() < 1e-12);
  CHECK((least_squares_solution(x35(), y3(), 0.1) - ridge).norm() < 1e-12);
}

TEST_CASE("underdetermined least squares projects y onto col(X)") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MatrixXd X = test::gaussian(6, 12, seed);
    const VectorXd y = test::gaussian(6, 1, seed + 50);
    const VectorXd a = least_squares_solution(X, y);
    SvdFactors f = compact_svd(X);
    CHECK((X * a - f.U * (f.U.transpose() * y)).norm() <= 1e-8);
  }
}

TEST_CASE("least-squares residual identity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_sparse_instance(30, 3, 40, 0.0, 1e2, seed);
    const VectorXd a_hat = least_squares_solution(inst.X, inst.y_star);
    SvdFactors f = compact_svd(inst.X);
    const VectorXd& xi = inst.xi;
    const double rhs = xi.squaredNorm() - (f.U.transpose() * xi).squaredNorm();
    CHECK(std::abs((inst.X * a_hat - inst.y_star).squaredNorm() - rhs) <= 1e-8 * xi.squaredNorm());
  }
}

TEST_CASE("contraction_factor examples") {
  CHECK(contraction_factor(MatrixXd::Identity(3, 3), 0.5, 0.0) == doctest::Approx(0.5));
  const MatrixXd X = 2.0 * MatrixXd::Identity(2, 2);
  CHECK(contraction_factor(X, 2.0 / (4.0 + 0.5), 0.5) >= 1.0 - 1e-15);
  CHECK_THROWS_AS(contraction_factor(X, 0.0, 0.0), InputError);
}

TEST_CASE("contraction factor of the 3x5 literal") {
  // Eigenvalues of X^T X: 0, 0, 0.9247502226288881, 1.1153433931598444, 1.889906384211268.
  CHECK(contraction_factor(x35(), 0.3, 0.1) == doctest::Approx(0.97).epsilon(1e-13));
  CHECK(contraction_factor(x35(), 0.3, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(contraction_factor(x35(), 1.0, 0.1) == doctest::Approx(0.989906384211268).epsilon(1e-13));
  CHECK(row_space_contraction_factor(x35(), 0.3) ==
        doctest::Approx(1.0 - 0.3 * 0.9247502226288881).epsilon(1e-13));
}

TEST_CASE("contraction factor matches an eigendecomposition of the iteration matrix") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MatrixXd X = test::gaussian(4 + static_cast<long>(seed % 5), 7, seed, 0.4);
    const double alpha = 0.3, beta = 0.01 * static_cast<double>(seed);
    MatrixXd T = MatrixXd::Identity(7, 7) - alpha * (X.transpose() * X + beta * MatrixXd::Identity(7, 7));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
    const double expect = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(std::abs(contraction_factor(X, alpha, beta) - expect) < 1e-12);
    if (X.rows() < 7) CHECK(contraction_factor(X, alpha, beta) >= 1.0 - alpha * beta - 1e-15);
  }
}

TEST_CASE("memorization_bound examples") {
  const VectorXd a = vec_of({1.0, 2.0});
  CHECK(memorization_bound(a, a, 0.1, 0.1, 2, 0.5) == 0);
  // (1 - rho) |a - a_hat| / (alpha beta sqrt(n)) = 1, so t = ceil(-ln 2 / ln 0.5) = 1.
  const VectorXd b = vec_of({1.0, 0.0, 0.0, 0.0}), z = VectorXd::Zero(4);
  CHECK(memorization_bound(b, z, 0.5, 0.5, 4, 0.5) == 1);
  CHECK_THROWS_AS(memorization_bound(b, z, 0.5, 0.5, 4, 1.0), NoConvergenceError);
  CHECK_THROWS_AS(memorization_bound(b, z, 0.5, 0.0, 4, 0.5), InputError);
}

TEST_CASE("generalization_delay examples") {
  const VectorXd d = vec_of({2.0, 0.0}), z = VectorXd::Zero(2);
  CHECK(generalization_delay(d, z, 0.1, 1e-3, 1.0) == doctest::Approx(40000.0));
  CHECK(generalization_delay(z, z, 0.1, 1e-3, 1.0) == 0.0);
  const double full = generalization_delay(d, z, 0.1, 1e-3, 1.0);
  CHECK(generalization_delay(d, z, 0.1, 0.5e-3, 1.0) == doctest::Approx(2 * full));
  for (double c : {0.1, 3.0, 17.0})
    CHECK(generalization_delay(d, z, 0.1 * c, 1e-3 / c, 1.0) == doctest::Approx(full).epsilon(1e-12));
  CHECK_THROWS_AS(generalization_delay(d, z, 0.1, 1e-3, 0.0), InputError);
  MatrixXd A = MatrixXd::Ones(2, 2);
  CHECK(generalization_delay(A, MatrixXd::Zero(2, 2), 1.0, 1.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("residual_floor examples") {
  CHECK(residual_floor(test::gaussian(8, 5, 1), test::gaussian(5, 1, 2)) < 1e-20);
  MatrixXd X(1, 2);
  X << 1.0, 0.0;
  CHECK(residual_floor(X, vec_of({0.0, 1.0})) == doctest::Approx(1.0));
  CHECK(residual_floor(x35(), vec_of({0.0, 1.0, 0.0, -0.5, 0.0})) ==
        doctest::Approx(0.21314426484499888).epsilon(1e-12));
}

TEST_CASE("residual floor lower-bounds every ridge error") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = gen_sparse_instance(40, 4, 15, 0.0, kInfiniteSnr, seed);
    const double floor = residual_floor(inst.X, inst.a_star);
    for (double beta : {1e-6, 1e-3, 1.0})
      CHECK(floor <= (least_squares_solution(inst.X, inst.y_star, beta) - inst.a_star).squaredNorm() + 1e-9);
  }
}

TEST_CASE("CL constant of simple quadratics") {
  QuadraticObjective g{MatrixXd::Identity(3, 3), VectorXd::Zero(3)};
  const VectorXd x0 = vec_of({1.0, 0.0, 0.0});
  CHECK(estimate_cl_constant(g, x0, 0.5, 2000, 1).chi == doctest::Approx(2.0).epsilon(1e-12));
  QuadraticObjective g2{2.0 * MatrixXd::Identity(3, 3), VectorXd::Zero(3)};
  CHECK(estimate_cl_constant(g2, x0, 0.5, 2000, 1).chi == doctest::Approx(8.0).epsilon(1e-12));
  QuadraticObjective zero{MatrixXd::Zero(2, 2), VectorXd::Zero(2)};
  CHECK(std::isinf(estimate_cl_constant(zero, VectorXd::Zero(2), 1.0, 50, 1).chi));
  CHECK_THROWS_AS(estimate_cl_constant(g, x0, 0.0, 10, 1), InputError);
}

TEST_CASE("CL estimate is bounded below by twice the smallest nonzero eigenvalue") {
  // 2 sigma_min^2 of the 3x5 literal.
  QuadraticObjective g{x35(), y3()};
  const VectorXd x0 = least_squares_solution(x35(), y3()) + 0.3 * VectorXd::Ones(5);
  const auto est = estimate_cl_constant(g, x0, 0.5, 20000, 3);
  CHECK(est.chi >= 1.8495004452577768 - 1e-9);
}

TEST_CASE("CL estimate shrinks as the ball grows") {
  const MatrixXd X = test::gaussian(6, 6, 4);
  QuadraticObjective g{X, test::gaussian(6, 1, 5)};
  const VectorXd x0 = test::gaussian(6, 1, 6);
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {0.1, 0.5, 1.0, 2.0}) {
    const double chi = estimate_cl_constant(g, x0, r, 20000, 7).chi;
    CHECK(chi <= prev * 1.05);
    prev = chi;
  }
}

TEST_CASE("pure l1 dynamics examples") {
  auto r = pure_l1_dynamics_check(vec_of({0.35}), 0.1, 10);
  CHECK(r.first_stationary_step == 4);
  CHECK(r.predicted_step == 4);
  CHECK(r.matches);
  CHECK(r.trajectory[1](0) == doctest::Approx(0.25));
  r = pure_l1_dynamics_check(vec_of({0.05, -0.08}), 0.1, 3);
  CHECK(r.first_stationary_step == 1);
  CHECK(r.matches);
}

TEST_CASE("pure l1 dynamics on random starts") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const VectorXd a = test::gaussian(10, 1, seed);
    const auto r = pure_l1_dynamics_check(a, 0.1, 200);
    CHECK(r.matches);
  }
}

TEST_CASE("pure nuclear dynamics example") {
  MatrixXd A = MatrixXd::Zero(2, 2);
  A.diagonal() << 0.35, 0.15;
  const auto r = pure_nuclear_dynamics_check(A, 0.1, 5);
  CHECK(r.first_stationary_step == 4);
  CHECK(r.matches);
  const double top[] = {0.35, 0.25, 0.15, 0.05};
  for (int t = 0; t < 4; ++t) CHECK(std::abs(r.sv_trajectory(t, 0) - top[t]) < 1e-12);
  CHECK(std::abs(r.sv_trajectory(1, 1) - 0.05) < 1e-12);
  CHECK(r.max_recursion_error <= 1e-8);
  MatrixXd small = 0.05 * MatrixXd::Identity(2, 2);
  CHECK(pure_nuclear_dynamics_check(small, 0.1, 2).first_stationary_step == 1);
}

TEST_CASE("pure nuclear dynamics on random 5x5 starts") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = pure_nuclear_dynamics_check(test::gaussian(5, 5, seed, 0.3), 0.05, 60);
    CHECK(r.matches);
    CHECK(r.max_recursion_error <= 1e-8);
  }
}

TEST_CASE("ridge-only iterates contract at rate rho") {
  const auto inst = gen_sparse_instance(30, 3, 12, 0.0, kDefaultSnr, 3);
  const double alpha = 0.1, beta = 0.05;
  RunConfig cfg;
  cfg.alpha = alpha;
  cfg.max_steps = 200;
  cfg.init_scale = 5.0;
  cfg.eval_every = 1;
  cfg.early_exit = false;
  cfg.record_components = true;
  const Trace t = run_flat(inst, {RegKind::l2, beta}, cfg);
  const VectorXd a_hat = least_squares_solution(inst.X, inst.y_star, beta);
  const double rho = contraction_factor(inst.X, alpha, beta);
  auto iterate = [&](std::size_t r) {
    return Eigen::Map<const VectorXd>(t.records[r].extras.data(), 30);
  };
  const double d0 = (iterate(0) - a_hat).norm();
  for (std::size_t r = 1; r < t.records.size(); ++r)
    CHECK((iterate(r) - a_hat).norm() <= std::pow(rho, static_cast<double>(r)) * d0 * (1 + 1e-9) + 1e-14);
}

TEST_CASE("compute_bounds fills the row-space quantities") {
  const auto inst = gen_sparse_instance(100, 5, 30, 0.0, kDefaultSnr, 0);
  const VectorXd a0 = initial_iterate(100, 1e-6, 0);
  const auto b = compute_bounds(inst.X, inst.y_star, inst.a_star, a0, 0.1, 1e-5);
  CHECK(b.rho2 == doctest::Approx(1.0));
  CHECK(b.rho2_row_space < 1.0);
  REQUIRE(b.t1_bound.has_value());
  CHECK(*b.t1_bound > 0);
  CHECK(b.residence_radius > 0.0);
  CHECK(b.delta_t > 0.0);
  CHECK(b.residual_floor > 0.0);
}

}
