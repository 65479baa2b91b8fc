#include "grok/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "grok/error.hpp"
#include "grok/linalg.hpp"
#include "grok/rng.hpp"

namespace grok {

namespace {

MatrixXd gaussian(long rows, long cols, double stddev, Rng& rng) {
  MatrixXd G(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) G(i, j) = stddev * rng.normal();
  return G;
}

MatrixXd haar_orthogonal(long n, Rng& rng) {
  MatrixXd G = gaussian(n, n, 1.0, rng);
  Eigen::HouseholderQR<MatrixXd> qr(G);
  MatrixXd Q = qr.householderQ();
  const MatrixXd& R = qr.matrixQR();
  for (long k = 0; k < n; ++k)
    if (R(k, k) < 0.0) Q.col(k) = -Q.col(k);
  return Q;
}

double noise_stddev(double signal_energy, long N, double snr) {
  require(snr > 0.0, "snr must be > 0");
  if (std::isinf(snr)) return 0.0;
  return std::sqrt(signal_energy / (static_cast<double>(N) * snr));
}

}  // namespace

std::string to_string(LowRankMode mode) {
  return mode == LowRankMode::completion ? "completion" : "sensing";
}

LowRankMode parse_lowrank_mode(const std::string& s) {
  if (s == "completion") return LowRankMode::completion;
  if (s == "sensing") return LowRankMode::sensing;
  throw InputError("unknown low-rank mode: " + s);
}

VectorXd vec(const MatrixXd& A) {
  return Eigen::Map<const VectorXd>(A.data(), A.size());
}

MatrixXd unvec(const VectorXd& v, long rows, long cols) {
  require(v.size() == rows * cols, "unvec: size mismatch");
  return Eigen::Map<const MatrixXd>(v.data(), rows, cols);
}

MatrixXd gen_orthonormal_basis(long n, std::uint64_t seed) {
  require(n >= 1, "gen_orthonormal_basis: n must be >= 1");
  Rng rng(seed, Stream::basis);
  return haar_orthogonal(n, rng);
}

SparseRecoveryInstance gen_sparse_instance(long n, long s, long N, double tau,
                                           double snr, std::uint64_t seed) {
  require(n >= 1, "gen_sparse_instance: n must be >= 1");
  require(s >= 1 && s <= n, "gen_sparse_instance: need 1 <= s <= n");
  require(N >= 1, "gen_sparse_instance: N must be >= 1");
  require(tau >= 0.0 && tau <= 1.0, "gen_sparse_instance: tau must lie in [0,1]");
  require(snr > 0.0, "gen_sparse_instance: snr must be > 0");

  SparseRecoveryInstance inst;
  inst.n = n;
  inst.s = s;
  inst.N = N;
  inst.tau = tau;
  inst.snr = snr;
  inst.seed = seed;
  inst.Phi = gen_orthonormal_basis(n, seed);

  const long N1 = std::min(static_cast<long>(std::floor(tau * static_cast<double>(N))), n);
  Rng meas(seed, Stream::measurement);
  inst.M.resize(N, n);
  for (long i = 0; i < N1; ++i) inst.M.row(i) = inst.Phi.col(i).transpose();
  if (N > N1) inst.M.bottomRows(N - N1) = gaussian(N - N1, n, 1.0 / std::sqrt(double(n)), meas);
  inst.X = inst.M * inst.Phi;

  inst.a_star = VectorXd::Zero(n);
  Rng support(seed, Stream::support);
  Rng signal(seed, Stream::signal);
  for (long idx : support.sample_without_replacement(n, s))
    inst.a_star(idx) = signal.normal() / std::sqrt(double(n));

  const double sd = noise_stddev(static_cast<double>(s) / n, N, snr);
  Rng noise(seed, Stream::noise);
  inst.xi = VectorXd::Zero(N);
  if (sd > 0.0)
    for (long i = 0; i < N; ++i) inst.xi(i) = sd * noise.normal();
  inst.y_star = inst.X * inst.a_star + inst.xi;
  return inst;
}

LeverageScores leverage_scores(const MatrixXd& A) {
  SvdFactors f = compact_svd(A);
  require(f.rank() > 0, "leverage_scores: zero matrix");
  const double r = static_cast<double>(f.rank());
  LeverageScores out;
  out.mu = f.U.rowwise().squaredNorm() * (static_cast<double>(A.rows()) / r);
  out.nu = f.V.rowwise().squaredNorm() * (static_cast<double>(A.cols()) / r);
  return out;
}

LowRankInstance gen_lowrank_instance(long n1, long n2, long r, long N, double tau,
                                     LowRankMode mode, double snr, std::uint64_t seed) {
  require(n1 >= 1 && n2 >= 1, "gen_lowrank_instance: dimensions must be >= 1");
  require(r >= 1 && r <= std::min(n1, n2), "gen_lowrank_instance: need 1 <= r <= min(n1,n2)");
  require(N >= 1, "gen_lowrank_instance: N must be >= 1");
  require(tau >= 0.0 && tau <= 1.0, "gen_lowrank_instance: tau must lie in [0,1]");
  if (mode == LowRankMode::completion)
    require(N <= n1 * n2, "gen_lowrank_instance: N exceeds n1*n2 in completion mode");

  LowRankInstance inst;
  inst.n1 = n1;
  inst.n2 = n2;
  inst.r = r;
  inst.N = N;
  inst.tau = tau;
  inst.mode = mode;
  inst.snr = snr;
  inst.seed = seed;

  // Random orthogonal model: full orthogonal factors, first r columns span A*.
  Rng basis(seed, Stream::basis);
  MatrixXd Ufull = haar_orthogonal(n1, basis);
  MatrixXd Vfull = haar_orthogonal(n2, basis);
  const double sv = 1.0 / std::sqrt(static_cast<double>(r));
  inst.A_star = sv * Ufull.leftCols(r) * Vfull.leftCols(r).transpose();

  const long n = n1 * n2;
  const long N1 = static_cast<long>(std::floor(tau * static_cast<double>(N)));
  inst.X = MatrixXd::Zero(N, n);

  if (mode == LowRankMode::completion) {
    LeverageScores lev = leverage_scores(inst.A_star);
    // Entries indexed row-major: e = i*n2 + j.
    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    std::vector<double> score(static_cast<std::size_t>(n));
    for (long i = 0; i < n1; ++i)
      for (long j = 0; j < n2; ++j) score[i * n2 + j] = lev.mu(i) + lev.nu(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](long a, long b) { return score[a] > score[b]; });

    std::vector<long> chosen(order.begin(), order.begin() + std::min(N1, N));
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (long e : chosen) taken[e] = 1;
    std::vector<long> rest;
    for (long e = 0; e < n; ++e)
      if (!taken[e]) rest.push_back(e);
    Rng pick(seed, Stream::support);
    for (long k : pick.sample_without_replacement(static_cast<long>(rest.size()), N - static_cast<long>(chosen.size())))
      chosen.push_back(rest[k]);

    for (long m = 0; m < N; ++m) {
      const long i = chosen[m] / n2, j = chosen[m] % n2;
      inst.observed.emplace_back(i, j);
      inst.X(m, i + j * n1) = 1.0;
    }
  } else {
    Rng meas(seed, Stream::measurement);
    auto factor_rows = [&](const MatrixXd& Q, long dim) {
      const long rows_from_q = std::min(N1, dim);
      MatrixXd F(N, dim);
      for (long i = 0; i < rows_from_q; ++i) F.row(i) = Q.col(i).transpose();
      if (N > rows_from_q)
        F.bottomRows(N - rows_from_q) = gaussian(N - rows_from_q, dim, 1.0 / static_cast<double>(dim), meas);
      return F;
    };
    MatrixXd X1 = factor_rows(Ufull, n1);
    MatrixXd X2 = factor_rows(Vfull, n2);
    // Row m is X2_m (x) X1_m, so <row, vec(A)> = X1_m^T A X2_m.
    for (long m = 0; m < N; ++m)
      for (long j = 0; j < n2; ++j)
        for (long i = 0; i < n1; ++i) inst.X(m, i + j * n1) = X2(m, j) * X1(m, i);
  }

  const double sd = noise_stddev(static_cast<double>(r) * sv * sv, N, snr);
  Rng noise(seed, Stream::noise);
  inst.xi = VectorXd::Zero(N);
  if (sd > 0.0)
    for (long i = 0; i < N; ++i) inst.xi(i) = sd * noise.normal();
  inst.y_star = inst.X * vec(inst.A_star) + inst.xi;
  return inst;
}

double mutual_coherence(const MatrixXd& A, const MatrixXd& B) {
  require(A.rows() == B.rows(), "mutual_coherence: row counts differ");
  VectorXd na = A.colwise().norm().transpose();
  VectorXd nb = B.colwise().norm().transpose();
  require((na.array() > 0.0).all() && (nb.array() > 0.0).all(),
          "mutual_coherence: zero column");
  MatrixXd G = A.transpose() * B;
  double best = 0.0;
  for (long j = 0; j < G.cols(); ++j)
    for (long i = 0; i < G.rows(); ++i)
      best = std::max(best, std::abs(G(i, j)) / (na(i) * nb(j)));
  return std::min(best, 1.0);
}

}  // namespace grok
